#include "embmf/data_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "embmf/errors.hpp"

namespace embmf {

using nlohmann::json;

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw NumericError("failed to format a double");
    return std::string(buf, ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path.string());
    return in;
}

}  // namespace

void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
    json j;
    j["dataset_name"] = m.dataset_name;
    j["input_path"] = m.input_path;
    j["format"] = to_string(m.format);
    j["seed"] = m.seed;
    j["mode"] = to_string(m.mode);
    j["percent"] = m.percent;
    j["train_fraction"] = m.train_fraction;
    j["validation_fraction"] = m.validation_fraction;
    j["scale_min"] = m.scale_min;
    j["scale_max"] = m.scale_max;
    j["counts"] = {{"n_users", m.n_users},
                   {"n_items", m.n_items},
                   {"n_click_events", m.n_click_events},
                   {"n_ratings_sampled", m.n_ratings_sampled},
                   {"n_train", m.n_train},
                   {"n_validation", m.n_validation},
                   {"n_test", m.n_test}};
    j["rating_density"] = m.rating_density;
    j["user_ids"] = m.ids.user_ids();
    j["item_ids"] = m.ids.item_ids();

    auto out = open_out(path);
    out << j.dump(2) << "\n";
    if (!out) throw DataError("failed while writing " + path.string());
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    auto in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("bad manifest json in " + path.string() + ": " + e.what());
    }

    DatasetManifest m;
    try {
        m.dataset_name = j.at("dataset_name").get<std::string>();
        m.input_path = j.at("input_path").get<std::string>();
        m.format = input_format_from_string(j.at("format").get<std::string>());
        m.seed = j.at("seed").get<std::uint64_t>();
        m.mode = split_mode_from_string(j.at("mode").get<std::string>());
        m.percent = j.at("percent").get<double>();
        m.train_fraction = j.at("train_fraction").get<double>();
        m.validation_fraction = j.at("validation_fraction").get<double>();
        m.scale_min = j.at("scale_min").get<double>();
        m.scale_max = j.at("scale_max").get<double>();
        const auto& counts = j.at("counts");
        m.n_users = counts.at("n_users").get<int>();
        m.n_items = counts.at("n_items").get<int>();
        m.n_click_events = counts.at("n_click_events").get<std::size_t>();
        m.n_ratings_sampled = counts.at("n_ratings_sampled").get<std::size_t>();
        m.n_train = counts.at("n_train").get<std::size_t>();
        m.n_validation = counts.at("n_validation").get<std::size_t>();
        m.n_test = counts.at("n_test").get<std::size_t>();
        m.rating_density = j.at("rating_density").get<double>();
        for (const auto& id : j.at("user_ids")) m.ids.add_user(id.get<std::string>());
        for (const auto& id : j.at("item_ids")) m.ids.add_item(id.get<std::string>());
    } catch (const json::exception& e) {
        throw DataError("incomplete manifest " + path.string() + ": " + e.what());
    }
    if (m.ids.user_count() != m.n_users || m.ids.item_count() != m.n_items)
        throw DataError("manifest id maps disagree with counts in " + path.string());
    return m;
}

void write_ratings_csv(const std::filesystem::path& path, const SparseRatings& ratings,
                       const IdMap& ids) {
    auto out = open_out(path);
    out << "user,item,rating\n";
    for (const auto& e : ratings.entries())
        out << ids.user_id(e.user) << ',' << ids.item_id(e.item) << ',' << format_double(e.rating)
            << '\n';
    if (!out) throw DataError("failed while writing " + path.string());
}

SparseRatings load_ratings_csv(const std::filesystem::path& path, const IdMap& ids) {
    // Unlike parse_interactions this accepts a header-only file: a
    // validation split can legitimately be empty on tiny datasets.
    auto in = open_in(path);
    std::vector<RatingTriple> triples;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("user,item,rating", 0) != 0)
                throw ParseError(path.string() + ":1: expected header 'user,item,rating'");
            continue;
        }
        auto c1 = line.find(',');
        auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": expected user,item,rating");
        auto u = ids.user_index(line.substr(0, c1));
        auto i = ids.item_index(line.substr(c1 + 1, c2 - c1 - 1));
        if (!u || !i)
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": id unknown to the manifest");
        double v = 0.0;
        try {
            v = std::stod(line.substr(c2 + 1));
        } catch (const std::exception&) {
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad rating value");
        }
        triples.push_back({*u, *i, v});
    }
    return SparseRatings::from_triples(ids.user_count(), ids.item_count(), std::move(triples));
}

void write_clicks_csv(const std::filesystem::path& path, const ClickLog& log, const IdMap& ids) {
    auto out = open_out(path);
    out << "user,item\n";
    for (int u = 0; u < log.n_users; ++u)
        for (int i : log.clicks_by_user[u]) out << ids.user_id(u) << ',' << ids.item_id(i) << '\n';
    if (!out) throw DataError("failed while writing " + path.string());
}

ClickLog load_clicks_csv(const std::filesystem::path& path, const IdMap& ids) {
    auto in = open_in(path);
    ClickLog log;
    log.n_users = ids.user_count();
    log.n_items = ids.item_count();
    log.clicks_by_user.assign(log.n_users, {});

    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("user,item", 0) != 0)
                throw ParseError(path.string() + ":1: expected header 'user,item'");
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected user,item");
        auto u = ids.user_index(line.substr(0, comma));
        auto i = ids.item_index(line.substr(comma + 1));
        if (!u || !i)
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": id unknown to the manifest");
        log.clicks_by_user[*u].push_back(*i);
    }
    for (auto& items : log.clicks_by_user) {
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
    }
    return log;
}

void write_ppmi(const std::filesystem::path& csv_path, const std::filesystem::path& meta_path,
                const PpmiMatrix& S, DenominatorMode mode) {
    {
        auto out = open_out(csv_path);
        out << "i,j,value\n";
        for (int i = 0; i < S.n_items; ++i)
            for (const auto& [j, v] : S.rows[i]) out << i << ',' << j << ',' << format_double(v) << '\n';
        if (!out) throw DataError("failed while writing " + csv_path.string());
    }
    json meta;
    meta["n_items"] = S.n_items;
    meta["nnz"] = S.nnz;
    meta["denominator_mode"] = to_string(mode);
    auto out = open_out(meta_path);
    out << meta.dump(2) << "\n";
    if (!out) throw DataError("failed while writing " + meta_path.string());
}

LoadedPpmi load_ppmi(const std::filesystem::path& csv_path,
                     const std::filesystem::path& meta_path) {
    LoadedPpmi loaded;
    {
        auto in = open_in(meta_path);
        json meta;
        try {
            in >> meta;
            loaded.matrix.n_items = meta.at("n_items").get<int>();
            loaded.mode = denominator_mode_from_string(meta.at("denominator_mode").get<std::string>());
        } catch (const json::exception& e) {
            throw DataError("bad ppmi metadata in " + meta_path.string() + ": " + e.what());
        }
    }
    loaded.matrix.rows.assign(loaded.matrix.n_items, {});

    auto in = open_in(csv_path);
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("i,j,value", 0) != 0)
                throw ParseError(csv_path.string() + ":1: expected header 'i,j,value'");
            continue;
        }
        int i = 0, j = 0;
        double v = 0.0;
        std::istringstream ss(line);
        char c1 = 0, c2 = 0;
        if (!(ss >> i >> c1 >> j >> c2 >> v) || c1 != ',' || c2 != ',')
            throw ParseError(csv_path.string() + ":" + std::to_string(lineno) + ": bad triple");
        if (i < 0 || i >= loaded.matrix.n_items || j < 0 || j >= loaded.matrix.n_items)
            throw DataError(csv_path.string() + ":" + std::to_string(lineno) +
                            ": index outside the declared item count");
        loaded.matrix.rows[i].emplace_back(j, v);
        ++loaded.matrix.nnz;
    }
    for (auto& row : loaded.matrix.rows)
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    loaded.matrix.validate();
    return loaded;
}

}  // namespace embmf
