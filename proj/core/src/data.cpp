#include "embmf/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "embmf/errors.hpp"

namespace embmf {

namespace {

std::string trim(const std::string& s) {
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_on(const std::string& line, const std::string& sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto next = line.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + sep.size();
    }
}

double parse_value(const std::string& field, const std::filesystem::path& path, std::size_t lineno) {
    try {
        std::size_t consumed = 0;
        double v = std::stod(field, &consumed);
        if (consumed != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        std::ostringstream os;
        os << path.string() << ":" << lineno << ": bad rating value '" << field << "'";
        throw ParseError(os.str());
    }
}

std::optional<std::int64_t> parse_timestamp(const std::string& field,
                                            const std::filesystem::path& path,
                                            std::size_t lineno) {
    std::string t = trim(field);
    if (t.empty()) return std::nullopt;
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
        std::ostringstream os;
        os << path.string() << ":" << lineno << ": bad timestamp '" << field << "'";
        throw ParseError(os.str());
    }
    return v;
}

}  // namespace

std::string to_string(InputFormat f) {
    return f == InputFormat::movielens_dat ? "movielens_dat" : "csv";
}

InputFormat input_format_from_string(const std::string& s) {
    if (s == "movielens_dat" || s == "movielens") return InputFormat::movielens_dat;
    if (s == "csv") return InputFormat::csv;
    throw ConfigError("unknown input format '" + s + "' (expected movielens_dat or csv)");
}

std::string to_string(SplitMode m) {
    return m == SplitMode::in_matrix ? "in-matrix" : "out-matrix";
}

SplitMode split_mode_from_string(const std::string& s) {
    if (s == "in-matrix" || s == "in_matrix") return SplitMode::in_matrix;
    if (s == "out-matrix" || s == "out_matrix") return SplitMode::out_matrix;
    throw ConfigError("unknown split mode '" + s + "' (expected in-matrix or out-matrix)");
}

std::vector<InteractionRecord> parse_interactions(const std::filesystem::path& path,
                                                  InputFormat format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open input file: " + path.string());

    std::vector<InteractionRecord> records;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;

    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) continue;

        if (format == InputFormat::csv && !header_seen) {
            header_seen = true;
            auto fields = split_on(t, ",");
            if (fields.size() < 3 || trim(fields[0]) != "user" || trim(fields[1]) != "item" ||
                trim(fields[2]) != "rating") {
                std::ostringstream os;
                os << path.string() << ":" << lineno
                   << ": expected csv header 'user,item,rating[,timestamp]', got '" << t << "'";
                throw ParseError(os.str());
            }
            continue;
        }

        auto fields = split_on(t, format == InputFormat::movielens_dat ? "::" : ",");
        std::size_t min_fields = format == InputFormat::movielens_dat ? 4 : 3;
        std::size_t max_fields = 4;
        if (fields.size() < min_fields || fields.size() > max_fields) {
            std::ostringstream os;
            os << path.string() << ":" << lineno << ": expected "
               << (format == InputFormat::movielens_dat ? "user::item::rating::timestamp"
                                                        : "user,item,rating[,timestamp]")
               << ", got " << fields.size() << " fields";
            throw ParseError(os.str());
        }

        InteractionRecord rec;
        rec.user = trim(fields[0]);
        rec.item = trim(fields[1]);
        if (rec.user.empty() || rec.item.empty()) {
            std::ostringstream os;
            os << path.string() << ":" << lineno << ": empty user or item id";
            throw ParseError(os.str());
        }
        rec.value = parse_value(trim(fields[2]), path, lineno);
        if (rec.value < 0) {
            std::ostringstream os;
            os << path.string() << ":" << lineno << ": negative rating value";
            throw ParseError(os.str());
        }
        if (fields.size() == 4) rec.timestamp = parse_timestamp(fields[3], path, lineno);
        records.push_back(std::move(rec));
    }

    if (records.empty()) throw DataError("no interaction records in " + path.string());
    return records;
}

IdMap IdMap::from_records(const std::vector<InteractionRecord>& records) {
    IdMap ids;
    for (const auto& rec : records) {
        ids.add_user(rec.user);
        ids.add_item(rec.item);
    }
    return ids;
}

int IdMap::add_user(const std::string& id) {
    auto [it, inserted] = user_to_index_.try_emplace(id, static_cast<int>(user_ids_.size()));
    if (inserted) user_ids_.push_back(id);
    return it->second;
}

int IdMap::add_item(const std::string& id) {
    auto [it, inserted] = item_to_index_.try_emplace(id, static_cast<int>(item_ids_.size()));
    if (inserted) item_ids_.push_back(id);
    return it->second;
}

std::optional<int> IdMap::user_index(const std::string& id) const {
    auto it = user_to_index_.find(id);
    if (it == user_to_index_.end()) return std::nullopt;
    return it->second;
}

std::optional<int> IdMap::item_index(const std::string& id) const {
    auto it = item_to_index_.find(id);
    if (it == item_to_index_.end()) return std::nullopt;
    return it->second;
}

SparseRatings SparseRatings::from_triples(int n_users, int n_items,
                                          std::vector<RatingTriple> entries) {
    SparseRatings r;
    r.n_users_ = n_users;
    r.n_items_ = n_items;
    r.entries_ = std::move(entries);
    r.by_user_.assign(n_users, {});
    r.by_item_.assign(n_items, {});

    double sum = 0.0;
    for (const auto& e : r.entries_) {
        if (e.user < 0 || e.user >= n_users || e.item < 0 || e.item >= n_items)
            throw DataError("rating index out of range");
        r.by_user_[e.user].emplace_back(e.item, e.rating);
        r.by_item_[e.item].emplace_back(e.user, e.rating);
        sum += e.rating;
    }
    for (auto& row : r.by_user_) std::sort(row.begin(), row.end());
    for (auto& col : r.by_item_) std::sort(col.begin(), col.end());
    for (const auto& row : r.by_user_) {
        for (std::size_t k = 1; k < row.size(); ++k)
            if (row[k].first == row[k - 1].first)
                throw DataError("duplicate (user, item) rating pair");
    }
    r.global_mean_ = r.entries_.empty() ? 0.0 : sum / static_cast<double>(r.entries_.size());
    return r;
}

void SparseRatings::validate() const {
    std::size_t from_users = 0, from_items = 0;
    for (const auto& row : by_user_) from_users += row.size();
    for (const auto& col : by_item_) from_items += col.size();
    if (from_users != entries_.size() || from_items != entries_.size())
        throw DataError("adjacency views out of sync with entry list");

    std::multiset<std::tuple<int, int, double>> a, b, c;
    for (const auto& e : entries_) a.emplace(e.user, e.item, e.rating);
    for (int u = 0; u < n_users_; ++u)
        for (const auto& [i, v] : by_user_[u]) b.emplace(u, i, v);
    for (int i = 0; i < n_items_; ++i)
        for (const auto& [u, v] : by_item_[i]) c.emplace(u, i, v);
    if (a != b || a != c) throw DataError("by_user/by_item are not transposes of entries");

    double sum = 0.0;
    for (const auto& e : entries_) sum += e.rating;
    double mean = entries_.empty() ? 0.0 : sum / static_cast<double>(entries_.size());
    if (std::abs(mean - global_mean_) > 1e-12 * (1.0 + std::abs(mean)))
        throw DataError("stale global mean");
}

std::size_t ClickLog::total_clicks() const {
    std::size_t n = 0;
    for (const auto& s : clicks_by_user) n += s.size();
    return n;
}

ClickLog binarize_to_clicks(const std::vector<InteractionRecord>& records, const IdMap& ids) {
    ClickLog log;
    log.n_users = ids.user_count();
    log.n_items = ids.item_count();
    log.clicks_by_user.assign(log.n_users, {});
    for (const auto& rec : records) {
        auto u = ids.user_index(rec.user);
        auto i = ids.item_index(rec.item);
        if (!u || !i) throw DataError("record references an id missing from the id map");
        log.clicks_by_user[*u].push_back(*i);
    }
    for (auto& items : log.clicks_by_user) {
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
    }
    return log;
}

SparseRatings subsample_ratings(const std::vector<InteractionRecord>& records, const IdMap& ids,
                                double percent, std::uint64_t seed) {
    if (!(percent > 0.0) || percent > 100.0)
        throw ConfigError("subsample percent must be in (0, 100]");

    std::vector<RatingTriple> eligible;
    for (const auto& rec : records) {
        if (rec.value <= 0.0) continue;  // click-only
        auto u = ids.user_index(rec.user);
        auto i = ids.item_index(rec.item);
        if (!u || !i) throw DataError("record references an id missing from the id map");
        eligible.push_back({*u, *i, rec.value});
    }
    if (eligible.empty()) throw DataError("no rated records to subsample");

    auto want = static_cast<std::size_t>(
        std::floor(static_cast<double>(eligible.size()) * percent / 100.0));
    if (percent == 100.0) want = eligible.size();

    std::mt19937_64 rng(seed);
    std::shuffle(eligible.begin(), eligible.end(), rng);
    eligible.resize(want);
    // Entry order is made canonical so equal samples serialize identically.
    std::sort(eligible.begin(), eligible.end(), [](const auto& a, const auto& b) {
        return std::tie(a.user, a.item) < std::tie(b.user, b.item);
    });
    return SparseRatings::from_triples(ids.user_count(), ids.item_count(), std::move(eligible));
}

namespace {

// Moves ~validation_fraction of train into validation while keeping every
// validation item covered by at least one remaining train entry.
void carve_validation(std::vector<RatingTriple>& train, std::vector<RatingTriple>& validation,
                      int n_items, double fraction, std::mt19937_64& rng) {
    if (train.empty()) return;
    auto want = static_cast<std::size_t>(
        std::floor(static_cast<double>(train.size()) * fraction));
    if (want == 0) return;

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<int> train_item_count(n_items, 0);
    for (const auto& e : train) ++train_item_count[e.item];

    std::vector<char> to_val(train.size(), 0);
    for (std::size_t k = 0; k < want; ++k) {
        to_val[order[k]] = 1;
        --train_item_count[train[order[k]].item];
    }
    // Repair pass: selected entries whose item lost all train coverage go
    // back to train, in selection order.
    for (std::size_t k = 0; k < want; ++k) {
        std::size_t idx = order[k];
        if (train_item_count[train[idx].item] == 0) {
            to_val[idx] = 0;
            ++train_item_count[train[idx].item];
        }
    }

    std::vector<RatingTriple> kept;
    kept.reserve(train.size() - want);
    for (std::size_t k = 0; k < train.size(); ++k) {
        if (to_val[k])
            validation.push_back(train[k]);
        else
            kept.push_back(train[k]);
    }
    train = std::move(kept);
}

void sort_canonical(std::vector<RatingTriple>& v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        return std::tie(a.user, a.item) < std::tie(b.user, b.item);
    });
}

}  // namespace

Splits split_ratings(const SparseRatings& ratings, const SplitSpec& spec) {
    if (ratings.empty()) throw DataError("cannot split an empty rating set");
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw ConfigError("train_fraction must be in (0, 1)");
    if (!(spec.validation_fraction_of_train > 0.0 && spec.validation_fraction_of_train < 1.0))
        throw ConfigError("validation_fraction_of_train must be in (0, 1)");

    const int n_users = ratings.n_users();
    const int n_items = ratings.n_items();
    std::mt19937_64 rng(spec.seed);

    std::vector<RatingTriple> train, validation, test;

    if (spec.mode == SplitMode::in_matrix) {
        std::vector<RatingTriple> entries = ratings.entries();
        std::shuffle(entries.begin(), entries.end(), rng);
        auto n_train = static_cast<std::size_t>(
            std::floor(static_cast<double>(entries.size()) * spec.train_fraction));
        train.assign(entries.begin(), entries.begin() + n_train);
        test.assign(entries.begin() + n_train, entries.end());

        std::vector<int> train_item_count(n_items, 0);
        for (const auto& e : train) ++train_item_count[e.item];

        // Coverage repair: a test item unseen in train is moved to train.
        std::vector<RatingTriple> kept_test;
        kept_test.reserve(test.size());
        for (const auto& e : test) {
            if (train_item_count[e.item] == 0) {
                train.push_back(e);
                ++train_item_count[e.item];
            } else {
                kept_test.push_back(e);
            }
        }
        test = std::move(kept_test);
    } else {
        std::vector<int> items_with_ratings;
        for (int i = 0; i < n_items; ++i)
            if (!ratings.by_item(i).empty()) items_with_ratings.push_back(i);
        std::shuffle(items_with_ratings.begin(), items_with_ratings.end(), rng);
        auto n_train_items = static_cast<std::size_t>(std::floor(
            static_cast<double>(items_with_ratings.size()) * spec.train_fraction));

        std::vector<char> is_test_item(n_items, 0);
        for (std::size_t k = n_train_items; k < items_with_ratings.size(); ++k)
            is_test_item[items_with_ratings[k]] = 1;

        for (const auto& e : ratings.entries()) {
            if (is_test_item[e.item])
                test.push_back(e);
            else
                train.push_back(e);
        }
    }

    if (train.empty()) throw DataError("split would leave the training set empty");
    carve_validation(train, validation, n_items, spec.validation_fraction_of_train, rng);
    if (train.empty()) throw DataError("split would leave the training set empty");

    sort_canonical(train);
    sort_canonical(validation);
    sort_canonical(test);

    Splits out;
    out.train = SparseRatings::from_triples(n_users, n_items, std::move(train));
    out.validation = SparseRatings::from_triples(n_users, n_items, std::move(validation));
    out.test = SparseRatings::from_triples(n_users, n_items, std::move(test));
    return out;
}

}  // namespace embmf
