#include "embmf/model.hpp"

#include <cstring>
#include <fstream>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "embmf/errors.hpp"

namespace embmf {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'E', 'M', 'B', 'M', 'F', 'M', 'D', 'L'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

std::string to_string(ModelMode m) {
    return m == ModelMode::emb_mf ? "emb_mf" : "pmf_baseline";
}

ModelMode model_mode_from_string(const std::string& s) {
    if (s == "emb_mf") return ModelMode::emb_mf;
    if (s == "pmf_baseline") return ModelMode::pmf_baseline;
    throw ConfigError("unknown model mode '" + s + "' (expected emb_mf or pmf_baseline)");
}

void Hyperparams::validate(bool allow_decoupled) const {
    if (d < 1) throw ConfigError("d must be >= 1");
    const std::pair<const char*, double> regs[] = {
        {"lambda", lambda},          {"lambda_theta", lambda_theta},
        {"lambda_beta", lambda_beta}, {"lambda_rho", lambda_rho},
        {"lambda_alpha", lambda_alpha}, {"lambda_b", lambda_b},
        {"lambda_c", lambda_c}};
    for (const auto& [name, v] : regs)
        if (!(v >= 0.0)) throw ConfigError(std::string(name) + " must be >= 0");
    if (mode == ModelMode::emb_mf && !allow_decoupled && !(lambda_beta > 0.0))
        throw ConfigError("lambda_beta must be > 0 in emb_mf mode");
    if (max_sweeps < 1) throw ConfigError("max_sweeps must be >= 1");
    if (!(rel_tol > 0.0)) throw ConfigError("rel_tol must be > 0");
    if (!(init_scale >= 0.0)) throw ConfigError("init_scale must be >= 0");
}

bool ModelParams::all_finite() const {
    return theta.allFinite() && beta.allFinite() && rho.allFinite() && alpha.allFinite() &&
           b.allFinite() && c.allFinite() && std::isfinite(mu);
}

ModelParams init_params(int n_users, int n_items, const Hyperparams& hyper) {
    if (n_users < 0 || n_items < 0) throw ConfigError("negative user or item count");

    ModelParams p;
    p.theta.setZero(n_users, hyper.d);
    p.beta.setZero(n_items, hyper.d);
    p.rho.setZero(n_items, hyper.d);
    p.alpha.setZero(n_items, hyper.d);
    p.b = Vector::Zero(n_users);
    p.c = Vector::Zero(n_items);
    p.mu = 0.0;

    std::mt19937_64 rng(hyper.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto fill = [&](Matrix& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index col = 0; col < m.cols(); ++col)
                m(r, col) = hyper.init_scale * gauss(rng);
    };
    fill(p.theta);
    fill(p.beta);
    if (hyper.mode == ModelMode::emb_mf) {
        fill(p.rho);
        fill(p.alpha);
    }
    return p;
}

double predict(const ModelParams& params, std::optional<int> u, std::optional<int> i) {
    double r = params.mu;
    const bool has_u = u && *u >= 0 && *u < params.n_users();
    const bool has_i = i && *i >= 0 && *i < params.n_items();
    if (has_u) r += params.b(*u);
    if (has_i) r += params.c(*i);
    if (has_u && has_i) r += params.theta.row(*u).dot(params.beta.row(*i));
    return r;
}

namespace {

void write_raw(std::ofstream& out, const void* data, std::size_t bytes) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
}

void write_matrix(std::ofstream& out, const Matrix& m) {
    // Row-major storage, dumped as-is (little-endian doubles on this target).
    write_raw(out, m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

void write_vector(std::ofstream& out, const Vector& v) {
    write_raw(out, v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
}

void read_raw(std::ifstream& in, void* data, std::size_t bytes, const char* what) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(bytes));
    if (in.gcount() != static_cast<std::streamsize>(bytes))
        throw DataError(std::string("corrupt model file: truncated while reading ") + what);
}

}  // namespace

void save_model(const ModelParams& params, const Hyperparams& hyper, const ModelMeta& meta,
                const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file: " + path.string());

    json header;
    header["format_version"] = kFormatVersion;
    header["mode"] = to_string(hyper.mode);
    header["d"] = hyper.d;
    header["n_users"] = params.n_users();
    header["n_items"] = params.n_items();
    header["mu"] = params.mu;
    header["id_map_ref"] = meta.id_map_ref;
    header["sweeps_run"] = meta.sweeps_run;
    header["final_objective"] = meta.final_objective;
    header["hyper"] = {{"d", hyper.d},
                       {"lambda", hyper.lambda},
                       {"lambda_theta", hyper.lambda_theta},
                       {"lambda_beta", hyper.lambda_beta},
                       {"lambda_rho", hyper.lambda_rho},
                       {"lambda_alpha", hyper.lambda_alpha},
                       {"lambda_b", hyper.lambda_b},
                       {"lambda_c", hyper.lambda_c},
                       {"max_sweeps", hyper.max_sweeps},
                       {"rel_tol", hyper.rel_tol},
                       {"init_scale", hyper.init_scale},
                       {"seed", hyper.seed},
                       {"mode", to_string(hyper.mode)}};
    const std::string header_text = header.dump();

    write_raw(out, kMagic, sizeof(kMagic));
    std::uint32_t version = kFormatVersion;
    write_raw(out, &version, sizeof(version));
    std::uint64_t header_len = header_text.size();
    write_raw(out, &header_len, sizeof(header_len));
    write_raw(out, header_text.data(), header_text.size());

    write_matrix(out, params.theta);
    write_matrix(out, params.beta);
    write_matrix(out, params.rho);
    write_matrix(out, params.alpha);
    write_vector(out, params.b);
    write_vector(out, params.c);

    if (!out) throw DataError("failed while writing model file: " + path.string());
}

LoadedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file: " + path.string());

    char magic[sizeof(kMagic)];
    read_raw(in, magic, sizeof(magic), "magic");
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw DataError("not a model file (bad magic): " + path.string());

    std::uint32_t version = 0;
    read_raw(in, &version, sizeof(version), "version");
    if (version != kFormatVersion)
        throw DataError("model file version mismatch: file has " + std::to_string(version) +
                        ", expected " + std::to_string(kFormatVersion));

    std::uint64_t header_len = 0;
    read_raw(in, &header_len, sizeof(header_len), "header length");
    std::string header_text(header_len, '\0');
    read_raw(in, header_text.data(), header_len, "header");

    json header;
    try {
        header = json::parse(header_text);
    } catch (const json::exception& e) {
        throw DataError(std::string("corrupt model file: bad header json: ") + e.what());
    }

    LoadedModel loaded;
    try {
        const auto& h = header.at("hyper");
        loaded.hyper.d = h.at("d").get<int>();
        loaded.hyper.lambda = h.at("lambda").get<double>();
        loaded.hyper.lambda_theta = h.at("lambda_theta").get<double>();
        loaded.hyper.lambda_beta = h.at("lambda_beta").get<double>();
        loaded.hyper.lambda_rho = h.at("lambda_rho").get<double>();
        loaded.hyper.lambda_alpha = h.at("lambda_alpha").get<double>();
        loaded.hyper.lambda_b = h.at("lambda_b").get<double>();
        loaded.hyper.lambda_c = h.at("lambda_c").get<double>();
        loaded.hyper.max_sweeps = h.at("max_sweeps").get<int>();
        loaded.hyper.rel_tol = h.at("rel_tol").get<double>();
        loaded.hyper.init_scale = h.at("init_scale").get<double>();
        loaded.hyper.seed = h.at("seed").get<std::uint64_t>();
        loaded.hyper.mode = model_mode_from_string(h.at("mode").get<std::string>());
        loaded.meta.sweeps_run = header.at("sweeps_run").get<int>();
        loaded.meta.final_objective = header.at("final_objective").get<double>();
        loaded.meta.id_map_ref = header.at("id_map_ref").get<std::string>();
    } catch (const json::exception& e) {
        throw DataError(std::string("corrupt model file: incomplete header: ") + e.what());
    }

    const int d = header.at("d").get<int>();
    const int n_users = header.at("n_users").get<int>();
    const int n_items = header.at("n_items").get<int>();
    if (d != loaded.hyper.d)
        throw DataError("model file dimension mismatch: header d disagrees with hyperparameters");
    if (d < 1 || n_users < 0 || n_items < 0)
        throw DataError("model file dimension mismatch: nonsensical shapes in header");

    auto& p = loaded.params;
    p.mu = header.at("mu").get<double>();
    p.theta.resize(n_users, d);
    p.beta.resize(n_items, d);
    p.rho.resize(n_items, d);
    p.alpha.resize(n_items, d);
    p.b.resize(n_users);
    p.c.resize(n_items);

    read_raw(in, p.theta.data(), sizeof(double) * static_cast<std::size_t>(p.theta.size()), "theta");
    read_raw(in, p.beta.data(), sizeof(double) * static_cast<std::size_t>(p.beta.size()), "beta");
    read_raw(in, p.rho.data(), sizeof(double) * static_cast<std::size_t>(p.rho.size()), "rho");
    read_raw(in, p.alpha.data(), sizeof(double) * static_cast<std::size_t>(p.alpha.size()), "alpha");
    read_raw(in, p.b.data(), sizeof(double) * static_cast<std::size_t>(p.b.size()), "b");
    read_raw(in, p.c.data(), sizeof(double) * static_cast<std::size_t>(p.c.size()), "c");

    char extra = 0;
    in.read(&extra, 1);
    if (!in.eof()) throw DataError("corrupt model file: trailing bytes after parameters");

    return loaded;
}

}  // namespace embmf
