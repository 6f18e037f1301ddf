#include "embmf/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "embmf/data_io.hpp"
#include "embmf/errors.hpp"
#include "embmf/log.hpp"

namespace embmf {

using nlohmann::json;

EvalResult rmse(const ModelParams& params, const SparseRatings& test, bool clamp,
                RatingScale scale) {
    if (test.empty()) throw DataError("rmse: empty test set");

    double sq = 0.0;
    for (const auto& e : test.entries()) {
        double pred = predict(params, e.user, e.item);
        if (clamp) pred = std::clamp(pred, scale.min, scale.max);
        const double r = e.rating - pred;
        sq += r * r;
    }

    EvalResult result;
    result.rmse = std::sqrt(sq / static_cast<double>(test.size()));
    result.n_test = test.size();
    result.clamp = clamp;
    return result;
}

EvalResult run_experiment(const ExperimentData& data, const Hyperparams& hyper, SplitMode mode,
                          bool clamp, const FitOptions& options) {
    if (mode != data.mode)
        throw ConfigError("run_experiment: requested mode does not match the prepared splits");

    const auto t0 = std::chrono::steady_clock::now();
    auto [params, report] = fit(data.splits.train, data.ppmi, hyper, options);
    EvalResult result = rmse(params, data.splits.test, clamp, data.scale);
    result.mode = mode;
    result.hyper = hyper;
    result.dataset = data.name;
    result.denominator = data.denominator;
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log::info("experiment ", data.name, " mode=", to_string(mode),
              " model=", to_string(hyper.mode), " lambda_beta=", hyper.lambda_beta,
              " sweeps=", report.sweeps_run, " rmse=", result.rmse);
    return result;
}

std::vector<std::pair<double, EvalResult>> lambda_beta_sweep(const ExperimentData& data,
                                                             const Hyperparams& base,
                                                             std::span<const double> grid,
                                                             bool clamp,
                                                             const FitOptions& options) {
    if (grid.empty()) throw ConfigError("lambda_beta_sweep: empty grid");
    std::vector<std::pair<double, EvalResult>> results;
    results.reserve(grid.size());
    for (double lb : grid) {
        Hyperparams hyper = base;
        hyper.lambda_beta = lb;
        results.emplace_back(lb, run_experiment(data, hyper, data.mode, clamp, options));
    }
    return results;
}

Hyperparams grid_search(const ExperimentData& data, std::span<const Hyperparams> grid,
                        const FitOptions& options) {
    if (grid.empty()) throw ConfigError("grid_search: empty hyperparameter grid");
    if (data.splits.validation.empty()) throw DataError("grid_search: empty validation set");

    std::size_t best = 0;
    double best_rmse = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        auto [params, report] = fit(data.splits.train, data.ppmi, grid[k], options);
        const double v = rmse(params, data.splits.validation, false, data.scale).rmse;
        log::info("grid point ", k, ": lambda_theta=", grid[k].lambda_theta,
                  " lambda_beta=", grid[k].lambda_beta, " validation rmse=", v);
        if (v < best_rmse) {
            best_rmse = v;
            best = k;
        }
    }
    return grid[best];
}

namespace {

const char* kLedgerHeader =
    "dataset,mode,model,denominator,d,lambda,lambda_theta,lambda_beta,lambda_rho,"
    "lambda_alpha,lambda_b,lambda_c,clamp,seed,rmse,n_test,seconds\n";

}  // namespace

void append_result_csv(const std::filesystem::path& path, const EvalResult& r) {
    const bool fresh = !std::filesystem::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw DataError("cannot append to ledger: " + path.string());
    if (fresh) out << kLedgerHeader;
    const auto& h = r.hyper;
    out << r.dataset << ',' << to_string(r.mode) << ',' << to_string(h.mode) << ','
        << to_string(r.denominator) << ',' << h.d << ','
        << format_double(h.lambda) << ',' << format_double(h.lambda_theta) << ','
        << format_double(h.lambda_beta) << ',' << format_double(h.lambda_rho) << ','
        << format_double(h.lambda_alpha) << ',' << format_double(h.lambda_b) << ','
        << format_double(h.lambda_c) << ',' << (r.clamp ? 1 : 0) << ',' << h.seed << ','
        << format_double(r.rmse) << ',' << r.n_test << ',' << format_double(r.seconds) << '\n';
    if (!out) throw DataError("failed while appending to " + path.string());
}

void append_result_ndjson(const std::filesystem::path& path, const EvalResult& r) {
    std::ofstream out(path, std::ios::app);
    if (!out) throw DataError("cannot append to ledger: " + path.string());
    const auto& h = r.hyper;
    json j;
    j["dataset"] = r.dataset;
    j["mode"] = to_string(r.mode);
    j["model"] = to_string(h.mode);
    j["denominator"] = to_string(r.denominator);
    j["d"] = h.d;
    j["lambda"] = h.lambda;
    j["lambda_theta"] = h.lambda_theta;
    j["lambda_beta"] = h.lambda_beta;
    j["lambda_rho"] = h.lambda_rho;
    j["lambda_alpha"] = h.lambda_alpha;
    j["lambda_b"] = h.lambda_b;
    j["lambda_c"] = h.lambda_c;
    j["clamp"] = r.clamp;
    j["seed"] = h.seed;
    j["rmse"] = r.rmse;
    j["n_test"] = r.n_test;
    j["seconds"] = r.seconds;
    out << j.dump() << "\n";
    if (!out) throw DataError("failed while appending to " + path.string());
}

}  // namespace embmf
