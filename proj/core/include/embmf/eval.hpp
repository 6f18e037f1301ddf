#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "embmf/data.hpp"
#include "embmf/model.hpp"
#include "embmf/ppmi.hpp"
#include "embmf/trainer.hpp"

namespace embmf {

struct RatingScale {
    double min = 1.0;
    double max = 5.0;
};

struct EvalResult {
    double rmse = 0.0;
    std::size_t n_test = 0;
    SplitMode mode = SplitMode::in_matrix;
    bool clamp = false;
    Hyperparams hyper;       // provenance
    std::string dataset;
    DenominatorMode denominator = DenominatorMode::user_count;
    double seconds = 0.0;    // train + eval wall time, 0 for bare scoring
};

// Root mean squared prediction error over the test entries. With clamp on,
// predictions are clipped to the rating scale first (off by default).
EvalResult rmse(const ModelParams& params, const SparseRatings& test, bool clamp,
                RatingScale scale);

// A prepared experiment: splits of the subsampled ratings plus the PPMI
// matrix built from the full binarized click log. Clicks on items whose
// ratings are held out are deliberately included; that is what makes
// out-matrix prediction possible. Test ratings themselves are never visible
// to training.
struct ExperimentData {
    std::string name;
    SplitMode mode = SplitMode::in_matrix;
    Splits splits;
    PpmiMatrix ppmi;
    DenominatorMode denominator = DenominatorMode::user_count;
    RatingScale scale;
};

// Trains on the train split with fixed hyperparameters and scores the test
// split.
EvalResult run_experiment(const ExperimentData& data, const Hyperparams& hyper, SplitMode mode,
                          bool clamp = false, const FitOptions& options = {});

// One run_experiment per grid value of lambda_beta, all else fixed.
std::vector<std::pair<double, EvalResult>> lambda_beta_sweep(const ExperimentData& data,
                                                             const Hyperparams& base,
                                                             std::span<const double> grid,
                                                             bool clamp = false,
                                                             const FitOptions& options = {});

// Trains each candidate and returns the one with the lowest validation RMSE;
// ties go to the earliest grid entry.
Hyperparams grid_search(const ExperimentData& data, std::span<const Hyperparams> grid,
                        const FitOptions& options = {});

// Appends one row per result to a CSV ledger (header written on creation)
// and mirrors it as line-delimited JSON.
void append_result_csv(const std::filesystem::path& path, const EvalResult& result);
void append_result_ndjson(const std::filesystem::path& path, const EvalResult& result);

}  // namespace embmf
