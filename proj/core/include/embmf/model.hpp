#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace embmf {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// emb_mf couples the rating factorization with the click-derived PPMI
// factorization; pmf_baseline drops the click term, the biases, and the
// embedding tether (plain probabilistic matrix factorization around the mean).
enum class ModelMode { emb_mf, pmf_baseline };

std::string to_string(ModelMode m);
ModelMode model_mode_from_string(const std::string& s);

struct Hyperparams {
    int d = 20;                  // latent dimensionality
    double lambda = 1.0;         // click-term weight
    double lambda_theta = 1.0;
    double lambda_beta = 20.0;   // tether of beta to rho
    double lambda_rho = 0.1;
    double lambda_alpha = 0.1;
    double lambda_b = 1.0;
    double lambda_c = 1.0;
    int max_sweeps = 50;
    double rel_tol = 1e-4;       // relative objective decrease to stop
    double init_scale = 0.1;
    std::uint64_t seed = 0;
    ModelMode mode = ModelMode::emb_mf;

    // Throws ConfigError on out-of-range settings. In emb_mf mode lambda_beta
    // must be positive: the item update is singular for a rating-free item
    // otherwise. allow_decoupled lifts that one check for diagnostics.
    void validate(bool allow_decoupled = false) const;
};

// All latent blocks plus the fixed global mean. In pmf_baseline mode rho and
// alpha stay identically zero and unused.
struct ModelParams {
    Matrix theta;  // N x d
    Matrix beta;   // M x d
    Matrix rho;    // M x d
    Matrix alpha;  // M x d
    Vector b;      // user bias, length N
    Vector c;      // item bias, length M
    double mu = 0.0;

    int n_users() const { return static_cast<int>(theta.rows()); }
    int n_items() const { return static_cast<int>(beta.rows()); }
    int dim() const { return static_cast<int>(theta.cols()); }

    bool all_finite() const;
};

// Latent entries ~ N(0, init_scale^2) from the seed; biases start at zero.
// mu is set from the training ratings by the caller.
ModelParams init_params(int n_users, int n_items, const Hyperparams& hyper);

// mu + b_u + c_i + theta_u . beta_i; an absent or unseen index contributes
// zero for each of its terms. No clamping here.
double predict(const ModelParams& params, std::optional<int> u, std::optional<int> i);

struct ModelMeta {
    int sweeps_run = 0;
    double final_objective = 0.0;
    std::string id_map_ref;  // path of the manifest the index space came from
};

void save_model(const ModelParams& params, const Hyperparams& hyper, const ModelMeta& meta,
                const std::filesystem::path& path);

struct LoadedModel {
    ModelParams params;
    Hyperparams hyper;
    ModelMeta meta;
};

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace embmf
