#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "embmf/data.hpp"
#include "embmf/model.hpp"
#include "embmf/ppmi.hpp"

namespace embmf {

struct TrainReport {
    std::vector<double> objective_per_sweep;
    int sweeps_run = 0;
    bool converged = false;
    std::vector<double> wall_time_per_sweep;  // seconds
};

// The MAP objective: squared rating error, lambda-weighted squared PPMI
// error, and the Gaussian regularizers (beta tethered to rho). In
// pmf_baseline mode the PPMI term, the biases, and the tether are dropped.
double objective(const ModelParams& params, const SparseRatings& train, const PpmiMatrix& S,
                 const Hyperparams& hyper);

// Exact block minimizers; each phase leaves the objective no larger. Rows
// are independent within a phase and may be computed on several threads.
void update_user_vectors(ModelParams& params, const SparseRatings& train,
                         const Hyperparams& hyper, int threads = 1);
void update_item_vectors(ModelParams& params, const SparseRatings& train,
                         const Hyperparams& hyper, int threads = 1);
void update_user_bias(ModelParams& params, const SparseRatings& train, const Hyperparams& hyper,
                      int threads = 1);
void update_item_bias(ModelParams& params, const SparseRatings& train, const Hyperparams& hyper,
                      int threads = 1);
void update_embedding_vectors(ModelParams& params, const PpmiMatrix& S, const Hyperparams& hyper,
                              int threads = 1);
void update_context_vectors(ModelParams& params, const PpmiMatrix& S, const Hyperparams& hyper,
                            int threads = 1);

// Solves A x = y for symmetric positive-definite A via Cholesky, refining
// until ||Ax - y|| <= 1e-10 (1 + ||y||). Throws NumericError otherwise.
Vector solve_spd(const Matrix& A, const Vector& y);

struct FitOptions {
    int threads = 1;
    std::ostream* progress = nullptr;  // line-delimited JSON {sweep, objective, seconds}
    bool allow_decoupled = false;      // diagnostic: permit lambda_beta == 0
};

// Coordinate descent over the phases (b, c, theta, rho, alpha, beta),
// recording the objective after each full sweep, until the relative decrease
// drops below rel_tol or max_sweeps is reached. pmf_baseline skips the bias
// and embedding phases. beta is the last phase so rating-free items leave
// every sweep with beta_i exactly equal to rho_i.
std::pair<ModelParams, TrainReport> fit(const SparseRatings& train, const PpmiMatrix& S,
                                        const Hyperparams& hyper, const FitOptions& options = {});

}  // namespace embmf
