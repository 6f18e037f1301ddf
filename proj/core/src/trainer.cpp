#include "embmf/trainer.hpp"

#include <Eigen/Cholesky>

#include <cassert>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

#include "embmf/errors.hpp"
#include "embmf/log.hpp"

namespace embmf {

namespace {

void check_dims(const ModelParams& params, const SparseRatings& train, const PpmiMatrix& S) {
    if (params.n_users() != train.n_users() || params.n_items() != train.n_items())
        throw DataError("model/rating dimension mismatch");
    if (S.n_items != 0 && S.n_items != params.n_items())
        throw DataError("model/PPMI dimension mismatch");
}

void check_finite(const ModelParams& params) {
    const std::pair<const char*, bool> blocks[] = {
        {"theta", params.theta.allFinite()}, {"beta", params.beta.allFinite()},
        {"rho", params.rho.allFinite()},     {"alpha", params.alpha.allFinite()},
        {"b", params.b.allFinite()},         {"c", params.c.allFinite()},
        {"mu", std::isfinite(params.mu)}};
    for (const auto& [name, ok] : blocks)
        if (!ok) throw NumericError(std::string("non-finite values in parameter block ") + name);
}

// Static row partition; worker w handles rows [w*chunk, ...). Each row's
// result depends only on frozen blocks, so the outcome is identical for any
// worker count.
template <typename Fn>
void parallel_rows(int n_rows, int threads, Fn&& fn) {
    if (threads <= 1 || n_rows < 2 * threads) {
        for (int r = 0; r < n_rows; ++r) fn(r);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(threads);
    const int chunk = (n_rows + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        const int begin = w * chunk;
        const int end = std::min(n_rows, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&fn, begin, end] {
            for (int r = begin; r < end; ++r) fn(r);
        });
    }
    for (auto& t : workers) t.join();
}

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

double objective(const ModelParams& params, const SparseRatings& train, const PpmiMatrix& S,
                 const Hyperparams& hyper) {
    check_dims(params, train, S);
    check_finite(params);
    const bool pmf = hyper.mode == ModelMode::pmf_baseline;

    double rating_term = 0.0;
    for (const auto& e : train.entries()) {
        const double base = pmf ? params.mu : params.mu + params.b(e.user) + params.c(e.item);
        const double r = e.rating - (base + params.theta.row(e.user).dot(params.beta.row(e.item)));
        rating_term += r * r;
    }

    double value = 0.5 * rating_term;
    value += 0.5 * hyper.lambda_theta * params.theta.squaredNorm();

    if (pmf) {
        value += 0.5 * hyper.lambda_beta * params.beta.squaredNorm();
        return value;
    }

    double click_term = 0.0;
    for (int i = 0; i < S.n_items; ++i) {
        for (const auto& [j, s] : S.rows[i]) {
            const double r = s - params.rho.row(i).dot(params.alpha.row(j));
            click_term += r * r;
        }
    }
    value += 0.5 * hyper.lambda * click_term;
    value += 0.5 * hyper.lambda_beta * (params.beta - params.rho).squaredNorm();
    value += 0.5 * hyper.lambda_rho * params.rho.squaredNorm();
    value += 0.5 * hyper.lambda_alpha * params.alpha.squaredNorm();
    value += 0.5 * hyper.lambda_b * params.b.squaredNorm();
    value += 0.5 * hyper.lambda_c * params.c.squaredNorm();
    return value;
}

Vector solve_spd(const Matrix& A, const Vector& y) {
    if (A.rows() != A.cols() || A.rows() != y.size())
        throw NumericError("solve_spd: shape mismatch");
    if (!A.isApprox(A.transpose(), 1e-12))
        throw NumericError("solve_spd: matrix is not symmetric");

    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
        throw NumericError("solve_spd: Cholesky failed (matrix not positive-definite)");

    Vector x = llt.solve(y);
    const double tol = 1e-10 * (1.0 + y.norm());
    for (int pass = 0; pass < 2 && (A * x - y).norm() > tol; ++pass)
        x += llt.solve(y - A * x);  // iterative refinement
    if (!((A * x - y).norm() <= tol))
        throw NumericError("solve_spd: residual above tolerance (ill-conditioned system)");
    return x;
}

namespace {

// Shared form of the theta/beta updates: x = (sum w_k v_k v_k^T + ridge I)^-1
// (rhs0 + sum t_k v_k) accumulated row by row.
struct RowSystem {
    Matrix gram;
    Vector rhs;

    explicit RowSystem(int d) : gram(d, d), rhs(d) {}

    void reset(double ridge) {
        gram.setZero();
        gram.diagonal().array() = ridge;
        rhs.setZero();
    }

    void rank_one(const Eigen::Ref<const Eigen::RowVectorXd>& v, double target, double weight = 1.0) {
        gram.selfadjointView<Eigen::Lower>().rankUpdate(v.transpose(), weight);
        rhs.noalias() += (weight * target) * v.transpose();
    }

    Vector solve() {
        gram.triangularView<Eigen::StrictlyUpper>() =
            gram.triangularView<Eigen::StrictlyLower>().transpose();
        return solve_spd(gram, rhs);
    }
};

}  // namespace

void update_user_vectors(ModelParams& params, const SparseRatings& train,
                         const Hyperparams& hyper, int threads) {
    const bool pmf = hyper.mode == ModelMode::pmf_baseline;
    parallel_rows(params.n_users(), threads, [&](int u) {
        const auto& rated = train.by_user(u);
        if (rated.empty()) {
            params.theta.row(u).setZero();
            return;
        }
        RowSystem sys(hyper.d);
        sys.reset(hyper.lambda_theta);
        for (const auto& [i, r] : rated) {
            const double base = pmf ? params.mu : params.mu + params.b(u) + params.c(i);
            sys.rank_one(params.beta.row(i), r - base);
        }
        params.theta.row(u) = sys.solve().transpose();
    });
}

void update_item_vectors(ModelParams& params, const SparseRatings& train,
                         const Hyperparams& hyper, int threads) {
    const bool pmf = hyper.mode == ModelMode::pmf_baseline;
    parallel_rows(params.n_items(), threads, [&](int i) {
        const auto& raters = train.by_item(i);
        if (raters.empty()) {
            // Ridge-only system: beta_i collapses onto its prior mean.
            if (pmf)
                params.beta.row(i).setZero();
            else
                params.beta.row(i) = params.rho.row(i);
            return;
        }
        RowSystem sys(hyper.d);
        sys.reset(hyper.lambda_beta);
        if (!pmf) sys.rhs = hyper.lambda_beta * params.rho.row(i).transpose();
        for (const auto& [u, r] : raters) {
            const double base = pmf ? params.mu : params.mu + params.b(u) + params.c(i);
            sys.rank_one(params.theta.row(u), r - base);
        }
        params.beta.row(i) = sys.solve().transpose();
    });
}

void update_user_bias(ModelParams& params, const SparseRatings& train, const Hyperparams& hyper,
                      int threads) {
    parallel_rows(params.n_users(), threads, [&](int u) {
        const auto& rated = train.by_user(u);
        if (rated.empty()) {
            params.b(u) = 0.0;
            return;
        }
        double acc = 0.0;
        for (const auto& [i, r] : rated)
            acc += r - params.mu - params.c(i) - params.theta.row(u).dot(params.beta.row(i));
        params.b(u) = acc / (static_cast<double>(rated.size()) + hyper.lambda_b);
    });
}

void update_item_bias(ModelParams& params, const SparseRatings& train, const Hyperparams& hyper,
                      int threads) {
    parallel_rows(params.n_items(), threads, [&](int i) {
        const auto& raters = train.by_item(i);
        if (raters.empty()) {
            params.c(i) = 0.0;
            return;
        }
        double acc = 0.0;
        for (const auto& [u, r] : raters)
            acc += r - params.mu - params.b(u) - params.theta.row(u).dot(params.beta.row(i));
        params.c(i) = acc / (static_cast<double>(raters.size()) + hyper.lambda_c);
    });
}

namespace {

const std::vector<std::pair<int, double>>& ppmi_row(const PpmiMatrix& S, int i) {
    static const std::vector<std::pair<int, double>> empty;
    return i < S.n_items ? S.rows[i] : empty;
}

}  // namespace

void update_embedding_vectors(ModelParams& params, const PpmiMatrix& S, const Hyperparams& hyper,
                              int threads) {
    const double ridge = hyper.lambda_beta + hyper.lambda_rho;
    if (!(ridge > 0.0))
        throw NumericError("embedding update needs lambda_beta + lambda_rho > 0");
    parallel_rows(params.n_items(), threads, [&](int i) {
        const auto& neigh = ppmi_row(S, i);
        if (neigh.empty()) {
            params.rho.row(i) = (hyper.lambda_beta / ridge) * params.beta.row(i);
            return;
        }
        RowSystem sys(hyper.d);
        sys.reset(ridge);
        sys.rhs = hyper.lambda_beta * params.beta.row(i).transpose();
        for (const auto& [j, s] : neigh) sys.rank_one(params.alpha.row(j), s, hyper.lambda);
        params.rho.row(i) = sys.solve().transpose();
    });
}

void update_context_vectors(ModelParams& params, const PpmiMatrix& S, const Hyperparams& hyper,
                            int threads) {
    parallel_rows(params.n_items(), threads, [&](int j) {
        const auto& neigh = ppmi_row(S, j);  // symmetric: S_j == row j
        if (neigh.empty()) {
            params.alpha.row(j).setZero();
            return;
        }
        RowSystem sys(hyper.d);
        sys.reset(hyper.lambda_alpha);
        for (const auto& [i, s] : neigh) sys.rank_one(params.rho.row(i), s, hyper.lambda);
        params.alpha.row(j) = sys.solve().transpose();
    });
}

std::pair<ModelParams, TrainReport> fit(const SparseRatings& train, const PpmiMatrix& S,
                                        const Hyperparams& hyper, const FitOptions& options) {
    hyper.validate(options.allow_decoupled);
    const bool pmf = hyper.mode == ModelMode::pmf_baseline;
    const int threads = std::max(1, options.threads);

    ModelParams params = init_params(train.n_users(), train.n_items(), hyper);
    params.mu = train.global_mean();
    check_dims(params, train, S);

    TrainReport report;
    double prev = objective(params, train, S, hyper);
    log::debug("fit: initial objective ", prev);

#ifndef NDEBUG
    auto assert_descent = [&](const char* phase, double before) {
        const double after = objective(params, train, S, hyper);
        assert(after <= before + 1e-9 * (1.0 + std::abs(before)) && phase);
        return after;
    };
#endif

    for (int sweep = 1; sweep <= hyper.max_sweeps; ++sweep) {
        const double t0 = now_seconds();
#ifndef NDEBUG
        double checkpoint = prev;
#endif
        if (!pmf) {
            update_user_bias(params, train, hyper, threads);
#ifndef NDEBUG
            checkpoint = assert_descent("user_bias", checkpoint);
#endif
            update_item_bias(params, train, hyper, threads);
#ifndef NDEBUG
            checkpoint = assert_descent("item_bias", checkpoint);
#endif
        }
        update_user_vectors(params, train, hyper, threads);
#ifndef NDEBUG
        checkpoint = assert_descent("user_vectors", checkpoint);
#endif
        if (!pmf) {
            update_embedding_vectors(params, S, hyper, threads);
#ifndef NDEBUG
            checkpoint = assert_descent("embedding_vectors", checkpoint);
#endif
            update_context_vectors(params, S, hyper, threads);
#ifndef NDEBUG
            checkpoint = assert_descent("context_vectors", checkpoint);
#endif
        }
        // beta runs after rho so a rating-free item ends every sweep exactly
        // on its embedding (the empty-adjacency update copies rho).
        update_item_vectors(params, train, hyper, threads);
#ifndef NDEBUG
        checkpoint = assert_descent("item_vectors", checkpoint);
#endif

        const double value = objective(params, train, S, hyper);
        if (!std::isfinite(value)) throw NumericError("objective became non-finite during training");
        const double seconds = now_seconds() - t0;
        report.objective_per_sweep.push_back(value);
        report.wall_time_per_sweep.push_back(seconds);
        report.sweeps_run = sweep;

        if (options.progress) {
            std::ostringstream line;
            line.precision(17);
            line << "{\"sweep\":" << sweep << ",\"objective\":" << value
                 << ",\"seconds\":" << seconds << "}";
            *options.progress << line.str() << "\n" << std::flush;
        }
        log::debug("fit: sweep ", sweep, " objective ", value);

        const double decrease = prev - value;
        if (decrease <= hyper.rel_tol * std::max(std::abs(prev), 1e-300)) {
            report.converged = true;
            break;
        }
        prev = value;
    }
    return {std::move(params), std::move(report)};
}

}  // namespace embmf
