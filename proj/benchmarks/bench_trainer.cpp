#include <benchmark/benchmark.h>

#include <random>

#include "embmf/synth.hpp"
#include "embmf/trainer.hpp"

using namespace embmf;

namespace {

struct Problem {
    SparseRatings train;
    PpmiMatrix ppmi;
    Hyperparams hyper;
    ModelParams params;
};

Problem make_problem(int n_users, int n_items, int per_user, int d) {
    std::mt19937_64 rng(7);
    std::vector<RatingTriple> triples;
    std::set<int> items;
    for (int u = 0; u < n_users; ++u) {
        items.clear();
        while (static_cast<int>(items.size()) < per_user)
            items.insert(static_cast<int>(rng() % n_items));
        for (int i : items) triples.push_back({u, i, double(1 + (u + i) % 5)});
    }

    ClickLog log;
    log.n_users = n_users;
    log.n_items = n_items;
    log.clicks_by_user.assign(n_users, {});
    for (int u = 0; u < n_users; ++u)
        for (int i = 0; i < n_items; ++i)
            if (rng() % 100 < 8) log.clicks_by_user[u].push_back(i);

    Problem p;
    p.train = SparseRatings::from_triples(n_users, n_items, std::move(triples));
    p.ppmi = build_ppmi(count_cooccurrence(log), DenominatorMode::user_count);
    p.hyper.d = d;
    p.hyper.seed = 3;
    p.params = init_params(n_users, n_items, p.hyper);
    p.params.mu = p.train.global_mean();
    return p;
}

}  // namespace

static void BM_UserVectorPhase(benchmark::State& state) {
    auto p = make_problem(2000, 1000, 30, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        update_user_vectors(p.params, p.train, p.hyper);
        benchmark::DoNotOptimize(p.params.theta.data());
    }
    state.SetItemsProcessed(state.iterations() * p.train.n_users());
}
BENCHMARK(BM_UserVectorPhase)->Arg(8)->Arg(20)->Arg(40);

static void BM_ItemVectorPhase(benchmark::State& state) {
    auto p = make_problem(2000, 1000, 30, static_cast<int>(state.range(0)));
    for (auto _ : state) {
        update_item_vectors(p.params, p.train, p.hyper);
        benchmark::DoNotOptimize(p.params.beta.data());
    }
    state.SetItemsProcessed(state.iterations() * p.train.n_items());
}
BENCHMARK(BM_ItemVectorPhase)->Arg(8)->Arg(20)->Arg(40);

static void BM_EmbeddingPhase(benchmark::State& state) {
    auto p = make_problem(2000, 1000, 30, 20);
    for (auto _ : state) {
        update_embedding_vectors(p.params, p.ppmi, p.hyper);
        benchmark::DoNotOptimize(p.params.rho.data());
    }
    state.SetItemsProcessed(state.iterations() * p.train.n_items());
}
BENCHMARK(BM_EmbeddingPhase);

static void BM_FullSweep(benchmark::State& state) {
    auto p = make_problem(2000, 1000, 30, 20);
    const int threads = static_cast<int>(state.range(0));
    for (auto _ : state) {
        update_user_bias(p.params, p.train, p.hyper, threads);
        update_item_bias(p.params, p.train, p.hyper, threads);
        update_user_vectors(p.params, p.train, p.hyper, threads);
        update_item_vectors(p.params, p.train, p.hyper, threads);
        update_embedding_vectors(p.params, p.ppmi, p.hyper, threads);
        update_context_vectors(p.params, p.ppmi, p.hyper, threads);
    }
}
BENCHMARK(BM_FullSweep)->Arg(1)->Arg(2)->Arg(4);

static void BM_SolveSpd(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix G(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) G(r, c) = g(rng);
    Matrix A = G * G.transpose() + Matrix::Identity(d, d);
    Vector y(d);
    for (int r = 0; r < d; ++r) y(r) = g(rng);
    for (auto _ : state) {
        auto x = solve_spd(A, y);
        benchmark::DoNotOptimize(x.data());
    }
}
BENCHMARK(BM_SolveSpd)->Arg(8)->Arg(20)->Arg(64);

BENCHMARK_MAIN();
