#pragma once

#include <random>
#include <set>
#include <vector>

#include "embmf/data.hpp"
#include "embmf/model.hpp"
#include "embmf/ppmi.hpp"

namespace embmf::testing {

// The fixed toy problem used by the solver-oracle checks: 3 users, 4 items,
// 6 ratings, 4 stored PPMI entries (two symmetric pairs), d = 2.
struct ToyFixture {
    SparseRatings ratings;
    PpmiMatrix ppmi;
    Hyperparams hyper;
};

inline ToyFixture make_toy_fixture() {
    ToyFixture fx;
    fx.ratings = SparseRatings::from_triples(
        3, 4,
        {{0, 0, 4.0}, {0, 1, 5.0}, {1, 1, 3.0}, {1, 2, 2.0}, {2, 2, 4.0}, {2, 3, 1.0}});

    // Click log: u0:{A,B}, u1:{A,B,C}, u2:{C,D} gives positive PMI exactly
    // for (A,B) and (C,D).
    ClickLog log;
    log.n_users = 3;
    log.n_items = 4;
    log.clicks_by_user = {{0, 1}, {0, 1, 2}, {2, 3}};
    auto stats = count_cooccurrence(log);
    fx.ppmi = build_ppmi(stats, DenominatorMode::user_count);

    fx.hyper.d = 2;
    fx.hyper.lambda = 1.0;
    fx.hyper.lambda_theta = 0.5;
    fx.hyper.lambda_beta = 2.0;
    fx.hyper.lambda_rho = 0.3;
    fx.hyper.lambda_alpha = 0.4;
    fx.hyper.lambda_b = 0.7;
    fx.hyper.lambda_c = 0.9;
    fx.hyper.init_scale = 0.3;
    fx.hyper.seed = 1234;
    return fx;
}

struct RandomFixture {
    SparseRatings ratings;
    PpmiMatrix ppmi;
};

// Small dense-ish random problem; leaves some items rating-free and some
// click-free so the empty-adjacency paths get exercised.
inline RandomFixture make_random_fixture(std::uint64_t seed, int n_users = 8, int n_items = 6,
                                         double rating_density = 0.4) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> rating_value(1, 5);

    std::vector<RatingTriple> triples;
    for (int u = 0; u < n_users; ++u)
        for (int i = 0; i < n_items; ++i)
            if (unif(rng) < rating_density && i % 5 != 4)  // every 5th item stays cold
                triples.push_back({u, i, static_cast<double>(rating_value(rng))});
    if (triples.empty()) triples.push_back({0, 0, 3.0});

    ClickLog log;
    log.n_users = n_users;
    log.n_items = n_items;
    log.clicks_by_user.assign(n_users, {});
    for (int u = 0; u < n_users; ++u) {
        for (int i = 0; i < n_items; ++i)
            if (unif(rng) < 0.5) log.clicks_by_user[u].push_back(i);
    }

    RandomFixture fx;
    fx.ratings = SparseRatings::from_triples(n_users, n_items, std::move(triples));
    fx.ppmi = build_ppmi(count_cooccurrence(log), DenominatorMode::user_count);
    return fx;
}

inline ClickLog make_random_clicklog(std::mt19937_64& rng, int max_users = 6, int max_items = 6) {
    std::uniform_int_distribution<int> users(1, max_users);
    std::uniform_int_distribution<int> items(2, max_items);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    ClickLog log;
    log.n_users = users(rng);
    log.n_items = items(rng);
    log.clicks_by_user.assign(log.n_users, {});
    for (int u = 0; u < log.n_users; ++u)
        for (int i = 0; i < log.n_items; ++i)
            if (unif(rng) < 0.45) log.clicks_by_user[u].push_back(i);
    return log;
}

}  // namespace embmf::testing
