#include "embmf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <Eigen/Core>

#include "embmf/errors.hpp"
#include "embmf/model.hpp"

namespace embmf {

std::vector<InteractionRecord> generate_interactions(const SynthConfig& cfg) {
    if (cfg.n_users < 1 || cfg.n_items < 2) throw ConfigError("synth: need users and items");
    if (cfg.n_events < cfg.n_users * static_cast<std::int64_t>(cfg.min_events_per_user))
        throw ConfigError("synth: n_events too small for min_events_per_user");
    if (cfg.n_events > static_cast<std::int64_t>(cfg.n_users) * cfg.n_items)
        throw ConfigError("synth: more events than user-item pairs");

    if (cfg.click_shared_dims < 0 ||
        cfg.click_skip_top_dims + cfg.click_shared_dims > cfg.true_dim)
        throw ConfigError("synth: click dims exceed true_dim");

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(1e-12, 1.0);

    // Per-dim factor scale with a geometric variance decay, normalized so
    // the interaction term theta*.beta* has sd = interaction_sd overall.
    const int k = cfg.true_dim;
    Vector dim_sd(k);
    double norm = 0.0;
    for (int f = 0; f < k; ++f) norm += std::pow(cfg.factor_decay, 2 * f);
    const double top_var = cfg.interaction_sd * cfg.interaction_sd / norm;
    for (int f = 0; f < k; ++f)
        dim_sd(f) = std::sqrt(std::sqrt(top_var * std::pow(cfg.factor_decay, 2 * f)));

    Matrix user_vec(cfg.n_users, k), item_vec(cfg.n_items, k);
    for (int u = 0; u < cfg.n_users; ++u)
        for (int f = 0; f < k; ++f) user_vec(u, f) = dim_sd(f) * gauss(rng);
    for (int i = 0; i < cfg.n_items; ++i)
        for (int f = 0; f < k; ++f) item_vec(i, f) = dim_sd(f) * gauss(rng);

    Vector user_bias(cfg.n_users), item_bias(cfg.n_items);
    for (int u = 0; u < cfg.n_users; ++u) user_bias(u) = cfg.user_bias_sd * gauss(rng);
    for (int i = 0; i < cfg.n_items; ++i) item_bias(i) = cfg.item_bias_sd * gauss(rng);

    // Click-side vectors: a window of rating factors that skips the
    // strongest dims, plus click-only directions. The skipped dims are what
    // rating data alone must supply; the private dims are click structure
    // with no rating meaning.
    const int skip = cfg.click_skip_top_dims;
    const int ks = cfg.click_shared_dims;
    const int kp = cfg.click_private_dims;
    const double private_sd = std::pow(cfg.click_private_var, 0.25);
    Matrix user_click(cfg.n_users, ks + kp), item_click(cfg.n_items, ks + kp);
    for (int u = 0; u < cfg.n_users; ++u) {
        for (int f = 0; f < ks; ++f) user_click(u, f) = user_vec(u, skip + f);
        for (int f = 0; f < kp; ++f) user_click(u, ks + f) = private_sd * gauss(rng);
    }
    for (int i = 0; i < cfg.n_items; ++i) {
        for (int f = 0; f < ks; ++f)
            item_click(i, f) =
                item_vec(i, skip + f) + cfg.click_distortion * dim_sd(skip + f) * gauss(rng);
        for (int f = 0; f < kp; ++f) item_click(i, ks + f) = private_sd * gauss(rng);
    }

    // Zipf-ish popularity over a random permutation of items.
    std::vector<int> pop_rank(cfg.n_items);
    std::iota(pop_rank.begin(), pop_rank.end(), 0);
    std::shuffle(pop_rank.begin(), pop_rank.end(), rng);
    Vector log_pop(cfg.n_items);
    for (int i = 0; i < cfg.n_items; ++i)
        log_pop(i) = -cfg.popularity_exponent * std::log(static_cast<double>(pop_rank[i]) + 3.0);

    // Heavy-tailed per-user activity, then adjusted to hit n_events exactly.
    std::lognormal_distribution<double> activity(0.0, 0.9);
    std::vector<double> raw(cfg.n_users);
    double raw_sum = 0.0;
    for (auto& a : raw) raw_sum += (a = activity(rng));

    const std::int64_t base_total =
        static_cast<std::int64_t>(cfg.min_events_per_user) * cfg.n_users;
    const double spread = static_cast<double>(cfg.n_events - base_total);
    std::vector<int> events_per_user(cfg.n_users);
    std::int64_t assigned = 0;
    for (int u = 0; u < cfg.n_users; ++u) {
        int extra = static_cast<int>(std::floor(raw[u] / raw_sum * spread));
        int cap = cfg.n_items - cfg.min_events_per_user;
        events_per_user[u] = cfg.min_events_per_user + std::min(extra, cap);
        assigned += events_per_user[u];
    }
    // Distribute the rounding remainder one event at a time.
    for (int u = 0; assigned < cfg.n_events; u = (u + 1) % cfg.n_users) {
        if (events_per_user[u] < cfg.n_items) {
            ++events_per_user[u];
            ++assigned;
        }
    }
    while (assigned > cfg.n_events) {
        for (int u = 0; u < cfg.n_users && assigned > cfg.n_events; ++u) {
            if (events_per_user[u] > cfg.min_events_per_user) {
                --events_per_user[u];
                --assigned;
            }
        }
    }

    std::vector<InteractionRecord> records;
    records.reserve(static_cast<std::size_t>(cfg.n_events));

    std::vector<double> score(cfg.n_items);
    std::vector<int> order(cfg.n_items);
    std::int64_t timestamp = 978'000'000;  // arbitrary epoch, strictly increasing

    for (int u = 0; u < cfg.n_users; ++u) {
        const int take = events_per_user[u];
        // Gumbel top-k draw without replacement from
        // softmax(log_pop + affinity * click utility).
        for (int i = 0; i < cfg.n_items; ++i) {
            const double util = user_click.row(u).dot(item_click.row(i)) + item_bias(i);
            const double gumbel = -std::log(-std::log(unif(rng)));
            score[i] = log_pop(i) + cfg.affinity * util + gumbel;
        }
        std::iota(order.begin(), order.end(), 0);
        std::nth_element(order.begin(), order.begin() + take, order.end(),
                         [&](int a, int b) { return score[a] > score[b]; });
        std::sort(order.begin(), order.begin() + take);

        for (int t = 0; t < take; ++t) {
            const int i = order[t];
            const double mean = cfg.mu + user_bias(u) + item_bias(i) +
                                user_vec.row(u).dot(item_vec.row(i));
            double r = std::round(mean + cfg.noise_sd * gauss(rng));
            r = std::clamp(r, cfg.rating_min, cfg.rating_max);

            InteractionRecord rec;
            rec.user = "u" + std::to_string(u + 1);
            rec.item = "m" + std::to_string(i + 1);
            rec.value = r;
            rec.timestamp = timestamp++;
            records.push_back(std::move(rec));
        }
    }
    return records;
}

}  // namespace embmf
