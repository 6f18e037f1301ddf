#include "embmf/ppmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "embmf/errors.hpp"
#include "embmf/log.hpp"

namespace embmf {

std::string to_string(DenominatorMode m) {
    return m == DenominatorMode::user_count ? "user-count" : "pair-count";
}

DenominatorMode denominator_mode_from_string(const std::string& s) {
    if (s == "user-count" || s == "user_count") return DenominatorMode::user_count;
    if (s == "pair-count" || s == "pair_count") return DenominatorMode::pair_count;
    throw ConfigError("unknown denominator mode '" + s + "' (expected user-count or pair-count)");
}

std::int64_t CooccurrenceStats::pair_count(int i, int j) const {
    if (i == j) return 0;
    int a = std::min(i, j), b = std::max(i, j);
    auto it = std::lower_bound(pairs.begin(), pairs.end(), std::make_pair(a, b),
                               [](const PairCount& p, const std::pair<int, int>& key) {
                                   return std::tie(p.i, p.j) < std::tie(key.first, key.second);
                               });
    if (it == pairs.end() || it->i != a || it->j != b) return 0;
    return it->count;
}

void CooccurrenceStats::validate() const {
    if (static_cast<int>(item_user_count.size()) != n_items)
        throw DataError("item_user_count size mismatch");
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto& p = pairs[k];
        if (p.i >= p.j) throw DataError("pair keys must satisfy i < j");
        if (p.count < 1) throw DataError("stored pair with count < 1");
        if (p.count > std::min(item_user_count[p.i], item_user_count[p.j]))
            throw DataError("pair count exceeds an item user count");
        if (k > 0 && !(std::tie(pairs[k - 1].i, pairs[k - 1].j) < std::tie(p.i, p.j)))
            throw DataError("pairs not strictly sorted");
    }
}

namespace {

// Above this many items the dense triangular counter would not fit in a
// reasonable footprint and a hash map is used instead.
constexpr std::size_t kDenseCountLimit = 12000;

CooccurrenceStats finalize(CooccurrenceStats stats) {
    std::sort(stats.pairs.begin(), stats.pairs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });
    return stats;
}

}  // namespace

CooccurrenceStats count_cooccurrence(const ClickLog& clicks, std::size_t max_clicks_per_user) {
    CooccurrenceStats stats;
    const int m = clicks.n_items;
    stats.n_items = m;
    stats.item_user_count.assign(m, 0);

    std::size_t skipped = 0;
    auto use_user = [&](const std::vector<int>& items) {
        if (max_clicks_per_user > 0 && items.size() > max_clicks_per_user) {
            ++skipped;
            return false;
        }
        return true;
    };

    const bool dense = static_cast<std::size_t>(m) <= kDenseCountLimit;
    if (dense) {
        // Lower-triangular dense counter, row j > i at offset j(j-1)/2 + i.
        std::vector<std::int64_t> tri(static_cast<std::size_t>(m) * (m - 1) / 2
                                          + (m > 0 ? 1 : 0),
                                      0);
        auto slot = [](int i, int j) {
            return static_cast<std::size_t>(j) * (j - 1) / 2 + static_cast<std::size_t>(i);
        };
        for (const auto& items : clicks.clicks_by_user) {
            if (!use_user(items)) continue;
            ++stats.n_users_total;
            stats.n_pairs_total +=
                static_cast<std::int64_t>(items.size()) * (static_cast<std::int64_t>(items.size()) - 1);
            for (std::size_t a = 0; a < items.size(); ++a) {
                ++stats.item_user_count[items[a]];
                for (std::size_t b = a + 1; b < items.size(); ++b)
                    ++tri[slot(items[a], items[b])];
            }
        }
        for (int j = 1; j < m; ++j) {
            for (int i = 0; i < j; ++i) {
                auto c = tri[slot(i, j)];
                if (c > 0) stats.pairs.push_back({i, j, c});
            }
        }
        std::sort(stats.pairs.begin(), stats.pairs.end(), [](const auto& a, const auto& b) {
            return std::tie(a.i, a.j) < std::tie(b.i, b.j);
        });
    } else {
        std::unordered_map<std::uint64_t, std::int64_t> counts;
        for (const auto& items : clicks.clicks_by_user) {
            if (!use_user(items)) continue;
            ++stats.n_users_total;
            stats.n_pairs_total +=
                static_cast<std::int64_t>(items.size()) * (static_cast<std::int64_t>(items.size()) - 1);
            for (std::size_t a = 0; a < items.size(); ++a) {
                ++stats.item_user_count[items[a]];
                for (std::size_t b = a + 1; b < items.size(); ++b) {
                    auto key = (static_cast<std::uint64_t>(items[a]) << 32) |
                               static_cast<std::uint32_t>(items[b]);
                    ++counts[key];
                }
            }
        }
        stats.pairs.reserve(counts.size());
        for (const auto& [key, c] : counts)
            stats.pairs.push_back({static_cast<int>(key >> 32),
                                   static_cast<int>(key & 0xffffffffu), c});
        stats = finalize(std::move(stats));
    }

    if (skipped > 0)
        log::info("count_cooccurrence: skipped ", skipped, " users above the click cap of ",
                  max_clicks_per_user);
    return stats;
}

double empirical_pmi(const CooccurrenceStats& stats, int i, int j, DenominatorMode mode) {
    if (i == j) throw ConfigError("empirical_pmi requires i != j");
    if (i < 0 || i >= stats.n_items || j < 0 || j >= stats.n_items)
        throw DataError("empirical_pmi: item index out of range");
    const auto ci = stats.item_user_count[i];
    const auto cj = stats.item_user_count[j];
    if (ci == 0 || cj == 0) throw DataError("empirical_pmi: item was never clicked");

    const auto cij = stats.pair_count(i, j);
    if (cij == 0) return -std::numeric_limits<double>::infinity();

    const double total = static_cast<double>(
        mode == DenominatorMode::user_count ? stats.n_users_total : stats.n_pairs_total);
    return std::log(static_cast<double>(cij) * total /
                    (static_cast<double>(ci) * static_cast<double>(cj)));
}

void PpmiMatrix::validate() const {
    if (static_cast<int>(rows.size()) != n_items) throw DataError("PPMI row count mismatch");
    std::size_t stored = 0;
    for (int i = 0; i < n_items; ++i) {
        int prev = -1;
        for (const auto& [j, v] : rows[i]) {
            if (j < 0 || j >= n_items) throw DataError("PPMI column out of range");
            if (j == i) throw DataError("PPMI stores a diagonal entry");
            if (j <= prev) throw DataError("PPMI row not strictly sorted");
            if (!(v > 0.0)) throw DataError("PPMI stores a non-positive value");
            prev = j;
            ++stored;
        }
    }
    if (stored != nnz) throw DataError("PPMI nnz out of sync");
    // Symmetry: every (i, j) must be mirrored with an identical value.
    for (int i = 0; i < n_items; ++i) {
        for (const auto& [j, v] : rows[i]) {
            const auto& back = rows[j];
            auto it = std::lower_bound(back.begin(), back.end(), std::make_pair(i, 0.0),
                                       [](const auto& a, const auto& b) { return a.first < b.first; });
            if (it == back.end() || it->first != i || it->second != v)
                throw DataError("PPMI symmetry violated");
        }
    }
}

PpmiMatrix build_ppmi(const CooccurrenceStats& stats, DenominatorMode mode) {
    PpmiMatrix s;
    s.n_items = stats.n_items;
    s.rows.assign(stats.n_items, {});

    const double total = static_cast<double>(
        mode == DenominatorMode::user_count ? stats.n_users_total : stats.n_pairs_total);
    for (const auto& p : stats.pairs) {
        const double pmi = std::log(static_cast<double>(p.count) * total /
                                    (static_cast<double>(stats.item_user_count[p.i]) *
                                     static_cast<double>(stats.item_user_count[p.j])));
        if (pmi > 0.0) {
            s.rows[p.i].emplace_back(p.j, pmi);
            s.rows[p.j].emplace_back(p.i, pmi);
            s.nnz += 2;
        }
    }
    for (auto& row : s.rows)
        std::sort(row.begin(), row.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
    return s;
}

}  // namespace embmf
