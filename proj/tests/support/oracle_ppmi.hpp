#pragma once

// Brute-force PPMI reference: materializes the dense M x M matrix straight
// from the raw click log, independent of the sparse builder it checks.

#include <cmath>
#include <vector>

#include "embmf/data.hpp"
#include "embmf/ppmi.hpp"

namespace embmf::testing {

struct DensePpmi {
    int n_items = 0;
    std::vector<std::vector<double>> values;  // 0 where no entry
};

inline DensePpmi brute_force_ppmi(const ClickLog& log, DenominatorMode mode) {
    const int m = log.n_items;
    DensePpmi out;
    out.n_items = m;
    out.values.assign(m, std::vector<double>(m, 0.0));

    // Membership flags per user, counted from scratch.
    std::vector<std::vector<char>> member(log.clicks_by_user.size(), std::vector<char>(m, 0));
    for (std::size_t u = 0; u < log.clicks_by_user.size(); ++u)
        for (int i : log.clicks_by_user[u]) member[u][i] = 1;

    const auto n_users = static_cast<std::int64_t>(log.clicks_by_user.size());
    std::int64_t n_pairs = 0;
    for (const auto& items : log.clicks_by_user) {
        const auto c = static_cast<std::int64_t>(items.size());
        n_pairs += c * (c - 1);
    }

    std::vector<std::int64_t> item_count(m, 0);
    for (int i = 0; i < m; ++i)
        for (std::size_t u = 0; u < member.size(); ++u) item_count[i] += member[u][i];

    const double total =
        static_cast<double>(mode == DenominatorMode::user_count ? n_users : n_pairs);

    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
            if (i == j) continue;
            std::int64_t both = 0;
            for (std::size_t u = 0; u < member.size(); ++u)
                if (member[u][i] && member[u][j]) ++both;
            if (both == 0 || item_count[i] == 0 || item_count[j] == 0) continue;
            const double pmi = std::log(static_cast<double>(both) * total /
                                        (static_cast<double>(item_count[i]) *
                                         static_cast<double>(item_count[j])));
            if (pmi > 0.0) out.values[i][j] = pmi;
        }
    }
    return out;
}

// Exact comparison of the sparse builder's output against the dense
// reference; returns true when every entry matches bit for bit.
inline bool ppmi_equals_dense(const PpmiMatrix& sparse, const DensePpmi& dense) {
    if (sparse.n_items != dense.n_items) return false;
    std::vector<std::vector<double>> got(sparse.n_items,
                                         std::vector<double>(sparse.n_items, 0.0));
    for (int i = 0; i < sparse.n_items; ++i)
        for (const auto& [j, v] : sparse.rows[i]) got[i][j] = v;
    for (int i = 0; i < sparse.n_items; ++i)
        for (int j = 0; j < sparse.n_items; ++j)
            if (got[i][j] != dense.values[i][j]) return false;
    return true;
}

}  // namespace embmf::testing
