#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "embmf/data.hpp"

namespace embmf {

// Which normalizer the empirical PMI uses: the number of users (so
// p(i) = #(i)/U and p(i,j) = #(i,j)/U), or the total number of ordered
// co-click pairs |D|.
enum class DenominatorMode { user_count, pair_count };

std::string to_string(DenominatorMode m);
DenominatorMode denominator_mode_from_string(const std::string& s);

// User-level co-click counts. Pairs are stored unordered (i < j) and only
// when observed; #(i,j) <= min(#(i), #(j)) always holds.
struct CooccurrenceStats {
    struct PairCount {
        int i = 0;
        int j = 0;
        std::int64_t count = 0;
    };

    int n_items = 0;
    std::int64_t n_users_total = 0;            // U
    std::int64_t n_pairs_total = 0;            // |D| = sum_u |C_u| (|C_u| - 1)
    std::vector<std::int64_t> item_user_count; // #(i), indexed by item
    std::vector<PairCount> pairs;              // sorted by (i, j), i < j

    std::int64_t pair_count(int i, int j) const;

    void validate() const;
};

// Counts users and user-level co-clicks from a click log. Users whose click
// set exceeds max_clicks_per_user are skipped entirely (0 = no cap); the cap
// bounds the quadratic pair blowup for pathological users.
CooccurrenceStats count_cooccurrence(const ClickLog& clicks,
                                     std::size_t max_clicks_per_user = 0);

// Empirical PMI of a pair. Returns -inf when the pair was never co-clicked;
// items that were never clicked are an error.
double empirical_pmi(const CooccurrenceStats& stats, int i, int j, DenominatorMode mode);

// Sparse symmetric nonnegative matrix S with S_ij = max(PMI(i,j), 0);
// zeros and the diagonal are never stored.
struct PpmiMatrix {
    int n_items = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;  // per-row (j, S_ij), sorted by j
    std::size_t nnz = 0;

    void validate() const;
};

PpmiMatrix build_ppmi(const CooccurrenceStats& stats, DenominatorMode mode);

}  // namespace embmf
