#pragma once

// Partition-agreement indices (Rand, adjusted Rand) via contingency-table
// marginal binomials.

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

namespace tmix {

struct ContingencyTable {
    std::vector<std::vector<std::int64_t>> counts;  // R x C co-membership counts
    std::vector<std::int64_t> row_marginals;
    std::vector<std::int64_t> col_marginals;
    std::int64_t n = 0;
};

inline ContingencyTable contingency_table(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw std::invalid_argument("contingency_table: length mismatch");
    std::map<int, int> ra, rb;
    for (int x : a) ra.emplace(x, static_cast<int>(ra.size()));
    for (int x : b) rb.emplace(x, static_cast<int>(rb.size()));
    ContingencyTable t;
    t.counts.assign(ra.size(), std::vector<std::int64_t>(rb.size(), 0));
    t.row_marginals.assign(ra.size(), 0);
    t.col_marginals.assign(rb.size(), 0);
    t.n = static_cast<std::int64_t>(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        const int r = ra[a[i]], c = rb[b[i]];
        ++t.counts[static_cast<size_t>(r)][static_cast<size_t>(c)];
        ++t.row_marginals[static_cast<size_t>(r)];
        ++t.col_marginals[static_cast<size_t>(c)];
    }
    return t;
}

namespace detail {
inline double choose2(std::int64_t m) { return 0.5 * static_cast<double>(m) * static_cast<double>(m - 1); }
}

// Fraction of agreeing pairs among all n(n-1)/2 pairs.
inline double rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() < 2) throw std::invalid_argument("rand_index: need n >= 2");
    const auto t = contingency_table(a, b);
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (size_t r = 0; r < t.counts.size(); ++r)
        for (size_t c = 0; c < t.counts[r].size(); ++c) sum_cells += detail::choose2(t.counts[r][c]);
    for (auto m : t.row_marginals) sum_rows += detail::choose2(m);
    for (auto m : t.col_marginals) sum_cols += detail::choose2(m);
    const double total = detail::choose2(t.n);
    // agreements = pairs together in both + pairs apart in both
    const double agree = total + 2.0 * sum_cells - sum_rows - sum_cols;
    return agree / total;
}

// Permutation-model chance adjustment. When the adjustment denominator is 0
// (both partitions trivial: all-singletons or one block), returns 1 if the
// partitions agree pairwise, else 0.
inline double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() < 2) throw std::invalid_argument("adjusted_rand_index: need n >= 2");
    const auto t = contingency_table(a, b);
    double sum_cells = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (size_t r = 0; r < t.counts.size(); ++r)
        for (size_t c = 0; c < t.counts[r].size(); ++c) sum_cells += detail::choose2(t.counts[r][c]);
    for (auto m : t.row_marginals) sum_rows += detail::choose2(m);
    for (auto m : t.col_marginals) sum_cols += detail::choose2(m);
    const double total = detail::choose2(t.n);
    const double expected = sum_rows * sum_cols / total;
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) return sum_cells == expected ? 1.0 : 0.0;
    return (sum_cells - expected) / (maximum - expected);
}

}  // namespace tmix
