#pragma once

// Shared helpers and independent oracles for the test suites. Oracles
// here must stay independent of the library code paths they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "bpc/bit_matrix.hpp"
#include "bpc/real_matrix.hpp"
#include "bpc/rng.hpp"

namespace testsup {

inline bpc::BitMatrix random_bits(int rows, int cols, double density, std::uint64_t seed) {
    bpc::BitMatrix m(rows, cols);
    bpc::Rng rng(seed);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m.set(r, c, rng.bernoulli(density));
    return m;
}

inline bpc::BitMatrix random_full_rank(int rows, int cols, double density, std::uint64_t seed) {
    for (std::uint64_t s = seed;; ++s) {
        bpc::BitMatrix m = random_bits(rows, cols, density, s);
        if (bpc::gf2_rank(m) == rows) return m;
    }
}

inline bpc::RealMatrix random_real(int rows, int cols, double lo, double hi,
                                   std::uint64_t seed) {
    bpc::RealMatrix m(rows, cols);
    bpc::Rng rng(seed);
    for (auto& v : m.v) v = lo + (hi - lo) * rng.uniform();
    return m;
}

inline bpc::RealMatrix random_normal(int rows, int cols, double stddev, std::uint64_t seed) {
    bpc::RealMatrix m(rows, cols);
    bpc::Rng rng(seed);
    for (auto& v : m.v) v = stddev * rng.normal();
    return m;
}

// Membership of `word` in the GF(2) row space of `m`, by brute-force
// enumeration of all 2^rows row combinations (rows <= 20).
inline bool in_row_space(const bpc::BitMatrix& m, const std::vector<std::uint8_t>& word) {
    const int rows = m.rows(), cols = m.cols();
    for (std::uint32_t mask = 0; mask < (1u << rows); ++mask) {
        std::vector<std::uint8_t> acc(cols, 0);
        for (int r = 0; r < rows; ++r)
            if (mask & (1u << r))
                for (int c = 0; c < cols; ++c) acc[c] ^= m(r, c);
        if (acc == word) return true;
    }
    return false;
}

// Exhaustive shortest-cycle search in the Tanner graph by depth-first
// enumeration of simple paths, independent of the BFS in the library.
// Returns -1 when no cycle of length <= max_len exists.
inline int brute_force_girth(const bpc::BitMatrix& h, int max_len = 12) {
    const int n = h.cols(), m = h.rows();
    const int V = n + m;
    std::vector<std::vector<int>> adj(V);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c)
            if (h(r, c)) {
                adj[c].push_back(n + r);
                adj[n + r].push_back(c);
            }
    std::vector<char> on_path(V, 0);
    int best = -1;

    // Paths start at their smallest-index vertex so each cycle is found
    // from a canonical root.
    auto dfs = [&](auto&& self, int root, int u, int prev, int len, int limit) -> void {
        for (int w : adj[u]) {
            if (w == prev) continue;
            if (w == root && len + 1 >= 3) {
                if (best < 0 || len + 1 < best) best = len + 1;
                continue;
            }
            if (w < root || on_path[w]) continue;
            if (len + 1 >= limit) continue;
            on_path[w] = 1;
            self(self, root, w, u, len + 1, limit);
            on_path[w] = 0;
        }
    };
    for (int root = 0; root < V; ++root) {
        const int limit = best < 0 ? max_len : best - 1;
        if (limit < 3) break;
        on_path[root] = 1;
        dfs(dfs, root, root, -1, 0, limit);
        on_path[root] = 0;
    }
    return best;
}

// Gaussian tail probability Q(x).
inline double q_func(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

inline double max_abs_diff(const bpc::RealMatrix& a, const bpc::RealMatrix& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.v.size(); ++i) d = std::max(d, std::abs(a.v[i] - b.v[i]));
    return d;
}

} // namespace testsup
