#include "bpc/bit_matrix.hpp"

#include <algorithm>
#include <numeric>

namespace bpc {

BitMatrix::BitMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1)
        throw InvalidParams("BitMatrix dimensions must be at least 1x1");
    bits_.assign(static_cast<std::size_t>(rows) * cols, 0);
}

BitMatrix BitMatrix::identity(int n) {
    BitMatrix m(n, n);
    for (int i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
}

std::uint64_t BitMatrix::ones() const {
    std::uint64_t c = 0;
    for (auto b : bits_) c += b;
    return c;
}

void BitMatrix::xor_rows(int dst, int src) {
    auto* d = bits_.data() + static_cast<std::size_t>(dst) * cols_;
    const auto* s = bits_.data() + static_cast<std::size_t>(src) * cols_;
    for (int c = 0; c < cols_; ++c) d[c] ^= s[c];
}

void BitMatrix::swap_rows(int a, int b) {
    if (a == b) return;
    auto* pa = bits_.data() + static_cast<std::size_t>(a) * cols_;
    auto* pb = bits_.data() + static_cast<std::size_t>(b) * cols_;
    std::swap_ranges(pa, pa + cols_, pb);
}

void BitMatrix::swap_cols(int a, int b) {
    if (a == b) return;
    for (int r = 0; r < rows_; ++r) {
        auto* row = bits_.data() + static_cast<std::size_t>(r) * cols_;
        std::swap(row[a], row[b]);
    }
}

int gf2_rank(const BitMatrix& m) {
    BitMatrix w = m;
    const int rows = w.rows(), cols = w.cols();
    int rank = 0;
    for (int col = 0; col < cols && rank < rows; ++col) {
        int pivot = -1;
        for (int r = rank; r < rows; ++r) {
            if (w(r, col)) {
                pivot = r;
                break;
            }
        }
        if (pivot < 0) continue;
        w.swap_rows(rank, pivot);
        for (int r = 0; r < rows; ++r) {
            if (r != rank && w(r, col)) w.xor_rows(r, rank);
        }
        ++rank;
    }
    return rank;
}

SystematicForm to_systematic(const BitMatrix& h) {
    SystematicForm out;
    out.h_sys = h;
    out.col_perm.resize(h.cols());
    std::iota(out.col_perm.begin(), out.col_perm.end(), 0);

    BitMatrix& m = out.h_sys;
    const int rows = m.rows(), cols = m.cols();
    for (int r = 0; r < rows; ++r) {
        int pr = -1, pc = -1;
        for (int c = r; c < cols && pr < 0; ++c) {
            for (int i = r; i < rows; ++i) {
                if (m(i, c)) {
                    pr = i;
                    pc = c;
                    break;
                }
            }
        }
        if (pr < 0) throw RankDeficient("matrix rank is below its row count");
        m.swap_rows(r, pr);
        if (pc != r) {
            m.swap_cols(r, pc);
            std::swap(out.col_perm[r], out.col_perm[pc]);
        }
        for (int i = 0; i < rows; ++i) {
            if (i != r && m(i, r)) m.xor_rows(i, r);
        }
    }
    return out;
}

BitMatrix generator_from(const BitMatrix& h) {
    const int m = h.rows(), n = h.cols();
    const int k = n - m;
    if (k < 1) throw InvalidParams("parity check must have fewer rows than columns");
    const SystematicForm sys = to_systematic(h); // throws RankDeficient

    // H_sys = [I_m | P]  =>  G_sys = [P^T | I_k], then undo the column swaps.
    BitMatrix g(k, n);
    for (int r = 0; r < k; ++r) {
        for (int c = 0; c < m; ++c)
            g.set(r, sys.col_perm[c], sys.h_sys(c, m + r));
        g.set(r, sys.col_perm[m + r], 1);
    }
    return g;
}

std::vector<std::uint8_t> syndrome(const BitMatrix& h, std::span<const std::uint8_t> word) {
    if (static_cast<int>(word.size()) != h.cols())
        throw DimensionMismatch("word length does not match parity-check columns");
    std::vector<std::uint8_t> s(h.rows(), 0);
    for (int r = 0; r < h.rows(); ++r) {
        std::uint8_t acc = 0;
        for (int c = 0; c < h.cols(); ++c) acc ^= (h(r, c) & word[c]);
        s[r] = acc;
    }
    return s;
}

std::vector<std::uint8_t> encode(const BitMatrix& g, std::span<const std::uint8_t> msg) {
    if (static_cast<int>(msg.size()) != g.rows())
        throw DimensionMismatch("message length does not match generator rows");
    std::vector<std::uint8_t> c(g.cols(), 0);
    for (int r = 0; r < g.rows(); ++r) {
        if (!msg[r]) continue;
        for (int col = 0; col < g.cols(); ++col) c[col] ^= g(r, col);
    }
    return c;
}

} // namespace bpc
