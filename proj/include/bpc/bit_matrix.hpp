#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bpc/errors.hpp"

namespace bpc {

// Dense binary matrix over GF(2). Storage is one byte per entry; the
// public contract is (row, col) bit addressing only.
class BitMatrix {
public:
    BitMatrix() = default;
    BitMatrix(int rows, int cols);
    static BitMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    std::uint8_t operator()(int r, int c) const {
        return bits_[static_cast<std::size_t>(r) * cols_ + c];
    }
    void set(int r, int c, std::uint8_t v) {
        bits_[static_cast<std::size_t>(r) * cols_ + c] = v ? 1 : 0;
    }

    std::uint64_t ones() const;

    void xor_rows(int dst, int src); // dst ^= src
    void swap_rows(int a, int b);
    void swap_cols(int a, int b);

    bool operator==(const BitMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && bits_ == o.bits_;
    }

    std::span<const std::uint8_t> raw() const { return bits_; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<std::uint8_t> bits_;
};

int gf2_rank(const BitMatrix& m);

struct SystematicForm {
    BitMatrix h_sys;           // [I | P] after row ops and column swaps
    std::vector<int> col_perm; // col_perm[t] = source column placed at position t
};

// Row-reduce to [I | P], swapping columns as needed (partial pivoting).
// Throws RankDeficient when rank(h) < rows(h).
SystematicForm to_systematic(const BitMatrix& h);

// k x n generator with G H^T = 0, built from the systematic form.
BitMatrix generator_from(const BitMatrix& h);

// H * word over GF(2).
std::vector<std::uint8_t> syndrome(const BitMatrix& h, std::span<const std::uint8_t> word);

// m * G over GF(2).
std::vector<std::uint8_t> encode(const BitMatrix& g, std::span<const std::uint8_t> msg);

} // namespace bpc
