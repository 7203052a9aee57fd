#include <doctest.h>

#include "bpc/bit_matrix.hpp"
#include "support.hpp"

using namespace bpc;

namespace {

BitMatrix from_rows(const std::vector<std::vector<int>>& rows) {
    BitMatrix m(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c) m.set(r, c, rows[r][c]);
    return m;
}

BitMatrix hamming74() {
    // Columns are the nonzero 3-bit patterns.
    return from_rows({{0, 0, 0, 1, 1, 1, 1}, {0, 1, 1, 0, 0, 1, 1}, {1, 0, 1, 0, 1, 0, 1}});
}

bool product_is_zero(const BitMatrix& g, const BitMatrix& h) {
    for (int r = 0; r < g.rows(); ++r) {
        std::vector<std::uint8_t> row(g.cols());
        for (int c = 0; c < g.cols(); ++c) row[c] = g(r, c);
        for (auto s : syndrome(h, row))
            if (s) return false;
    }
    return true;
}

} // namespace

TEST_CASE("gf2 rank") {
    CHECK(gf2_rank(BitMatrix::identity(3)) == 3);
    CHECK(gf2_rank(BitMatrix(2, 3)) == 0);
    CHECK(gf2_rank(from_rows({{1, 1}, {1, 1}})) == 1);
}

TEST_CASE("rank invariant under row ops and column permutations") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        BitMatrix m = testsup::random_bits(5, 9, 0.4, seed);
        const int r = gf2_rank(m);
        BitMatrix swapped = m;
        swapped.swap_rows(0, 3);
        swapped.swap_cols(2, 7);
        CHECK(gf2_rank(swapped) == r);
        BitMatrix added = m;
        added.xor_rows(1, 4);
        CHECK(gf2_rank(added) == r);
    }
}

TEST_CASE("to_systematic keeps an already systematic matrix") {
    BitMatrix h = from_rows({{1, 0, 1, 1}, {0, 1, 0, 1}});
    const auto sys = to_systematic(h);
    CHECK(sys.h_sys == h);
    CHECK(sys.col_perm == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("to_systematic on Hamming(7,4) preserves the row space") {
    BitMatrix h = hamming74();
    const auto sys = to_systematic(h);
    REQUIRE(gf2_rank(h) == 3);
    // Left block is the identity.
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) CHECK(sys.h_sys(r, c) == (r == c ? 1 : 0));
    // Every row of h_sys, mapped back through the column permutation,
    // must lie in the span of the original rows (brute-force oracle).
    for (int r = 0; r < 3; ++r) {
        std::vector<std::uint8_t> back(7, 0);
        for (int t = 0; t < 7; ++t) back[sys.col_perm[t]] = sys.h_sys(r, t);
        CHECK(testsup::in_row_space(h, back));
    }
}

TEST_CASE("to_systematic rejects rank-deficient input") {
    CHECK_THROWS_AS(to_systematic(from_rows({{1, 1, 0}, {1, 1, 0}})), RankDeficient);
}

TEST_CASE("generator_from systematic input") {
    // H = [I | P] gives G = [P^T | I].
    BitMatrix h = from_rows({{1, 0, 1, 1}, {0, 1, 1, 0}});
    BitMatrix g = generator_from(h);
    CHECK(g == from_rows({{1, 1, 1, 0}, {1, 0, 0, 1}}));
    CHECK(product_is_zero(g, h));
}

TEST_CASE("generator_from random full-rank 4x15") {
    BitMatrix h = testsup::random_full_rank(4, 15, 0.5, 7);
    BitMatrix g = generator_from(h);
    CHECK(g.rows() == 11);
    CHECK(gf2_rank(g) == 11);
    CHECK(product_is_zero(g, h));
}

TEST_CASE("generator_from rejects a zero row") {
    BitMatrix h(2, 5);
    h.set(0, 1, 1);
    h.set(0, 3, 1);
    CHECK_THROWS_AS(generator_from(h), RankDeficient);
}

TEST_CASE("generator identities over a randomized corpus") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const int m = 2 + static_cast<int>(seed % 5);
        const int n = m + 2 + static_cast<int>(seed % 7);
        BitMatrix h = testsup::random_full_rank(m, n, 0.5, 1000 + seed);
        BitMatrix g = generator_from(h);
        CHECK(gf2_rank(g) == n - m);
        CHECK(product_is_zero(g, h));
    }
}

TEST_CASE("syndrome basics") {
    BitMatrix h = hamming74();
    const std::vector<std::uint8_t> zeros(7, 0);
    CHECK(syndrome(h, zeros) == std::vector<std::uint8_t>{0, 0, 0});
    // Unit vector picks out column i.
    for (int i = 0; i < 7; ++i) {
        std::vector<std::uint8_t> e(7, 0);
        e[i] = 1;
        const auto s = syndrome(h, e);
        for (int r = 0; r < 3; ++r) CHECK(s[r] == h(r, i));
    }
    // Generator rows are codewords.
    BitMatrix g = generator_from(h);
    CHECK(product_is_zero(g, h));
    CHECK_THROWS_AS(syndrome(h, std::vector<std::uint8_t>(6, 0)), DimensionMismatch);
}

TEST_CASE("encode basics") {
    BitMatrix h = hamming74();
    BitMatrix g = generator_from(h);
    CHECK(encode(g, std::vector<std::uint8_t>(4, 0)) == std::vector<std::uint8_t>(7, 0));
    std::vector<std::uint8_t> e1{1, 0, 0, 0};
    const auto c1 = encode(g, e1);
    for (int c = 0; c < 7; ++c) CHECK(c1[c] == g(0, c));
    Rng rng(5);
    for (int trial = 0; trial < 16; ++trial) {
        std::vector<std::uint8_t> msg(4);
        for (auto& b : msg) b = rng.bernoulli(0.5);
        const auto cw = encode(g, msg);
        for (auto s : syndrome(h, cw)) CHECK(s == 0);
    }
    CHECK_THROWS_AS(encode(g, std::vector<std::uint8_t>(3, 0)), DimensionMismatch);
}
