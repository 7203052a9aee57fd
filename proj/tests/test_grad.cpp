#include <doctest.h>

#include <cmath>

#include "bpc/grad.hpp"
#include "support.hpp"

using namespace bpc;

namespace {

// Independent oracle: central finite differences of the loss through the
// same forward pass the adjoint claims to differentiate.
RealMatrix fd_grad(const RealMatrix& llr, const RealMatrix& h, const LossConfig& cfg,
                   double step = 1e-5) {
    RealMatrix g(h.rows, h.cols);
    for (int r = 0; r < h.rows; ++r)
        for (int c = 0; c < h.cols; ++c) {
            RealMatrix hp = h, hm = h;
            hp.at(r, c) += step;
            hm.at(r, c) -= step;
            g.at(r, c) = (decode_loss(llr, hp, cfg) - decode_loss(llr, hm, cfg)) / (2.0 * step);
        }
    return g;
}

void check_grad_match(const RealMatrix& analytic, const RealMatrix& fd, double rel_tol,
                      double grad_floor) {
    for (std::size_t i = 0; i < analytic.v.size(); ++i) {
        const double a = analytic.v[i], f = fd.v[i];
        if (std::abs(a) <= grad_floor && std::abs(f) <= grad_floor) continue;
        const double rel = std::abs(a - f) / std::max(std::abs(a), std::abs(f));
        CHECK(rel < rel_tol);
    }
}

} // namespace

TEST_CASE("bin and its round trip") {
    RealMatrix omega(2, 3);
    omega.v = {-0.5, 0.0, 1.0, -2.0, 0.25, -0.0};
    const BitMatrix h = bin(omega);
    CHECK(h(0, 0) == 1);
    CHECK(h(0, 1) == 0); // sign(0) := +1
    CHECK(h(0, 2) == 0);
    CHECK(h(1, 0) == 1);
    CHECK(h(1, 1) == 0);
    CHECK(h(1, 2) == 0); // negative zero still maps to 0

    // Omega = 1 - 2H recovers H for any binary H.
    const BitMatrix hb = testsup::random_bits(4, 9, 0.5, 21);
    RealMatrix o(4, 9);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 9; ++c) o.at(r, c) = 1.0 - 2.0 * hb(r, c);
    CHECK(bin(o) == hb);
}

TEST_CASE("ste_mask boundary is inclusive") {
    RealMatrix omega(1, 5);
    omega.v = {1.0, -1.0, 2.0, 0.0, -0.999};
    const RealMatrix m = ste_mask(omega);
    CHECK(m.v[0] == -0.5);
    CHECK(m.v[1] == -0.5);
    CHECK(m.v[2] == 0.0);
    CHECK(m.v[3] == -0.5);
    CHECK(m.v[4] == -0.5);
}

TEST_CASE("decode_loss baseline values") {
    const BitMatrix hb = testsup::random_bits(3, 6, 0.5, 2);
    LossConfig cfg;
    cfg.bp.iterations = 3;
    // All-zero LLR: every output is 0, softplus(0) = ln 2 per bit.
    const RealMatrix zero(4, 6, 0.0);
    CHECK(decode_loss(zero, to_real(hb), cfg) == doctest::Approx(6.0 * std::log(2.0)));
    // Confident zeros: loss tends to 0.
    const RealMatrix confident(4, 6, -60.0);
    CHECK(decode_loss(confident, to_real(hb), cfg) < 1e-8);
}

TEST_CASE("final and summed losses coincide at T = 1") {
    const RealMatrix h = testsup::random_real(3, 6, 0.05, 0.95, 3);
    const RealMatrix l = testsup::random_normal(5, 6, 2.0, 4);
    LossConfig fin, sum;
    fin.bp.iterations = 1;
    sum.bp.iterations = 1;
    sum.loss_mode = LossMode::SummedIterations;
    CHECK(decode_loss(l, h, fin) == doctest::Approx(decode_loss(l, h, sum)).epsilon(1e-15));
}

TEST_CASE("loss equals an independently coded bce with sigmoid") {
    const RealMatrix h = testsup::random_real(3, 6, 0.05, 0.95, 11);
    const RealMatrix l = testsup::random_normal(4, 6, 1.0, 12);
    LossConfig cfg;
    cfg.bp.iterations = 2;
    const double loss = decode_loss(l, h, cfg);

    const DecodeResult r = bp_decode(l, h, cfg.bp);
    double bce = 0.0;
    for (double o : r.soft.v) {
        const double p1 = 1.0 / (1.0 + std::exp(-o)); // P(bit = 1)
        bce += -std::log(1.0 - p1);                    // target bit is 0
    }
    bce /= 4.0;
    CHECK(loss == doctest::Approx(bce).epsilon(1e-12));
}

TEST_CASE("gradient matches finite differences on random instances") {
    for (int t : {1, 3}) {
        for (auto mode : {LossMode::FinalIteration, LossMode::SummedIterations}) {
            const RealMatrix h = testsup::random_real(3, 6, 0.05, 0.95, 100 + t);
            const RealMatrix l = testsup::random_normal(8, 6, 2.0, 200 + t);
            LossConfig cfg;
            cfg.bp.iterations = t;
            cfg.loss_mode = mode;
            const auto [loss, g] = loss_and_grad_wrt_h(l, h, cfg);
            CHECK(loss == doctest::Approx(decode_loss(l, h, cfg)).epsilon(1e-12));
            check_grad_match(g, fd_grad(l, h, cfg), 1e-4, 1e-6);
        }
    }
}

TEST_CASE("gradient matches finite differences around a binary matrix") {
    // Central differences never evaluate the binary center itself, so the
    // whole check runs through the dense fractional path.
    const BitMatrix hb = testsup::random_bits(3, 6, 0.5, 77);
    const RealMatrix h = to_real(hb);
    const RealMatrix l = testsup::random_normal(8, 6, 2.0, 78);
    LossConfig cfg;
    cfg.bp.iterations = 3;
    const RealMatrix g = grad_wrt_h(l, h, cfg);
    check_grad_match(g, fd_grad(l, h, cfg), 1e-4, 1e-6);
}

TEST_CASE("saturated clamp passes zero gradient") {
    // Degree-2 check with huge agreeing LLRs saturates the product; with
    // clamp_eps = 1e-2 the +-1e-5 finite-difference steps stay inside the
    // saturation zone, so only the direct output term survives.
    RealMatrix h(1, 2, 1.0);
    RealMatrix l(1, 2);
    l.v = {40.0, 40.0};
    LossConfig cfg;
    cfg.bp.iterations = 1;
    cfg.bp.clamp_eps = 1e-2;

    const RealMatrix g = grad_wrt_h(l, h, cfg);
    // Analytic value with dR/dH = 0: sigma(o_i) * R, R = 2 atanh(1 - eps).
    const double r_msg = 2.0 * std::atanh(1.0 - 1e-2);
    for (int i = 0; i < 2; ++i) {
        const double o = 40.0 + r_msg;
        const double expect = 1.0 / (1.0 + std::exp(-o)) * r_msg;
        CHECK(g.v[i] == doctest::Approx(expect).epsilon(1e-9));
    }
    check_grad_match(g, fd_grad(l, h, cfg), 1e-4, 1e-6);
}

TEST_CASE("gradient is zero at an all-zero llr batch") {
    // Row degrees >= 3: every double-exclusion product in the omission
    // path still contains a zero factor, so the loss is stationary.
    BitMatrix hb(3, 7);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 7; ++c) hb.set(r, c, (c + r) % 2 == 0 || c == r);
    for (int r = 0; r < 3; ++r) {
        int deg = 0;
        for (int c = 0; c < 7; ++c) deg += hb(r, c);
        REQUIRE(deg >= 3);
    }
    const RealMatrix l(4, 7, 0.0);
    LossConfig cfg;
    cfg.bp.iterations = 3;
    const RealMatrix g = grad_wrt_h(l, to_real(hb), cfg);
    for (double v : g.v) CHECK(v == 0.0);
}

TEST_CASE("duplicating the batch leaves the mean gradient unchanged") {
    const RealMatrix h = testsup::random_real(3, 6, 0.05, 0.95, 31);
    const RealMatrix l = testsup::random_normal(6, 6, 2.0, 32);
    RealMatrix doubled(12, 6);
    std::copy(l.v.begin(), l.v.end(), doubled.v.begin());
    std::copy(l.v.begin(), l.v.end(), doubled.v.begin() + l.v.size());
    LossConfig cfg;
    cfg.bp.iterations = 2;
    const RealMatrix g1 = grad_wrt_h(l, h, cfg);
    const RealMatrix g2 = grad_wrt_h(doubled, h, cfg);
    CHECK(testsup::max_abs_diff(g1, g2) < 1e-12);
}

TEST_CASE("gradient is permutation-equivariant in the check rows") {
    const RealMatrix h = testsup::random_real(4, 7, 0.05, 0.95, 41);
    const RealMatrix l = testsup::random_normal(5, 7, 2.0, 42);
    LossConfig cfg;
    cfg.bp.iterations = 2;
    const RealMatrix g = grad_wrt_h(l, h, cfg);

    const int perm[4] = {2, 0, 3, 1};
    RealMatrix hp(4, 7);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 7; ++c) hp.at(r, c) = h.at(perm[r], c);
    const RealMatrix gp = grad_wrt_h(l, hp, cfg);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 7; ++c)
            CHECK(gp.at(r, c) == doctest::Approx(g.at(perm[r], c)).epsilon(1e-12));
}

TEST_CASE("h_tilde is deterministic and shaped by the mask") {
    const BitMatrix hb = testsup::random_bits(4, 8, 0.4, 51);
    const RealMatrix a = h_tilde(hb, 1e-7, 9);
    const RealMatrix b = h_tilde(hb, 1e-7, 9);
    CHECK(a == b);
    const RealMatrix c = h_tilde(hb, 1e-7, 10);
    CHECK(a != c);
    bool saw_neg = false;
    for (int r = 0; r < 4; ++r)
        for (int col = 0; col < 8; ++col) {
            if (hb(r, col))
                CHECK(a.at(r, col) == 1.0);
            else {
                CHECK(std::abs(a.at(r, col)) == doctest::Approx(1e-7));
                saw_neg |= a.at(r, col) < 0.0;
            }
        }
    CHECK(saw_neg);
}

TEST_CASE("grad_wrt_omega applies the straight-through chain") {
    const BitMatrix hb = testsup::random_bits(3, 6, 0.5, 61);
    RealMatrix omega(3, 6);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 6; ++c) omega.at(r, c) = 1.0 - 2.0 * hb(r, c);
    const RealMatrix l = testsup::random_normal(6, 6, 2.0, 62);
    LossConfig cfg;
    cfg.bp.iterations = 2;

    // At omega = 1 - 2H every entry sits on the STE boundary: -0.5 each.
    const RealMatrix go = grad_wrt_omega(l, omega, cfg);
    const RealMatrix gh = grad_wrt_h(l, to_real(hb), cfg);
    for (std::size_t i = 0; i < go.v.size(); ++i)
        CHECK(go.v[i] == doctest::Approx(-0.5 * gh.v[i]).epsilon(1e-12));

    // Entries pushed outside the STE window get exactly zero.
    RealMatrix wide = omega;
    wide.at(0, 0) = 2.5;
    wide.at(1, 3) = -3.0;
    const RealMatrix gw = grad_wrt_omega(l, wide, cfg);
    CHECK(gw.at(0, 0) == 0.0);
    CHECK(gw.at(1, 3) == 0.0);

    // Soft relaxation of the zeros, deterministic under the seed.
    LossConfig soft = cfg;
    soft.soft_h_eps = 1e-7;
    soft.seed = 123;
    const RealMatrix gs1 = grad_wrt_omega(l, omega, soft);
    const RealMatrix gs2 = grad_wrt_omega(l, omega, soft);
    CHECK(gs1 == gs2);
}

TEST_CASE("grad rejects llr_clip") {
    LossConfig cfg;
    cfg.bp.llr_clip = 10.0;
    const RealMatrix h(2, 4, 0.5);
    const RealMatrix l(1, 4, 0.0);
    CHECK_THROWS_AS(grad_wrt_h(l, h, cfg), InvalidParams);
}
