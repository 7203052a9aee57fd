#include "bpc/grad.hpp"

#include <algorithm>
#include <cmath>

#include "bpc/rng.hpp"
#include "tensor_kernel.hpp"

namespace bpc {

std::string to_string(LossMode m) {
    return m == LossMode::FinalIteration ? "FinalIteration" : "SummedIterations";
}

LossMode loss_mode_from_string(const std::string& s) {
    if (s == "FinalIteration") return LossMode::FinalIteration;
    if (s == "SummedIterations") return LossMode::SummedIterations;
    throw ParseError("unknown loss mode: " + s);
}

void LossConfig::validate() const {
    bp.validate();
    if (soft_h_eps && !(*soft_h_eps > 0.0 && *soft_h_eps < 1e-3))
        throw InvalidParams("soft_h_eps must be in (0, 1e-3)");
}

BitMatrix bin(const RealMatrix& omega) {
    BitMatrix h(omega.rows, omega.cols);
    for (int r = 0; r < omega.rows; ++r)
        for (int c = 0; c < omega.cols; ++c) h.set(r, c, omega.at(r, c) < 0.0);
    return h;
}

RealMatrix ste_mask(const RealMatrix& omega) {
    RealMatrix m(omega.rows, omega.cols);
    for (std::size_t i = 0; i < omega.v.size(); ++i)
        m.v[i] = std::abs(omega.v[i]) <= 1.0 ? -0.5 : 0.0;
    return m;
}

RealMatrix to_real(const BitMatrix& bits) {
    RealMatrix m(bits.rows(), bits.cols());
    for (int r = 0; r < bits.rows(); ++r)
        for (int c = 0; c < bits.cols(); ++c) m.at(r, c) = bits(r, c) ? 1.0 : 0.0;
    return m;
}

RealMatrix h_tilde(const BitMatrix& h, double eps, std::uint64_t seed) {
    RealMatrix m(h.rows(), h.cols());
    Rng rng(seed, stream::kHTilde, 0);
    for (int r = 0; r < h.rows(); ++r)
        for (int c = 0; c < h.cols(); ++c) {
            const bool flip = rng.bernoulli(0.5);
            m.at(r, c) = h(r, c) ? 1.0 : (flip ? -eps : eps);
        }
    return m;
}

double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

namespace {

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

constexpr int kReduceBlock = 256;

bool is_binary(const RealMatrix& h) {
    for (double v : h.v)
        if (v != 0.0 && v != 1.0) return false;
    return true;
}

double frame_loss_from_outputs(const double* out, int T, int n, LossMode mode) {
    double loss = 0.0;
    const int t0 = mode == LossMode::SummedIterations ? 0 : T - 1;
    for (int t = t0; t < T; ++t)
        for (int i = 0; i < n; ++i) loss += softplus(out[t * n + i]);
    return loss;
}

// Backward scratch for one frame.
struct BackScratch {
    std::vector<double> rbar, qbar, new_rbar;
    std::vector<double> termbar, colqbar, pre, suf;

    void resize(int m, int n) {
        rbar.assign(static_cast<std::size_t>(m) * n, 0.0);
        qbar.assign(static_cast<std::size_t>(m) * n, 0.0);
        new_rbar.assign(static_cast<std::size_t>(m) * n, 0.0);
        termbar.assign(n, 0.0);
        colqbar.assign(n, 0.0);
        pre.assign(n + 1, 0.0);
        suf.assign(n + 1, 0.0);
    }
};

// Reverse pass over one frame's tape; adds dLoss/dH into hbar (unnormalized).
void tensor_bp_backward(const detail::TensorPlan& plan, const BpConfig& bp, LossMode mode,
                        const detail::TensorTape& tape, BackScratch& bs, double* hbar) {
    const int T = tape.T, m = tape.m, n = tape.n;
    const RealMatrix& h = *plan.h;
    const double eps = bp.clamp_eps;
    const double lim = 1.0 - eps;
    const std::size_t mn = static_cast<std::size_t>(m) * n;

    bs.resize(m, n);
    std::vector<std::pair<int, double>> omit;

    for (int t = T - 1; t >= 0; --t) {
        const double* q_t = tape.q.data() + t * mn;
        const double* r_t = tape.r.data() + t * mn;
        const double* thd_t = tape.thd.data() + t * mn;
        const double* term_t = tape.term.data() + t * mn;
        const double* out_t = tape.out.data() + static_cast<std::size_t>(t) * n;

        const bool contributes = mode == LossMode::SummedIterations || t == T - 1;
        if (contributes) {
            for (int i = 0; i < n; ++i) {
                const double obar = sigmoid(out_t[i]);
                for (int j = 0; j < m; ++j) {
                    bs.rbar[j * n + i] += obar * h.at(j, i);
                    hbar[j * n + i] += obar * r_t[j * n + i];
                }
            }
        }

        // Check update backward: R(j,i) = -2 atanh(clamp(quot)) with
        // quot = prod(f) / (-tanh(q/2)) and f = (1 - h) - tanh(q h / 2).
        std::fill(bs.qbar.begin(), bs.qbar.end(), 0.0);
        for (int j = 0; j < m; ++j) {
            if (plan.row_degree[j] <= 1) continue; // R row pinned to zero
            const double* term = term_t + j * n;
            const double* thd = thd_t + j * n;
            const double prod = tape.prod[t * m + j];
            double prod_bar = 0.0;
            omit.clear();
            std::fill(bs.termbar.begin(), bs.termbar.end(), 0.0);
            bool have_excl = false;

            for (int i = 0; i < n; ++i) {
                const double rb = bs.rbar[j * n + i];
                if (rb == 0.0) continue;
                const double denom = -thd[i];
                const bool div = std::abs(denom) >= eps;
                double quot;
                if (div) {
                    quot = prod / denom;
                } else {
                    if (!have_excl) {
                        bs.pre[0] = 1.0;
                        for (int x = 0; x < n; ++x) bs.pre[x + 1] = bs.pre[x] * term[x];
                        bs.suf[n] = 1.0;
                        for (int x = n - 1; x >= 0; --x) bs.suf[x] = term[x] * bs.suf[x + 1];
                        have_excl = true;
                    }
                    quot = bs.pre[i] * bs.suf[i + 1];
                }
                const double clamped = std::clamp(quot, -lim, lim);
                const double cbar = -rb * 2.0 / (1.0 - clamped * clamped);
                // Saturated clamp passes no gradient.
                if (std::abs(quot) > lim) continue;
                if (div) {
                    prod_bar += cbar / denom;
                    const double denom_bar = -cbar * quot / denom;
                    // denom = -tanh(q/2): d(denom)/dq = -(1 - tanh^2)/2.
                    bs.qbar[j * n + i] += denom_bar * -0.5 * (1.0 - thd[i] * thd[i]);
                } else {
                    omit.emplace_back(i, cbar);
                }
            }

            if (prod_bar != 0.0) {
                bs.pre[0] = 1.0;
                for (int x = 0; x < n; ++x) bs.pre[x + 1] = bs.pre[x] * term[x];
                bs.suf[n] = 1.0;
                for (int x = n - 1; x >= 0; --x) bs.suf[x] = term[x] * bs.suf[x + 1];
                for (int i = 0; i < n; ++i)
                    bs.termbar[i] += prod_bar * bs.pre[i] * bs.suf[i + 1];
            }
            // Omission path: quot was a product excluding i0, so its
            // adjoint needs double-exclusion products.
            for (const auto& [i0, qb0] : omit) {
                bs.pre[0] = 1.0;
                for (int x = 0; x < n; ++x)
                    bs.pre[x + 1] = bs.pre[x] * (x == i0 ? 1.0 : term[x]);
                bs.suf[n] = 1.0;
                for (int x = n - 1; x >= 0; --x)
                    bs.suf[x] = (x == i0 ? 1.0 : term[x]) * bs.suf[x + 1];
                for (int i = 0; i < n; ++i) {
                    if (i == i0) continue;
                    bs.termbar[i] += qb0 * bs.pre[i] * bs.suf[i + 1];
                }
            }

            // f = (1 - h) - tanh(q h / 2); recover the tanh from the tape.
            for (int i = 0; i < n; ++i) {
                const double tb = bs.termbar[i];
                if (tb == 0.0) continue;
                const double hij = h.at(j, i);
                const double th = (1.0 - hij) - term[i];
                const double sech2 = 1.0 - th * th;
                bs.qbar[j * n + i] += tb * -0.5 * hij * sech2;
                hbar[j * n + i] += tb * (-1.0 - 0.5 * q_t[j * n + i] * sech2);
            }
        }

        // Variable update backward into the previous R and into H.
        if (t >= 1) {
            const double* r_prev = tape.r.data() + (t - 1) * mn;
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int j = 0; j < m; ++j) s += bs.qbar[j * n + i];
                bs.colqbar[i] = s;
            }
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < n; ++i) {
                    bs.new_rbar[j * n + i] =
                        bs.colqbar[i] * h.at(j, i) - bs.qbar[j * n + i];
                    hbar[j * n + i] += bs.colqbar[i] * r_prev[j * n + i];
                }
            std::swap(bs.rbar, bs.new_rbar);
        }
    }
}

double edge_loss(const RealMatrix& llr, const BitMatrix& h, const LossConfig& cfg) {
    const TannerGraph g = TannerGraph::build(h);
    const int B = llr.rows, n = llr.cols;
    const bool summed = cfg.loss_mode == LossMode::SummedIterations;
    const int nblocks = (B + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> block_loss(nblocks, 0.0);

#pragma omp parallel
    {
        std::vector<double> soft(n);
        std::vector<double> per_flat;
#pragma omp for schedule(static)
        for (int b = 0; b < nblocks; ++b) {
            double acc = 0.0;
            const int lo = b * kReduceBlock, hi = std::min(B, lo + kReduceBlock);
            for (int f = lo; f < hi; ++f) {
                edge_bp_frame(g, {llr.row(f), static_cast<std::size_t>(n)}, cfg.bp, soft,
                              summed ? &per_flat : nullptr);
                if (summed) {
                    for (double v : per_flat) acc += softplus(v);
                } else {
                    for (double v : soft) acc += softplus(v);
                }
            }
            block_loss[b] = acc;
        }
    }
    double total = 0.0;
    for (double v : block_loss) total += v;
    const double loss = total / B;
    if (!std::isfinite(loss)) throw NumericalFailure("loss is not finite");
    return loss;
}

double tensor_loss(const RealMatrix& llr, const RealMatrix& h, const LossConfig& cfg) {
    const auto plan = detail::TensorPlan::build(h);
    const int B = llr.rows, n = llr.cols, T = cfg.bp.iterations;
    const int nblocks = (B + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> block_loss(nblocks, 0.0);

#pragma omp parallel
    {
        detail::TensorScratch scratch;
        std::vector<double> o_final(n);
        std::vector<double> per_flat;
#pragma omp for schedule(static)
        for (int b = 0; b < nblocks; ++b) {
            double acc = 0.0;
            const int lo = b * kReduceBlock, hi = std::min(B, lo + kReduceBlock);
            for (int f = lo; f < hi; ++f) {
                detail::tensor_bp_frame({llr.row(f), static_cast<std::size_t>(n)}, plan, cfg.bp,
                                        scratch, {o_final.data(), o_final.size()}, nullptr,
                                        &per_flat);
                acc += frame_loss_from_outputs(per_flat.data(), T, n, cfg.loss_mode);
            }
            block_loss[b] = acc;
        }
    }
    double total = 0.0;
    for (double v : block_loss) total += v;
    const double loss = total / B;
    if (!std::isfinite(loss)) throw NumericalFailure("loss is not finite");
    return loss;
}

} // namespace

double decode_loss(const RealMatrix& llr, const RealMatrix& h, const LossConfig& cfg) {
    cfg.validate();
    if (llr.cols != h.cols) throw DimensionMismatch("LLR columns must match H columns");
    if (is_binary(h)) {
        BitMatrix hb(h.rows, h.cols);
        for (int r = 0; r < h.rows; ++r)
            for (int c = 0; c < h.cols; ++c) hb.set(r, c, h.at(r, c) != 0.0);
        return edge_loss(llr, hb, cfg);
    }
    return tensor_loss(llr, h, cfg);
}

std::pair<double, RealMatrix> loss_and_grad_wrt_h(const RealMatrix& llr, const RealMatrix& h,
                                                  const LossConfig& cfg) {
    cfg.validate();
    if (cfg.bp.llr_clip)
        throw InvalidParams("gradients through llr_clip are not supported");
    if (llr.cols != h.cols) throw DimensionMismatch("LLR columns must match H columns");
    const auto plan = detail::TensorPlan::build(h);
    const int B = llr.rows, n = llr.cols, m = h.rows;
    const std::size_t mn = static_cast<std::size_t>(m) * n;
    const int nblocks = (B + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> block_loss(nblocks, 0.0);
    std::vector<std::vector<double>> block_grad(nblocks);

#pragma omp parallel
    {
        detail::TensorScratch scratch;
        detail::TensorTape tape;
        BackScratch bs;
        std::vector<double> o_final(n);
#pragma omp for schedule(static)
        for (int b = 0; b < nblocks; ++b) {
            const int lo = b * kReduceBlock, hi = std::min(B, lo + kReduceBlock);
            block_grad[b].assign(mn, 0.0);
            double acc = 0.0;
            for (int f = lo; f < hi; ++f) {
                detail::tensor_bp_frame({llr.row(f), static_cast<std::size_t>(n)}, plan, cfg.bp,
                                        scratch, {o_final.data(), o_final.size()}, &tape,
                                        nullptr);
                acc += frame_loss_from_outputs(tape.out.data(), tape.T, n, cfg.loss_mode);
                tensor_bp_backward(plan, cfg.bp, cfg.loss_mode, tape, bs, block_grad[b].data());
            }
            block_loss[b] = acc;
        }
    }

    double total = 0.0;
    RealMatrix grad(m, n);
    for (int b = 0; b < nblocks; ++b) {
        total += block_loss[b];
        for (std::size_t i = 0; i < mn; ++i) grad.v[i] += block_grad[b][i];
    }
    const double inv_b = 1.0 / B;
    for (auto& v : grad.v) {
        v *= inv_b;
        if (!std::isfinite(v)) throw NumericalFailure("gradient is not finite");
    }
    const double loss = total * inv_b;
    if (!std::isfinite(loss)) throw NumericalFailure("loss is not finite");
    return {loss, std::move(grad)};
}

RealMatrix grad_wrt_h(const RealMatrix& llr, const RealMatrix& h, const LossConfig& cfg) {
    return loss_and_grad_wrt_h(llr, h, cfg).second;
}

RealMatrix grad_wrt_omega(const RealMatrix& llr, const RealMatrix& omega, const LossConfig& cfg) {
    const BitMatrix hb = bin(omega);
    const RealMatrix h_eval =
        cfg.soft_h_eps ? h_tilde(hb, *cfg.soft_h_eps, cfg.seed) : to_real(hb);
    RealMatrix g = grad_wrt_h(llr, h_eval, cfg);
    const RealMatrix mask = ste_mask(omega);
    for (std::size_t i = 0; i < g.v.size(); ++i) g.v[i] *= mask.v[i];
    return g;
}

} // namespace bpc
