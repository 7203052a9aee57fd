#include "bpc/decoder.hpp"

#include <algorithm>
#include <cmath>

#include "tensor_kernel.hpp"

namespace bpc {

std::string to_string(BpVariant v) {
    return v == BpVariant::SumProduct ? "sumproduct" : "minsum";
}

BpVariant bp_variant_from_string(const std::string& s) {
    if (s == "sumproduct") return BpVariant::SumProduct;
    if (s == "minsum") return BpVariant::MinSum;
    throw ParseError("unknown decoder variant: " + s);
}

void BpConfig::validate() const {
    if (iterations < 1) throw InvalidParams("iterations must be >= 1");
    if (!(clamp_eps > 0.0 && clamp_eps < 0.1))
        throw InvalidParams("clamp_eps must be in (0, 0.1)");
    if (llr_clip && !(*llr_clip > 0.0)) throw InvalidParams("llr_clip must be positive");
}

std::vector<std::uint8_t> hard_decision(std::span<const double> soft) {
    std::vector<std::uint8_t> bits(soft.size());
    for (std::size_t i = 0; i < soft.size(); ++i) bits[i] = soft[i] > 0.0 ? 1 : 0;
    return bits;
}

namespace {

void check_finite(const RealMatrix& soft) {
    for (double v : soft.v)
        if (!std::isfinite(v))
            throw NumericalFailure("decoder produced a non-finite output");
}

void clip_span(std::span<double> v, const std::optional<double>& clip) {
    if (!clip) return;
    const double c = *clip;
    for (double& x : v) x = std::clamp(x, -c, c);
}

} // namespace

namespace detail {

TensorPlan TensorPlan::build(const RealMatrix& h) {
    TensorPlan p;
    p.h = &h;
    p.m = h.rows;
    p.n = h.cols;
    p.row_degree.assign(p.m, 0);
    for (int j = 0; j < p.m; ++j) {
        for (int i = 0; i < p.n; ++i) {
            const double v = h.at(j, i);
            if (v != 0.0) ++p.row_degree[j];
            if (v != 0.0 && v != 1.0) p.binary = false;
        }
    }
    return p;
}

void TensorTape::resize(int T_, int m_, int n_) {
    T = T_;
    m = m_;
    n = n_;
    const std::size_t mn = static_cast<std::size_t>(m) * n;
    q.resize(T * mn);
    r.resize(T * mn);
    thd.resize(T * mn);
    term.resize(T * mn);
    prod.resize(static_cast<std::size_t>(T) * m);
    out.resize(static_cast<std::size_t>(T) * n);
}

void tensor_bp_frame(std::span<const double> llr, const TensorPlan& plan, const BpConfig& cfg,
                     TensorScratch& scratch, std::span<double> o_final, TensorTape* tape,
                     std::vector<double>* per_iter) {
    const int m = plan.m, n = plan.n, T = cfg.iterations;
    const RealMatrix& h = *plan.h;
    const double eps = cfg.clamp_eps;
    const double lim = 1.0 - eps;
    const std::size_t mn = static_cast<std::size_t>(m) * n;

    scratch.resize(m, n);
    if (tape) tape->resize(T, m, n);
    if (per_iter) per_iter->assign(static_cast<std::size_t>(T) * n, 0.0);

    double* r_prev = nullptr;
    for (int t = 0; t < T; ++t) {
        double* q = tape ? tape->q.data() + t * mn : scratch.q.data();
        double* r = tape ? tape->r.data() + t * mn : scratch.r.data();
        double* thd = tape ? tape->thd.data() + t * mn : scratch.thd.data();
        double* term = tape ? tape->term.data() + t * mn : scratch.term.data();

        // Variable update (Q), trivially the broadcast LLR on iteration 0.
        if (t == 0) {
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < n; ++i) q[j * n + i] = llr[i];
        } else {
            double* colsum = scratch.colsum.data();
            std::fill(colsum, colsum + n, 0.0);
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < n; ++i) colsum[i] += r_prev[j * n + i] * h.at(j, i);
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < n; ++i)
                    q[j * n + i] = llr[i] + colsum[i] - r_prev[j * n + i];
        }
        clip_span({q, mn}, cfg.llr_clip);

        // Check update (R). With the log P(1)/P(0) convention the product
        // rule applies to negated tanh factors and a negated output
        // (equivalent to classical BP in the log P(0)/P(1) convention);
        // on even-degree checks this reduces to the plain product rule.
        // Masked positions contribute the multiplicative identity; the
        // exclusion divides by the entry's own factor, recomputed by
        // omission when that denominator is too small.
        for (int j = 0; j < m; ++j) {
            double* qr = q + j * n;
            double* rr = r + j * n;
            double* th = thd + j * n;
            double* tm = term + j * n;
            for (int i = 0; i < n; ++i) th[i] = std::tanh(0.5 * qr[i]);
            if (plan.binary) {
                for (int i = 0; i < n; ++i) tm[i] = h.at(j, i) != 0.0 ? -th[i] : 1.0;
            } else {
                for (int i = 0; i < n; ++i) {
                    const double hij = h.at(j, i);
                    tm[i] = (1.0 - hij) - std::tanh(0.5 * qr[i] * hij);
                }
            }
            if (plan.row_degree[j] <= 1) {
                // A check on fewer than two variables carries no extrinsic
                // information; its messages are pinned to zero.
                std::fill(rr, rr + n, 0.0);
                if (tape) tape->prod[t * m + j] = 1.0;
                continue;
            }
            double prod = 1.0;
            for (int i = 0; i < n; ++i) prod *= tm[i];
            if (tape) tape->prod[t * m + j] = prod;

            bool have_excl = false;
            double* pre = scratch.pre.data();
            double* suf = scratch.suf.data();
            for (int i = 0; i < n; ++i) {
                const double denom = -th[i];
                double quot;
                if (std::abs(denom) < eps) {
                    if (!have_excl) {
                        pre[0] = 1.0;
                        for (int x = 0; x < n; ++x) pre[x + 1] = pre[x] * tm[x];
                        suf[n] = 1.0;
                        for (int x = n - 1; x >= 0; --x) suf[x] = tm[x] * suf[x + 1];
                        have_excl = true;
                    }
                    quot = pre[i] * suf[i + 1];
                } else {
                    quot = prod / denom;
                }
                const double clamped = std::clamp(quot, -lim, lim);
                rr[i] = -2.0 * std::atanh(clamped);
            }
            clip_span({rr, static_cast<std::size_t>(n)}, cfg.llr_clip);
        }

        const bool want_out = tape || per_iter || t == T - 1;
        if (want_out) {
            double* o_t = tape ? tape->out.data() + t * n
                               : (per_iter ? per_iter->data() + static_cast<std::size_t>(t) * n
                                           : o_final.data());
            for (int i = 0; i < n; ++i) o_t[i] = llr[i];
            for (int j = 0; j < m; ++j)
                for (int i = 0; i < n; ++i) o_t[i] += r[j * n + i] * h.at(j, i);
            if (tape && per_iter)
                std::copy(o_t, o_t + n, per_iter->data() + static_cast<std::size_t>(t) * n);
            if (t == T - 1 && o_t != o_final.data()) std::copy(o_t, o_t + n, o_final.begin());
        }

        r_prev = r;
    }
}

} // namespace detail

DecodeResult bp_decode(const RealMatrix& llr, const RealMatrix& h, const BpConfig& cfg) {
    cfg.validate();
    if (llr.cols != h.cols) throw DimensionMismatch("LLR columns must match H columns");
    const auto plan = detail::TensorPlan::build(h);
    DecodeResult res;
    res.frames = llr.rows;
    res.n = llr.cols;
    res.soft = RealMatrix(llr.rows, llr.cols);
    std::vector<std::vector<double>> per(cfg.emit_per_iteration ? llr.rows : 0);

#pragma omp parallel
    {
        detail::TensorScratch scratch;
        std::vector<double> per_flat;
#pragma omp for schedule(static)
        for (int f = 0; f < llr.rows; ++f) {
            detail::tensor_bp_frame(
                {llr.row(f), static_cast<std::size_t>(llr.cols)}, plan, cfg, scratch,
                {res.soft.row(f), static_cast<std::size_t>(llr.cols)},
                nullptr, cfg.emit_per_iteration ? &per_flat : nullptr);
            if (cfg.emit_per_iteration) {
                per[f] = per_flat;
                std::copy(per_flat.end() - llr.cols, per_flat.end(), res.soft.row(f));
            }
        }
    }
    check_finite(res.soft);
    res.hard = hard_decision(res.soft.v);
    if (cfg.emit_per_iteration) {
        res.per_iteration.assign(cfg.iterations, RealMatrix(llr.rows, llr.cols));
        for (int f = 0; f < llr.rows; ++f)
            for (int t = 0; t < cfg.iterations; ++t)
                std::copy(per[f].begin() + static_cast<std::size_t>(t) * llr.cols,
                          per[f].begin() + static_cast<std::size_t>(t + 1) * llr.cols,
                          res.per_iteration[t].row(f));
    }
    return res;
}

TannerGraph TannerGraph::build(const BitMatrix& h) {
    TannerGraph g;
    g.m = h.rows();
    g.n = h.cols();
    g.row_ptr.assign(g.m + 1, 0);
    for (int r = 0; r < g.m; ++r) {
        int d = 0;
        for (int c = 0; c < g.n; ++c) d += h(r, c);
        g.row_ptr[r + 1] = g.row_ptr[r] + d;
    }
    g.edges = g.row_ptr[g.m];
    g.row_col.resize(g.edges);
    g.col_ptr.assign(g.n + 1, 0);
    {
        int e = 0;
        for (int r = 0; r < g.m; ++r)
            for (int c = 0; c < g.n; ++c)
                if (h(r, c)) {
                    g.row_col[e++] = c;
                    ++g.col_ptr[c + 1];
                }
    }
    for (int c = 0; c < g.n; ++c) g.col_ptr[c + 1] += g.col_ptr[c];
    g.col_edge.resize(g.edges);
    std::vector<int> fill(g.n);
    for (int r = 0; r < g.m; ++r)
        for (int e = g.row_ptr[r]; e < g.row_ptr[r + 1]; ++e) {
            const int c = g.row_col[e];
            g.col_edge[g.col_ptr[c] + fill[c]++] = e;
        }
    return g;
}

namespace {

// colsum[i] = sum of R over column i; shared by both edge variants.
void variable_update(const TannerGraph& g, std::span<const double> llr,
                     const std::vector<double>& r, std::vector<double>& q,
                     std::vector<double>& colsum) {
    for (int i = 0; i < g.n; ++i) {
        double s = 0.0;
        for (int e = g.col_ptr[i]; e < g.col_ptr[i + 1]; ++e) s += r[g.col_edge[e]];
        colsum[i] = s;
    }
    for (int j = 0; j < g.m; ++j)
        for (int e = g.row_ptr[j]; e < g.row_ptr[j + 1]; ++e)
            q[e] = llr[g.row_col[e]] + colsum[g.row_col[e]] - r[e];
}

void emit_output(const TannerGraph& g, std::span<const double> llr,
                 const std::vector<double>& r, std::span<double> out) {
    for (int i = 0; i < g.n; ++i) {
        double s = llr[i];
        for (int e = g.col_ptr[i]; e < g.col_ptr[i + 1]; ++e) s += r[g.col_edge[e]];
        out[i] = s;
    }
}

template <typename CheckUpdate>
void edge_frame(const TannerGraph& g, std::span<const double> llr, const BpConfig& cfg,
                std::span<double> soft_out, std::vector<double>* per_iter_flat,
                CheckUpdate&& check_update) {
    std::vector<double> q(g.edges), r(g.edges, 0.0), colsum(g.n);
    if (per_iter_flat) per_iter_flat->assign(static_cast<std::size_t>(cfg.iterations) * g.n, 0.0);

    for (int e = 0; e < g.edges; ++e) q[e] = llr[g.row_col[e]];
    for (int t = 0; t < cfg.iterations; ++t) {
        if (t > 0) {
            variable_update(g, llr, r, q, colsum);
            clip_span(q, cfg.llr_clip);
        }
        check_update(q, r);
        clip_span(r, cfg.llr_clip);
        if (per_iter_flat)
            emit_output(g, llr, r,
                        {per_iter_flat->data() + static_cast<std::size_t>(t) * g.n,
                         static_cast<std::size_t>(g.n)});
    }
    emit_output(g, llr, r, soft_out);
}

} // namespace

void edge_bp_frame(const TannerGraph& g, std::span<const double> llr, const BpConfig& cfg,
                   std::span<double> soft_out, std::vector<double>* per_iter_flat) {
    const double lim = 1.0 - cfg.clamp_eps;
    std::vector<double> th, pre, suf;
    edge_frame(g, llr, cfg, soft_out, per_iter_flat,
               [&](const std::vector<double>& q, std::vector<double>& r) {
                   for (int j = 0; j < g.m; ++j) {
                       const int lo = g.row_ptr[j], hi = g.row_ptr[j + 1];
                       const int deg = hi - lo;
                       if (deg <= 1) {
                           for (int e = lo; e < hi; ++e) r[e] = 0.0;
                           continue;
                       }
                       // Negated factors and output: classical BP under the
                       // log P(1)/P(0) sign convention.
                       th.resize(deg);
                       pre.resize(deg + 1);
                       suf.resize(deg + 1);
                       for (int x = 0; x < deg; ++x) th[x] = -std::tanh(0.5 * q[lo + x]);
                       pre[0] = 1.0;
                       for (int x = 0; x < deg; ++x) pre[x + 1] = pre[x] * th[x];
                       suf[deg] = 1.0;
                       for (int x = deg - 1; x >= 0; --x) suf[x] = th[x] * suf[x + 1];
                       for (int x = 0; x < deg; ++x) {
                           const double excl = pre[x] * suf[x + 1];
                           r[lo + x] = -2.0 * std::atanh(std::clamp(excl, -lim, lim));
                       }
                   }
               });
}

void min_sum_frame(const TannerGraph& g, std::span<const double> llr, const BpConfig& cfg,
                   std::span<double> soft_out, std::vector<double>* per_iter_flat) {
    edge_frame(g, llr, cfg, soft_out, per_iter_flat,
               [&](const std::vector<double>& q, std::vector<double>& r) {
                   for (int j = 0; j < g.m; ++j) {
                       const int lo = g.row_ptr[j], hi = g.row_ptr[j + 1];
                       const int deg = hi - lo;
                       if (deg <= 1) {
                           for (int e = lo; e < hi; ++e) r[e] = 0.0;
                           continue;
                       }
                       int zeros = 0, sign_nz = 1;
                       double min1 = 0.0, min2 = 0.0;
                       int min1_at = -1;
                       for (int e = lo; e < hi; ++e) {
                           const double v = q[e];
                           if (v == 0.0)
                               ++zeros;
                           else if (v < 0.0)
                               sign_nz = -sign_nz;
                           const double a = std::abs(v);
                           if (min1_at < 0 || a < min1) {
                               min2 = min1_at < 0 ? a : min1;
                               min1 = a;
                               min1_at = e;
                           } else if (e == lo + 1 || a < min2) {
                               min2 = a;
                           }
                       }
                       // Same parity correction as the sum-product update:
                       // the excluded sign product is over negated signs,
                       // and the output is negated, i.e. (-1)^deg overall.
                       const int parity = deg % 2 == 0 ? 1 : -1;
                       for (int e = lo; e < hi; ++e) {
                           const double v = q[e];
                           int sign_excl;
                           if (v == 0.0)
                               sign_excl = zeros > 1 ? 0 : sign_nz;
                           else
                               sign_excl = zeros > 0 ? 0 : sign_nz * (v < 0.0 ? -1 : 1);
                           const double mag = (e == min1_at) ? min2 : min1;
                           r[e] = parity * sign_excl * mag;
                       }
                   }
               });
}

namespace {

DecodeResult run_edge_variant(const RealMatrix& llr, const ParityCheck& code, const BpConfig& cfg,
                              bool min_sum) {
    cfg.validate();
    if (llr.cols != code.n()) throw DimensionMismatch("LLR columns must match code length");
    const TannerGraph g = TannerGraph::build(code.h);
    DecodeResult res;
    res.frames = llr.rows;
    res.n = llr.cols;
    res.soft = RealMatrix(llr.rows, llr.cols);
    std::vector<std::vector<double>> per(cfg.emit_per_iteration ? llr.rows : 0);

#pragma omp parallel
    {
        std::vector<double> per_flat;
#pragma omp for schedule(static)
        for (int f = 0; f < llr.rows; ++f) {
            std::span<const double> in{llr.row(f), static_cast<std::size_t>(llr.cols)};
            std::span<double> out{res.soft.row(f), static_cast<std::size_t>(llr.cols)};
            if (min_sum)
                min_sum_frame(g, in, cfg, out, cfg.emit_per_iteration ? &per_flat : nullptr);
            else
                edge_bp_frame(g, in, cfg, out, cfg.emit_per_iteration ? &per_flat : nullptr);
            if (cfg.emit_per_iteration) per[f] = per_flat;
        }
    }
    check_finite(res.soft);
    res.hard = hard_decision(res.soft.v);
    if (cfg.emit_per_iteration) {
        res.per_iteration.assign(cfg.iterations, RealMatrix(llr.rows, llr.cols));
        for (int f = 0; f < llr.rows; ++f)
            for (int t = 0; t < cfg.iterations; ++t)
                std::copy(per[f].begin() + static_cast<std::size_t>(t) * llr.cols,
                          per[f].begin() + static_cast<std::size_t>(t + 1) * llr.cols,
                          res.per_iteration[t].row(f));
    }
    return res;
}

} // namespace

DecodeResult edge_bp_decode(const RealMatrix& llr, const ParityCheck& code, const BpConfig& cfg) {
    return run_edge_variant(llr, code, cfg, false);
}

DecodeResult min_sum_decode(const RealMatrix& llr, const ParityCheck& code, const BpConfig& cfg) {
    return run_edge_variant(llr, code, cfg, true);
}

} // namespace bpc
