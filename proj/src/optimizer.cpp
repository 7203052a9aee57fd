#include "bpc/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bpc/rng.hpp"

namespace bpc {

namespace {

// One SNR draw covers this many frames during batch generation.
constexpr int kMicroBatch = 4096;
// Guarantees a candidate step pushes the crossing entries past zero.
constexpr double kStrictCrossing = 1.0 + 1e-6;

} // namespace

void TrainConfig::validate() const {
    if (max_iters < 0) throw InvalidParams("max_iters must be >= 0");
    if (batch_size < 1) throw InvalidParams("batch_size must be >= 1");
    if (grid_limit < 1) throw InvalidParams("grid_limit must be >= 1");
    if (bp_train_iters < 1) throw InvalidParams("bp_train_iters must be >= 1");
    if (snr_set.empty()) throw InvalidParams("snr_set must be nonempty");
    for (double s : snr_set)
        if (!std::isfinite(s)) throw InvalidParams("snr values must be finite");
    if (l1_lambda < 0.0) throw InvalidParams("l1_lambda must be >= 0");
    if (soft_h_eps && !(*soft_h_eps > 0.0 && *soft_h_eps < 1e-3))
        throw InvalidParams("soft_h_eps must be in (0, 1e-3)");
}

TrainConfig train_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("bad train config JSON: ") + e.what());
    }
    TrainConfig cfg;
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    if (j.contains("snr_set")) cfg.snr_set = j["snr_set"].get<std::vector<double>>();
    cfg.grid_limit = j.value("grid_limit", cfg.grid_limit);
    cfg.bp_train_iters = j.value("bp_train_iters", cfg.bp_train_iters);
    if (j.contains("loss_mode"))
        cfg.loss_mode = loss_mode_from_string(j["loss_mode"].get<std::string>());
    if (j.contains("channel"))
        cfg.channel = channel_family_from_string(j["channel"].get<std::string>());
    cfg.syndrome_filter = j.value("syndrome_filter", cfg.syndrome_filter);
    cfg.systematic_mask = j.value("systematic_mask", cfg.systematic_mask);
    cfg.l1_lambda = j.value("l1_lambda", cfg.l1_lambda);
    if (j.contains("soft_h_eps") && !j["soft_h_eps"].is_null()) {
        const double eps = j["soft_h_eps"].get<double>();
        if (eps > 0.0) cfg.soft_h_eps = eps;
    }
    cfg.rank_guard = j.value("rank_guard", cfg.rank_guard);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

std::string to_json(const TrainConfig& cfg) {
    nlohmann::json j{{"max_iters", cfg.max_iters},
                     {"batch_size", cfg.batch_size},
                     {"snr_set", cfg.snr_set},
                     {"grid_limit", cfg.grid_limit},
                     {"bp_train_iters", cfg.bp_train_iters},
                     {"loss_mode", to_string(cfg.loss_mode)},
                     {"channel", to_string(cfg.channel)},
                     {"syndrome_filter", cfg.syndrome_filter},
                     {"systematic_mask", cfg.systematic_mask},
                     {"l1_lambda", cfg.l1_lambda},
                     {"soft_h_eps", cfg.soft_h_eps ? nlohmann::json(*cfg.soft_h_eps)
                                                   : nlohmann::json(nullptr)},
                     {"rank_guard", cfg.rank_guard},
                     {"seed", cfg.seed}};
    return j.dump(2) + "\n";
}

std::string TrainTrace::to_csv() const {
    std::ostringstream out;
    out << "iter,loss,baseline_loss,lambda_index,lambda,flips,density,rank,wall_time_s,"
           "rank_skipped\n";
    for (const auto& r : rows) {
        out << r.iter << ',' << std::setprecision(17) << r.loss << ',' << r.baseline_loss << ','
            << r.lambda_index << ',' << r.lambda << ',' << r.flips << ',' << r.density << ','
            << r.rank << ',' << r.wall_time_s << ',' << r.rank_skipped << '\n';
    }
    return out.str();
}

RealMatrix sample_training_batch(const ParityCheck& current, const TrainConfig& cfg,
                                 std::uint64_t iteration) {
    cfg.validate();
    const int n = current.n();
    const double rate = current.rate();
    RealMatrix batch(cfg.batch_size, n);

    const std::uint64_t snr_stream = mix_key(stream::kSnrDraw, iteration);
    const std::uint64_t data_stream = mix_key(stream::kTrainData, iteration);
    const std::vector<double> symbols(n, 1.0); // modulated zero codeword

    int collected = 0;
    std::uint64_t attempts = 0;
    std::uint64_t round = 0;

    std::vector<double> round_llr(static_cast<std::size_t>(kMicroBatch) * n);
    std::vector<std::uint8_t> keep(kMicroBatch);

    while (collected < cfg.batch_size) {
        Rng snr_rng(cfg.seed, snr_stream, round);
        const double snr =
            cfg.snr_set[static_cast<std::size_t>(snr_rng.uniform() * cfg.snr_set.size()) %
                        cfg.snr_set.size()];
        ChannelSpec spec;
        spec.family = cfg.channel;
        spec.ebn0_db = snr;
        spec.rate = rate;

        const std::uint64_t base_attempt = round * kMicroBatch;
#pragma omp parallel
        {
            std::vector<double> y(n), h(n);
            std::vector<std::uint8_t> hard(n);
#pragma omp for schedule(static)
            for (int f = 0; f < kMicroBatch; ++f) {
                Rng rng(cfg.seed, data_stream, base_attempt + f);
                const bool fading = spec.family == ChannelFamily::RayleighFading;
                transmit_frame(symbols, spec, rng, {y.data(), y.size()},
                               fading ? std::span<double>(h) : std::span<double>());
                double* row = round_llr.data() + static_cast<std::size_t>(f) * n;
                llr_frame(spec, y,
                          fading ? std::span<const double>(h) : std::span<const double>(),
                          {row, static_cast<std::size_t>(n)});
                bool nonzero_syndrome = true;
                if (cfg.syndrome_filter) {
                    for (int i = 0; i < n; ++i) hard[i] = row[i] > 0.0 ? 1 : 0;
                    nonzero_syndrome = false;
                    for (int r = 0; r < current.h.rows() && !nonzero_syndrome; ++r) {
                        std::uint8_t acc = 0;
                        for (int i = 0; i < n; ++i) acc ^= (current.h(r, i) & hard[i]);
                        nonzero_syndrome = acc != 0;
                    }
                }
                keep[f] = nonzero_syndrome;
            }
        }
        for (int f = 0; f < kMicroBatch && collected < cfg.batch_size; ++f) {
            if (!keep[f]) continue;
            std::copy_n(round_llr.data() + static_cast<std::size_t>(f) * n, n,
                        batch.row(collected));
            ++collected;
        }
        attempts += kMicroBatch;
        ++round;
        if (cfg.syndrome_filter && attempts >= 65536 &&
            static_cast<double>(collected) < 1e-4 * static_cast<double>(attempts))
            throw FilterStarvation("syndrome filter acceptance below 1e-4");
    }
    return batch;
}

std::vector<double> candidate_steps(const RealMatrix& omega, const RealMatrix& g,
                                    int grid_limit) {
    if (!omega.same_shape(g)) throw DimensionMismatch("omega and gradient shapes differ");
    std::vector<double> steps;
    steps.reserve(omega.v.size());
    for (std::size_t i = 0; i < omega.v.size(); ++i) {
        if (g.v[i] == 0.0) continue;
        const double s = omega.v[i] / g.v[i];
        if (s > 0.0) steps.push_back(s);
    }
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    if (static_cast<int>(steps.size()) > grid_limit) steps.resize(grid_limit);
    return steps;
}

namespace {

RealMatrix step_omega(const RealMatrix& omega, const RealMatrix& g, double lambda) {
    RealMatrix next = omega;
    const double scale = lambda * kStrictCrossing;
    for (std::size_t i = 0; i < next.v.size(); ++i) next.v[i] -= scale * g.v[i];
    return next;
}

int hamming(const BitMatrix& a, const BitMatrix& b) {
    int d = 0;
    for (int r = 0; r < a.rows(); ++r)
        for (int c = 0; c < a.cols(); ++c) d += a(r, c) != b(r, c);
    return d;
}

LossConfig loss_config_of(const TrainConfig& cfg) {
    LossConfig lc;
    lc.bp.iterations = cfg.bp_train_iters;
    lc.bp.variant = BpVariant::SumProduct;
    lc.loss_mode = cfg.loss_mode;
    lc.soft_h_eps = cfg.soft_h_eps;
    lc.seed = cfg.seed;
    return lc;
}

double objective(const RealMatrix& llr_batch, const BitMatrix& h, double l1_lambda,
                 const LossConfig& lc) {
    double loss = decode_loss(llr_batch, to_real(h), lc);
    if (l1_lambda > 0.0) loss += l1_lambda * static_cast<double>(h.ones());
    return loss;
}

} // namespace

LineSearchResult line_search(const RealMatrix& omega, const RealMatrix& g,
                             const RealMatrix& llr_batch, const TrainConfig& cfg) {
    const LossConfig lc = loss_config_of(cfg);
    const BitMatrix base = bin(omega);
    const int target_rank = omega.rows;

    LineSearchResult best;
    best.lambda = 0.0;
    best.lambda_index = 0;
    best.flips = 0;
    best.loss = objective(llr_batch, base, cfg.l1_lambda, lc);
    best.baseline_loss = best.loss;
    best.omega_next = omega;

    const std::vector<double> steps = candidate_steps(omega, g, cfg.grid_limit);
    int skipped = 0;
    for (std::size_t c = 0; c < steps.size(); ++c) {
        RealMatrix cand = step_omega(omega, g, steps[c]);
        BitMatrix hb = bin(cand);
        if (cfg.rank_guard && gf2_rank(hb) < target_rank) {
            ++skipped;
            continue;
        }
        const double loss = objective(llr_batch, hb, cfg.l1_lambda, lc);
        if (loss < best.loss) {
            best.loss = loss;
            best.lambda = steps[c];
            best.lambda_index = static_cast<int>(c) + 1;
            best.flips = hamming(hb, base);
            best.omega_next = std::move(cand);
        }
    }
    best.rank_skipped = skipped;
    return best;
}

OptimizeResult optimize(const ParityCheck& h0, const TrainConfig& cfg) {
    cfg.validate();
    const int m = h0.h.rows(), n = h0.h.cols();
    if (cfg.rank_guard && gf2_rank(h0.h) < m)
        throw RankDeficient("initial parity check must have full row rank");

    // Omega = 1 - 2H puts every entry exactly on the STE boundary.
    RealMatrix omega(m, n);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < n; ++c) omega.at(r, c) = 1.0 - 2.0 * h0.h(r, c);

    TrainTrace trace;
    for (int it = 0; it < cfg.max_iters; ++it) {
        const auto t0 = std::chrono::steady_clock::now();
        const BitMatrix current = bin(omega);
        const ParityCheck current_code{current};
        const RealMatrix batch = sample_training_batch(current_code, cfg, it);

        LossConfig lc = loss_config_of(cfg);
        lc.seed = mix_key(cfg.seed, static_cast<std::uint64_t>(it));
        const RealMatrix h_eval =
            cfg.soft_h_eps ? h_tilde(current, *cfg.soft_h_eps, lc.seed) : to_real(current);
        RealMatrix grad_h = grad_wrt_h(batch, h_eval, lc);

        if (cfg.l1_lambda > 0.0)
            for (auto& v : grad_h.v) v += cfg.l1_lambda;
        if (cfg.systematic_mask)
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < m; ++c) grad_h.at(r, c) = 0.0;
        const RealMatrix mask = ste_mask(omega);
        RealMatrix grad_omega = grad_h;
        for (std::size_t i = 0; i < grad_omega.v.size(); ++i) grad_omega.v[i] *= mask.v[i];

        LineSearchResult ls = line_search(omega, grad_omega, batch, cfg);

        const BitMatrix next = bin(ls.omega_next);
        TraceRow row;
        row.iter = it;
        row.loss = ls.loss;
        row.baseline_loss = ls.baseline_loss;
        row.lambda_index = ls.lambda_index;
        row.lambda = ls.lambda;
        row.flips = ls.flips;
        row.density = static_cast<double>(next.ones()) / (static_cast<double>(m) * n);
        row.rank = gf2_rank(next);
        row.rank_skipped = ls.rank_skipped;
        row.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        trace.rows.push_back(row);

        omega = std::move(ls.omega_next);
        if (ls.lambda_index == 0) break; // no candidate beat the baseline
    }

    return OptimizeResult{ParityCheck{bin(omega)}, std::move(trace)};
}

SweepGrid sweep_grid_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("bad sweep grid JSON: ") + e.what());
    }
    SweepGrid g;
    if (j.contains("snr_lower_bounds"))
        g.snr_lower_bounds = j["snr_lower_bounds"].get<std::vector<double>>();
    if (j.contains("syndrome_filter"))
        g.syndrome_filter = j["syndrome_filter"].get<std::vector<bool>>();
    if (j.contains("soft_h_eps")) g.soft_h_eps = j["soft_h_eps"].get<std::vector<double>>();
    g.subset_size = j.value("subset_size", g.subset_size);
    if (j.contains("eval_snrs")) g.eval_snrs = j["eval_snrs"].get<std::vector<double>>();
    g.eval_min_frames = j.value("eval_min_frames", g.eval_min_frames);
    g.eval_min_errors = j.value("eval_min_errors", g.eval_min_errors);
    g.eval_max_frames = j.value("eval_max_frames", g.eval_max_frames);
    g.eval_iters = j.value("eval_iters", g.eval_iters);
    if (g.snr_lower_bounds.empty() || g.syndrome_filter.empty() || g.soft_h_eps.empty() ||
        g.subset_size < 1 || g.eval_snrs.empty())
        throw InvalidParams("sweep grid must be nonempty");
    return g;
}

std::vector<SweepEntry> sweep(const ParityCheck& h0, const TrainConfig& base,
                              const SweepGrid& grid) {
    std::vector<TrainConfig> configs;
    for (double u : grid.snr_lower_bounds)
        for (bool filt : grid.syndrome_filter)
            for (double eps : grid.soft_h_eps) {
                TrainConfig cfg = base;
                cfg.snr_set.clear();
                const double top = *std::max_element(base.snr_set.begin(), base.snr_set.end());
                for (double s = u; s <= top + 1e-9; s += 1.0) cfg.snr_set.push_back(s);
                if (cfg.snr_set.empty()) cfg.snr_set.push_back(u);
                cfg.syndrome_filter = filt;
                if (eps > 0.0)
                    cfg.soft_h_eps = eps;
                else
                    cfg.soft_h_eps.reset();
                configs.push_back(std::move(cfg));
            }

    // Random subset of the hyperparameter product, Fisher-Yates order.
    Rng rng(base.seed, stream::kSweep, 0);
    std::vector<int> order(configs.size());
    std::iota(order.begin(), order.end(), 0);
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform() * (i + 1)) % (i + 1);
        std::swap(order[i], order[j]);
    }
    if (static_cast<int>(order.size()) > grid.subset_size) order.resize(grid.subset_size);

    std::vector<SweepEntry> entries;
    for (int idx : order) {
        TrainConfig cfg = configs[idx];
        cfg.seed = mix_key(base.seed, static_cast<std::uint64_t>(idx));
        OptimizeResult opt = optimize(h0, cfg);

        std::vector<ChannelSpec> specs;
        for (double s : grid.eval_snrs) {
            ChannelSpec spec;
            spec.family = cfg.channel;
            spec.ebn0_db = s;
            spec.rate = h0.rate();
            specs.push_back(spec);
        }
        BpConfig bp;
        bp.iterations = grid.eval_iters;
        StopRule stop;
        stop.min_frames = grid.eval_min_frames;
        stop.min_frame_errors = grid.eval_min_errors;
        stop.max_frames = grid.eval_max_frames;
        EvalReport rep = monte_carlo(opt.code, specs, bp, stop, EvalMode::ZeroCodeword,
                                     mix_key(cfg.seed, stream::kEval));
        double mean = 0.0;
        for (const auto& row : rep.rows) mean += row.ber;
        mean /= static_cast<double>(rep.rows.size());

        SweepEntry e{std::move(cfg), std::move(opt.code), mean, std::move(rep)};
        entries.push_back(std::move(e));
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const SweepEntry& a, const SweepEntry& b) {
                         return a.mean_ber < b.mean_ber;
                     });
    return entries;
}

} // namespace bpc
