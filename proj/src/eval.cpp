#include "bpc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "bpc/rng.hpp"

namespace bpc {

namespace {

struct SpecCounters {
    std::uint64_t frames = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t frame_errors = 0;
    std::uint64_t bit_errors_sq = 0;
};

void finish_row(EvalRow& row, const SpecCounters& c, int n) {
    row.frames = c.frames;
    row.bit_errors = c.bit_errors;
    row.frame_errors = c.frame_errors;
    row.bit_errors_sq = c.bit_errors_sq;
    row.ber = c.frames ? static_cast<double>(c.bit_errors) /
                             (static_cast<double>(c.frames) * n)
                       : 0.0;
    row.fer = c.frames ? static_cast<double>(c.frame_errors) / c.frames : 0.0;
    row.neg_ln_ber =
        row.ber > 0.0 ? -std::log(row.ber) : std::numeric_limits<double>::infinity();
}

} // namespace

EvalReport monte_carlo(const ParityCheck& code, const std::vector<ChannelSpec>& specs,
                       const BpConfig& cfg, const StopRule& stop, EvalMode mode,
                       std::uint64_t seed) {
    cfg.validate();
    if (stop.batch_frames < 1 || stop.min_frames < 1)
        throw InvalidParams("stop rule needs positive frame counts");
    const int n = code.n(), k = code.k();
    const TannerGraph graph = TannerGraph::build(code.h);

    BitMatrix gen(1, 1);
    if (mode == EvalMode::RandomCodewords) gen = generator_from(code.h); // throws RankDeficient

    const std::vector<double> zero_symbols(n, 1.0);

    EvalReport report;
    for (std::size_t s = 0; s < specs.size(); ++s) {
        const ChannelSpec& spec = specs[s];
        EvalRow row;
        row.channel = to_string(spec.family);
        row.snr_db = spec.ebn0_db;
        row.variant = to_string(cfg.variant);
        row.iters = cfg.iterations;

        SpecCounters counters;
        const std::uint64_t stream = mix_key(stream::kEval, s);
        std::vector<int> frame_err(stop.batch_frames);

        while (true) {
            const std::uint64_t batch =
                std::min<std::uint64_t>(stop.batch_frames, stop.max_frames - counters.frames);
            if (batch == 0) {
                row.budget_exhausted = true;
                break;
            }
            const std::uint64_t base_frame = counters.frames;

#pragma omp parallel
            {
                std::vector<std::uint8_t> msg(k), cw(n);
                std::vector<double> y(n), h(n), llr_row(n), soft(n), symbols(n);
#pragma omp for schedule(static)
                for (long long f = 0; f < static_cast<long long>(batch); ++f) {
                    Rng rng(seed, stream, base_frame + static_cast<std::uint64_t>(f));
                    const std::uint8_t* bits = nullptr;
                    const double* sym = zero_symbols.data();
                    if (mode == EvalMode::RandomCodewords) {
                        for (int i = 0; i < k; ++i) msg[i] = rng.bernoulli(0.5);
                        cw = encode(gen, msg);
                        for (int i = 0; i < n; ++i) symbols[i] = 1.0 - 2.0 * cw[i];
                        bits = cw.data();
                        sym = symbols.data();
                    }
                    const bool fading = spec.family == ChannelFamily::RayleighFading;
                    transmit_frame({sym, static_cast<std::size_t>(n)}, spec, rng,
                                   {y.data(), y.size()},
                                   fading ? std::span<double>(h) : std::span<double>());
                    llr_frame(spec, y, fading ? std::span<const double>(h)
                                              : std::span<const double>(),
                              llr_row);
                    if (cfg.variant == BpVariant::SumProduct)
                        edge_bp_frame(graph, llr_row, cfg, soft, nullptr);
                    else
                        min_sum_frame(graph, llr_row, cfg, soft, nullptr);
                    int errs = 0;
                    for (int i = 0; i < n; ++i) {
                        const std::uint8_t bit = soft[i] > 0.0 ? 1 : 0;
                        const std::uint8_t sent = bits ? bits[i] : 0;
                        errs += bit != sent;
                    }
                    frame_err[f] = errs;
                }
            }
            for (std::uint64_t f = 0; f < batch; ++f) {
                const std::uint64_t e = static_cast<std::uint64_t>(frame_err[f]);
                counters.bit_errors += e;
                counters.bit_errors_sq += e * e;
                counters.frame_errors += e > 0;
            }
            counters.frames += batch;
            if (counters.frames >= stop.min_frames &&
                counters.frame_errors >= stop.min_frame_errors)
                break;
            if (counters.frames >= stop.max_frames) {
                row.budget_exhausted = true;
                break;
            }
        }
        finish_row(row, counters, n);
        report.rows.push_back(std::move(row));
    }
    return report;
}

namespace {

struct CurvePoint {
    double snr;
    double log_ber;
};

std::vector<CurvePoint> curve_of(const EvalReport& r) {
    std::vector<CurvePoint> pts;
    for (const auto& row : r.rows)
        if (row.ber > 0.0) pts.push_back({row.snr_db, std::log10(row.ber)});
    std::sort(pts.begin(), pts.end(),
              [](const CurvePoint& a, const CurvePoint& b) { return a.snr < b.snr; });
    return pts;
}

// SNR at which the piecewise-linear curve crosses the given log10(BER);
// first crossing in SNR order.
double snr_at_level(const std::vector<CurvePoint>& pts, double level) {
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i].log_ber, b = pts[i + 1].log_ber;
        if ((level <= a && level >= b) || (level >= a && level <= b)) {
            if (a == b) return pts[i].snr;
            const double t = (level - a) / (b - a);
            return pts[i].snr + t * (pts[i + 1].snr - pts[i].snr);
        }
    }
    throw NoOverlap("BER level outside curve range");
}

} // namespace

GainStats db_gain(const EvalReport& base, const EvalReport& ours) {
    const auto cb = curve_of(base);
    const auto co = curve_of(ours);
    if (cb.size() < 2 || co.size() < 2)
        throw NoOverlap("need at least two finite-BER points per curve");
    auto range = [](const std::vector<CurvePoint>& c) {
        double lo = c[0].log_ber, hi = c[0].log_ber;
        for (const auto& p : c) {
            lo = std::min(lo, p.log_ber);
            hi = std::max(hi, p.log_ber);
        }
        return std::pair<double, double>(lo, hi);
    };
    const auto [blo, bhi] = range(cb);
    const auto [olo, ohi] = range(co);
    const double lo = std::max(blo, olo), hi = std::min(bhi, ohi);
    if (lo > hi) throw NoOverlap("BER ranges do not overlap");

    constexpr int kLevels = 50;
    GainStats g;
    g.min_db = std::numeric_limits<double>::infinity();
    g.max_db = -std::numeric_limits<double>::infinity();
    double sum = 0.0, sum_sq = 0.0;
    for (int t = 0; t < kLevels; ++t) {
        const double level = lo + (hi - lo) * t / (kLevels - 1);
        const double gain = snr_at_level(cb, level) - snr_at_level(co, level);
        sum += gain;
        sum_sq += gain * gain;
        g.min_db = std::min(g.min_db, gain);
        g.max_db = std::max(g.max_db, gain);
    }
    g.mean_db = sum / kLevels;
    g.std_db = std::sqrt(std::max(0.0, sum_sq / kLevels - g.mean_db * g.mean_db));
    return g;
}

namespace {

std::string fmt_double(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

} // namespace

std::string report_to_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "channel,snr_db,variant,iters,frames,bit_errors,frame_errors,ber,fer,neg_ln_ber\n";
    for (const auto& r : report.rows) {
        out << r.channel << ',' << fmt_double(r.snr_db) << ',' << r.variant << ',' << r.iters
            << ',' << r.frames << ',' << r.bit_errors << ',' << r.frame_errors << ','
            << fmt_double(r.ber) << ',' << fmt_double(r.fer) << ',' << fmt_double(r.neg_ln_ber)
            << '\n';
    }
    return out.str();
}

EvalReport report_from_csv(const std::string& text) {
    EvalReport report;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty report");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != 10) throw ParseError("report row needs 10 columns");
        EvalRow r;
        try {
            r.channel = cells[0];
            r.snr_db = std::stod(cells[1]);
            r.variant = cells[2];
            r.iters = std::stoi(cells[3]);
            r.frames = std::stoull(cells[4]);
            r.bit_errors = std::stoull(cells[5]);
            r.frame_errors = std::stoull(cells[6]);
            r.ber = std::stod(cells[7]);
            r.fer = std::stod(cells[8]);
            r.neg_ln_ber = cells[9] == "inf" ? std::numeric_limits<double>::infinity()
                                             : std::stod(cells[9]);
        } catch (const std::exception&) {
            throw ParseError("bad report cell in: " + line);
        }
        report.rows.push_back(std::move(r));
    }
    return report;
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json j{{"channel", r.channel},
                         {"snr_db", r.snr_db},
                         {"variant", r.variant},
                         {"iters", r.iters},
                         {"frames", r.frames},
                         {"bit_errors", r.bit_errors},
                         {"frame_errors", r.frame_errors},
                         {"ber", r.ber},
                         {"fer", r.fer},
                         {"budget_exhausted", r.budget_exhausted},
                         {"bit_errors_sq", r.bit_errors_sq}};
        if (std::isfinite(r.neg_ln_ber)) j["neg_ln_ber"] = r.neg_ln_ber;
        rows.push_back(std::move(j));
    }
    return nlohmann::json{{"rows", rows}}.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    EvalReport report;
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("bad report JSON: ") + e.what());
    }
    if (!doc.contains("rows")) throw ParseError("report JSON missing rows");
    for (const auto& j : doc["rows"]) {
        EvalRow r;
        r.channel = j.at("channel").get<std::string>();
        r.snr_db = j.at("snr_db").get<double>();
        r.variant = j.at("variant").get<std::string>();
        r.iters = j.at("iters").get<int>();
        r.frames = j.at("frames").get<std::uint64_t>();
        r.bit_errors = j.at("bit_errors").get<std::uint64_t>();
        r.frame_errors = j.at("frame_errors").get<std::uint64_t>();
        r.ber = j.at("ber").get<double>();
        r.fer = j.at("fer").get<double>();
        r.budget_exhausted = j.value("budget_exhausted", false);
        r.bit_errors_sq = j.value("bit_errors_sq", std::uint64_t{0});
        r.neg_ln_ber = j.contains("neg_ln_ber") ? j["neg_ln_ber"].get<double>()
                                                : std::numeric_limits<double>::infinity();
        report.rows.push_back(std::move(r));
    }
    return report;
}

std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double p = static_cast<double>(errors) / trials;
    const double nt = static_cast<double>(trials);
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nt;
    const double center = p + z2 / (2.0 * nt);
    const double half = z * std::sqrt(p * (1.0 - p) / nt + z2 / (4.0 * nt * nt));
    return {std::max(0.0, (center - half) / denom), std::min(1.0, (center + half) / denom)};
}

double ber_standard_error(const EvalRow& row, int n) {
    if (row.frames < 2) return 0.0;
    const double f = static_cast<double>(row.frames);
    const double mean = static_cast<double>(row.bit_errors) / f;
    const double var = std::max(0.0, static_cast<double>(row.bit_errors_sq) / f - mean * mean);
    return std::sqrt(var / f) / n;
}

} // namespace bpc
