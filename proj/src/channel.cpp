#include "bpc/channel.hpp"

#include <cmath>

namespace bpc {

std::string to_string(ChannelFamily f) {
    switch (f) {
    case ChannelFamily::Awgn: return "awgn";
    case ChannelFamily::RayleighFading: return "fading";
    case ChannelFamily::Bursty: return "bursty";
    }
    return "awgn";
}

ChannelFamily channel_family_from_string(const std::string& s) {
    if (s == "awgn") return ChannelFamily::Awgn;
    if (s == "fading") return ChannelFamily::RayleighFading;
    if (s == "bursty") return ChannelFamily::Bursty;
    throw ParseError("unknown channel family: " + s);
}

double sigma_from_ebn0(double ebn0_db, double rate) {
    if (!(rate > 0.0) || rate > 1.0) throw InvalidParams("rate must be in (0, 1]");
    return 1.0 / std::sqrt(2.0 * rate * std::pow(10.0, ebn0_db / 10.0));
}

double ChannelSpec::sigma() const { return sigma_from_ebn0(ebn0_db, rate); }

std::vector<double> modulate(std::span<const std::uint8_t> bits) {
    std::vector<double> s(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) s[i] = 1.0 - 2.0 * bits[i];
    return s;
}

void transmit_frame(std::span<const double> symbols, const ChannelSpec& spec, Rng& rng,
                    std::span<double> y_out, std::span<double> h_out) {
    const std::size_t n = symbols.size();
    const double sigma = spec.sigma();
    // The AWGN component is always drawn first so that Bursty with rho=0
    // emits the exact AWGN sample stream.
    for (std::size_t i = 0; i < n; ++i) y_out[i] = sigma * rng.normal();
    switch (spec.family) {
    case ChannelFamily::Awgn:
        for (std::size_t i = 0; i < n; ++i) y_out[i] += symbols[i];
        break;
    case ChannelFamily::RayleighFading:
        for (std::size_t i = 0; i < n; ++i) {
            h_out[i] = rng.rayleigh();
            y_out[i] += h_out[i] * symbols[i];
        }
        break;
    case ChannelFamily::Bursty: {
        const double burst_sigma = spec.burst_scale * sigma;
        for (std::size_t i = 0; i < n; ++i) {
            y_out[i] += symbols[i];
            if (rng.uniform() < spec.rho) y_out[i] += burst_sigma * rng.normal();
        }
        break;
    }
    }
}

ReceivedBatch transmit(std::span<const double> symbols, const ChannelSpec& spec,
                       std::uint64_t seed, int frames, std::uint64_t first_frame) {
    if (!(spec.rho >= 0.0 && spec.rho <= 1.0)) throw InvalidParams("rho must be in [0,1]");
    if (!(spec.burst_scale > 0.0)) throw InvalidParams("burst_scale must be positive");
    const int n = static_cast<int>(symbols.size());
    ReceivedBatch batch;
    batch.frames = frames;
    batch.n = n;
    batch.spec = spec;
    batch.y = RealMatrix(frames, n);
    const bool fading = spec.family == ChannelFamily::RayleighFading;
    if (fading) batch.h = RealMatrix(frames, n);

#pragma omp parallel for schedule(static)
    for (int f = 0; f < frames; ++f) {
        Rng rng(seed, stream::kChannel, first_frame + static_cast<std::uint64_t>(f));
        std::span<double> h_row =
            fading ? std::span<double>(batch.h.row(f), n) : std::span<double>();
        transmit_frame(symbols, spec, rng, {batch.y.row(f), static_cast<std::size_t>(n)}, h_row);
    }
    return batch;
}

namespace {

// log N(y; 0, v) up to the shared constant, which cancels in the ratio.
inline double log_mix(double y, double rho, double v0, double v1) {
    const double a = std::log1p(-rho) - 0.5 * std::log(v0) - y * y / (2.0 * v0);
    const double b = std::log(rho) - 0.5 * std::log(v1) - y * y / (2.0 * v1);
    const double hi = std::max(a, b);
    return hi + std::log(std::exp(a - hi) + std::exp(b - hi));
}

} // namespace

void llr_frame(const ChannelSpec& spec, std::span<const double> y, std::span<const double> h,
               std::span<double> out) {
    const double sigma = spec.sigma();
    const double scale = -2.0 / (sigma * sigma);
    const std::size_t n = y.size();
    if (spec.family == ChannelFamily::RayleighFading) {
        for (std::size_t i = 0; i < n; ++i) out[i] = scale * h[i] * y[i];
    } else if (spec.family == ChannelFamily::Bursty && spec.bursty_exact_llr) {
        const double v0 = sigma * sigma;
        const double v1 = v0 * (1.0 + spec.burst_scale * spec.burst_scale);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = log_mix(y[i] + 1.0, spec.rho, v0, v1) - log_mix(y[i] - 1.0, spec.rho, v0, v1);
    } else {
        for (std::size_t i = 0; i < n; ++i) out[i] = scale * y[i];
    }
}

RealMatrix llr(const ReceivedBatch& batch) {
    RealMatrix out(batch.frames, batch.n);
    const bool fading = batch.spec.family == ChannelFamily::RayleighFading;
#pragma omp parallel for schedule(static)
    for (int f = 0; f < batch.frames; ++f) {
        std::span<const double> h_row =
            fading ? std::span<const double>(batch.h.row(f), batch.n) : std::span<const double>();
        llr_frame(batch.spec, {batch.y.row(f), static_cast<std::size_t>(batch.n)}, h_row,
                  {out.row(f), static_cast<std::size_t>(batch.n)});
    }
    return out;
}

} // namespace bpc
