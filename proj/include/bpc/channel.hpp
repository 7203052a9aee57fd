#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "bpc/errors.hpp"
#include "bpc/real_matrix.hpp"
#include "bpc/rng.hpp"

namespace bpc {

enum class ChannelFamily { Awgn, RayleighFading, Bursty };

std::string to_string(ChannelFamily f);
ChannelFamily channel_family_from_string(const std::string& s);

struct ChannelSpec {
    ChannelFamily family = ChannelFamily::Awgn;
    double ebn0_db = 0.0;
    double rate = 0.5;
    // Bursty mixture: an extra N(0, (burst_scale*sigma)^2) hit per symbol
    // with probability rho.
    double rho = 0.1;
    double burst_scale = std::numbers::sqrt2;
    // Off by default: the decoder sees the plain AWGN LLR even on the
    // bursty channel (mismatched decoding). On: exact mixture LLR.
    bool bursty_exact_llr = false;

    double sigma() const;
};

// sigma = (2 * rate * 10^(ebn0/10))^(-1/2); BPSK with unit symbol energy.
double sigma_from_ebn0(double ebn0_db, double rate);

// BPSK: bit 0 -> +1, bit 1 -> -1.
std::vector<double> modulate(std::span<const std::uint8_t> bits);

struct ReceivedBatch {
    int frames = 0;
    int n = 0;
    RealMatrix y;     // frames x n channel outputs
    RealMatrix h;     // frames x n fading coefficients; empty unless fading
    ChannelSpec spec;
};

// Transmits one modulated codeword over `frames` independent channel
// realizations. Fading coefficients are Rayleigh with scale parameter 1
// and ideal CSI. Frame f uses the (seed, kChannel, first_frame + f)
// substream, so output is bit-identical for any thread count.
ReceivedBatch transmit(std::span<const double> symbols, const ChannelSpec& spec,
                       std::uint64_t seed, int frames, std::uint64_t first_frame = 0);

// Single-frame kernel used by transmit and by the evaluator (which draws
// message bits from the same per-frame stream first). h_out may be empty
// for non-fading channels.
void transmit_frame(std::span<const double> symbols, const ChannelSpec& spec, Rng& rng,
                    std::span<double> y_out, std::span<double> h_out);

// LLR with the log P(1)/P(0) convention: AWGN/bursty L = -2y/sigma^2,
// fading with ideal CSI L = -2 h y / sigma^2. Bursty with the exact
// mixture flag evaluates the two-component likelihood instead.
RealMatrix llr(const ReceivedBatch& batch);

void llr_frame(const ChannelSpec& spec, std::span<const double> y, std::span<const double> h,
               std::span<double> out);

} // namespace bpc
