#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace bpc {

// splitmix64 step; also used as a mixing function for substream keys.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t mix_key(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
    return splitmix64(s);
}

// Fixed substream tags. Every random draw in the project flows through a
// (seed, stream, index) key, so results never depend on thread count or
// on the order independent components consume randomness.
namespace stream {
inline constexpr std::uint64_t kChannel = 0x6368616e6e656cULL;
inline constexpr std::uint64_t kMessage = 0x6d65737361676573ULL;
inline constexpr std::uint64_t kSnrDraw = 0x736e725f64726177ULL;
inline constexpr std::uint64_t kHTilde = 0x685f74696c6465ULL;
inline constexpr std::uint64_t kCodeInit = 0x636f64655f696e69ULL;
inline constexpr std::uint64_t kTrainData = 0x747261696e5f6461ULL;
inline constexpr std::uint64_t kEval = 0x6576616c5f626572ULL;
inline constexpr std::uint64_t kSweep = 0x73776565705f6964ULL;
} // namespace stream

// xoshiro256** with splitmix-expanded seeding. Self-contained so that
// streams are bit-identical across platforms and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) { seed_state(seed); }

    // Independent substream for (seed, stream, index); used one-per-frame.
    Rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
        seed_state(mix_key(mix_key(seed, stream), index));
    }

    std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Standard normal via Box-Muller; the spare value is cached, so the
    // draw count per stream is fixed and reproducible.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Rayleigh draw with scale parameter 1: density h*exp(-h^2/2), so
    // E[h^2] = 2.
    double rayleigh() {
        const double u = 1.0 - uniform(); // (0, 1]
        return std::sqrt(-2.0 * std::log(u));
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    void seed_state(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : s_) w = splitmix64(s);
    }

    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace bpc
