#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpc/channel.hpp"
#include "bpc/decoder.hpp"
#include "bpc/parity_check.hpp"

namespace bpc {

struct StopRule {
    std::uint64_t min_frames = 100000;
    std::uint64_t min_frame_errors = 50;
    std::uint64_t max_frames = 10000000;
    // Frames are simulated and committed in batches of this size; the
    // stopping rule is only checked at batch boundaries, which keeps
    // counts independent of scheduling.
    std::uint64_t batch_frames = 10000;
};

enum class EvalMode { ZeroCodeword, RandomCodewords };

struct EvalRow {
    std::string channel;
    double snr_db = 0.0;
    std::string variant;
    int iters = 0;
    std::uint64_t frames = 0;
    std::uint64_t bit_errors = 0;
    std::uint64_t frame_errors = 0;
    double ber = 0.0;
    double fer = 0.0;
    double neg_ln_ber = 0.0; // +inf when no bit errors were seen
    bool budget_exhausted = false;
    // Sum of squared per-frame bit-error counts, for clustered error bars.
    std::uint64_t bit_errors_sq = 0;
};

struct EvalReport {
    std::vector<EvalRow> rows;
};

// Simulates each channel spec until the stopping rule holds (or the frame
// budget runs out). ZeroCodeword transmits the modulated all-zero word;
// RandomCodewords draws a fresh message per frame and encodes it, which
// requires a full-rank parity check. Errors are counted over all codeword
// bits. Frame f of spec s draws from the (seed, s, f) substream, so
// counts are identical for any worker count.
EvalReport monte_carlo(const ParityCheck& code, const std::vector<ChannelSpec>& specs,
                       const BpConfig& cfg, const StopRule& stop, EvalMode mode,
                       std::uint64_t seed);

struct GainStats {
    double mean_db = 0.0;
    double std_db = 0.0;
    double min_db = 0.0;
    double max_db = 0.0;
};

// Horizontal distance between two BER curves: log10(BER) is interpolated
// piecewise-linearly against SNR, and the gain at a BER level is
// snr_base(level) - snr_ours(level), sampled at 50 levels across the
// overlapping BER range. Throws NoOverlap when the curves do not share a
// usable range.
GainStats db_gain(const EvalReport& base, const EvalReport& ours);

// CSV columns: channel,snr_db,variant,iters,frames,bit_errors,
// frame_errors,ber,fer,neg_ln_ber. JSON carries the full row including
// the stopping flag and squared error sums.
std::string report_to_csv(const EvalReport& report);
EvalReport report_from_csv(const std::string& text);
std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);

// Wilson score interval for an error count out of a trial count.
std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t trials,
                                          double z = 1.96);

// Clustered (per-frame) standard error of the BER estimate; frames are
// independent, bits within a frame are not.
double ber_standard_error(const EvalRow& row, int n);

} // namespace bpc
