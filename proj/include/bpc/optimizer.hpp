#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bpc/channel.hpp"
#include "bpc/eval.hpp"
#include "bpc/grad.hpp"
#include "bpc/parity_check.hpp"
#include "bpc/real_matrix.hpp"

namespace bpc {

struct TrainConfig {
    int max_iters = 20;
    int batch_size = 200000;
    std::vector<double> snr_set = {3, 4, 5, 6, 7};
    int grid_limit = 50;
    int bp_train_iters = 5;
    LossMode loss_mode = LossMode::FinalIteration;
    ChannelFamily channel = ChannelFamily::Awgn;
    bool syndrome_filter = true;
    bool systematic_mask = false;
    double l1_lambda = 0.0;
    std::optional<double> soft_h_eps;
    bool rank_guard = true;
    std::uint64_t seed = 1;

    void validate() const;
};

TrainConfig train_config_from_json(const std::string& text);
std::string to_json(const TrainConfig& cfg);

struct TraceRow {
    int iter = 0;
    double loss = 0.0;          // accepted objective value on this iteration's batch
    double baseline_loss = 0.0; // objective at lambda = 0 on the same batch
    int lambda_index = 0;       // 0 = baseline (no step), 1.. = candidate rank
    double lambda = 0.0;
    int flips = 0;          // entries of bin(omega) changed by the step
    double density = 0.0;
    int rank = 0;
    double wall_time_s = 0.0;
    int rank_skipped = 0;   // candidates rejected by the rank guard
};

struct TrainTrace {
    std::vector<TraceRow> rows;
    std::string to_csv() const;
};

// Zero-codeword LLR batch at a per-micro-batch SNR drawn uniformly from
// snr_set. With the syndrome filter on, frames whose channel hard
// decision already satisfies every check are rejected and regenerated;
// acceptance below 1e-4 raises FilterStarvation.
RealMatrix sample_training_batch(const ParityCheck& current, const TrainConfig& cfg,
                                 std::uint64_t iteration);

// Step sizes at which an entry of omega crosses zero: s = omega/g for
// g != 0, kept when strictly positive, deduplicated, ascending, truncated
// to grid_limit. Empty output means no step can flip any sign.
std::vector<double> candidate_steps(const RealMatrix& omega, const RealMatrix& g, int grid_limit);

struct LineSearchResult {
    double lambda = 0.0;
    double loss = 0.0;          // objective at the chosen step
    double baseline_loss = 0.0; // objective at lambda = 0
    RealMatrix omega_next;
    int lambda_index = 0; // 0 = baseline
    int flips = 0;
    int rank_skipped = 0;
};

// Evaluates the objective at bin(omega - lambda*(1+1e-6)*g) for the
// baseline lambda=0 and every candidate, returning the arg-min. The
// (1+1e-6) factor guarantees the targeted entries actually cross zero.
// With the rank guard on, candidates whose binarization loses rank are
// skipped.
LineSearchResult line_search(const RealMatrix& omega, const RealMatrix& g,
                             const RealMatrix& llr_batch, const TrainConfig& cfg);

struct OptimizeResult {
    ParityCheck code;
    TrainTrace trace;
};

// The full design loop: sample batch, gradient through the straight-
// through estimator, binary line search; stops when no candidate beats
// the baseline or after max_iters.
OptimizeResult optimize(const ParityCheck& h0, const TrainConfig& cfg);

struct SweepGrid {
    std::vector<double> snr_lower_bounds = {3, 4, 5};
    std::vector<bool> syndrome_filter = {true, false};
    std::vector<double> soft_h_eps = {0.0, 1e-7}; // 0 disables
    int subset_size = 15;
    std::vector<double> eval_snrs = {3, 4, 5, 6, 7};
    std::uint64_t eval_min_frames = 100000;
    std::uint64_t eval_min_errors = 50;
    std::uint64_t eval_max_frames = 10000000;
    int eval_iters = 5;
};

SweepGrid sweep_grid_from_json(const std::string& text);

struct SweepEntry {
    TrainConfig cfg;
    ParityCheck code;
    double mean_ber = 0.0;
    EvalReport report;
};

// Runs optimize over a random subset (of size <= subset_size) of the
// hyperparameter product, evaluates each learned code on the validation
// SNR range, and ranks by ascending mean BER.
std::vector<SweepEntry> sweep(const ParityCheck& h0, const TrainConfig& base,
                              const SweepGrid& grid);

} // namespace bpc
