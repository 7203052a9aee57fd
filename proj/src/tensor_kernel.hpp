#pragma once

// Internal dense BP kernel shared by the decoder forward pass and the
// gradient tape. Not installed; include from src/ only.

#include <cmath>
#include <span>
#include <vector>

#include "bpc/decoder.hpp"
#include "bpc/real_matrix.hpp"

namespace bpc::detail {

// Shape- and sparsity-independent facts about H, computed once per call
// and shared across frames.
struct TensorPlan {
    const RealMatrix* h = nullptr;
    int m = 0, n = 0;
    bool binary = true;            // every entry exactly 0.0 or 1.0
    std::vector<int> row_degree;   // nonzero entries per row

    static TensorPlan build(const RealMatrix& h);
};

// Per-iteration state recorded for the adjoint. Slices are [t*m*n ..).
struct TensorTape {
    int T = 0, m = 0, n = 0;
    std::vector<double> q;     // T*m*n variable-to-check messages
    std::vector<double> r;     // T*m*n check-to-variable messages
    std::vector<double> thd;   // T*m*n tanh(q/2) (check-update denominators)
    std::vector<double> term;  // T*m*n masked product factors
    std::vector<double> prod;  // T*m  full row products
    std::vector<double> out;   // T*n  per-iteration soft outputs

    void resize(int T_, int m_, int n_);
};

// Scratch buffers reused across frames by one thread.
struct TensorScratch {
    std::vector<double> q, r, thd, term;
    std::vector<double> colsum, pre, suf;

    void resize(int m, int n) {
        q.resize(static_cast<std::size_t>(m) * n);
        r.resize(static_cast<std::size_t>(m) * n);
        thd.resize(static_cast<std::size_t>(m) * n);
        term.resize(static_cast<std::size_t>(m) * n);
        colsum.resize(n);
        pre.resize(n + 1);
        suf.resize(n + 1);
    }
};

// One frame of the masked dense BP recurrence. Writes the final soft
// output into o_final (length n); records per-iteration outputs into
// per_iter (T rows of n) when non-null; records the full tape when
// tape is non-null.
void tensor_bp_frame(std::span<const double> llr, const TensorPlan& plan, const BpConfig& cfg,
                     TensorScratch& scratch, std::span<double> o_final, TensorTape* tape,
                     std::vector<double>* per_iter);

} // namespace bpc::detail
