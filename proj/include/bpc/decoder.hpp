#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bpc/errors.hpp"
#include "bpc/parity_check.hpp"
#include "bpc/real_matrix.hpp"

namespace bpc {

enum class BpVariant { SumProduct, MinSum };

std::string to_string(BpVariant v);
BpVariant bp_variant_from_string(const std::string& s);

struct BpConfig {
    int iterations = 5;
    BpVariant variant = BpVariant::SumProduct;
    double clamp_eps = 1e-7; // clamp on the check product before atanh
    std::optional<double> llr_clip; // optional bound on |messages|
    bool emit_per_iteration = false;

    void validate() const;
};

struct DecodeResult {
    int frames = 0;
    int n = 0;
    RealMatrix soft;                        // output LLRs, log P(1)/P(0)
    std::vector<std::uint8_t> hard;         // frames x n
    std::vector<RealMatrix> per_iteration;  // soft outputs for t = 1..T when emitted
};

// bit = 1 iff soft > 0 (ties round to 0).
std::vector<std::uint8_t> hard_decision(std::span<const double> soft);

// Dense masked-message BP over a real-valued parity relaxation. H entries
// live in [0,1]; binary entries give classical sum-product, fractional
// entries keep the kernel differentiable for the gradient path. Parallel
// over frames.
DecodeResult bp_decode(const RealMatrix& llr, const RealMatrix& h, const BpConfig& cfg);

// Classical sparse message passing over the Tanner graph edges. Reference
// implementation for bp_decode and the production decoder for binary H.
DecodeResult edge_bp_decode(const RealMatrix& llr, const ParityCheck& code, const BpConfig& cfg);

// Min-sum check update: excluded sign product times excluded minimum
// magnitude, with the same sign-convention parity correction as the
// sum-product update; schedule and variable update identical to
// edge_bp_decode.
DecodeResult min_sum_decode(const RealMatrix& llr, const ParityCheck& code, const BpConfig& cfg);

// Sparse adjacency shared by the edge decoders and the evaluator.
struct TannerGraph {
    int m = 0, n = 0, edges = 0;
    std::vector<int> row_ptr;  // size m+1
    std::vector<int> row_col;  // column of each edge, grouped by row
    std::vector<int> col_ptr;  // size n+1
    std::vector<int> col_edge; // edge ids incident to each column

    static TannerGraph build(const BitMatrix& h);
};

// Single-frame kernels (serial); the batch entry points parallelize over
// frames on top of these.
void edge_bp_frame(const TannerGraph& g, std::span<const double> llr, const BpConfig& cfg,
                   std::span<double> soft_out, std::vector<double>* per_iter_flat);
void min_sum_frame(const TannerGraph& g, std::span<const double> llr, const BpConfig& cfg,
                   std::span<double> soft_out, std::vector<double>* per_iter_flat);

} // namespace bpc
