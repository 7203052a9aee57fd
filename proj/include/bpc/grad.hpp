#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "bpc/bit_matrix.hpp"
#include "bpc/decoder.hpp"
#include "bpc/real_matrix.hpp"

namespace bpc {

enum class LossMode { FinalIteration, SummedIterations };

std::string to_string(LossMode m);
LossMode loss_mode_from_string(const std::string& s);

struct LossConfig {
    BpConfig bp;
    LossMode loss_mode = LossMode::FinalIteration;
    // When set, gradients are evaluated at the soft relaxation h_tilde
    // instead of the binary matrix: zeros become +-eps with random sign.
    std::optional<double> soft_h_eps;
    std::uint64_t seed = 0; // sign draws for h_tilde

    void validate() const;
};

// bin(u) = (1 - sign(u)) / 2 with sign(0) := +1, so exact zeros map to 0.
BitMatrix bin(const RealMatrix& omega);

// Straight-through mask: -0.5 where |omega| <= 1 (boundary included), 0
// elsewhere.
RealMatrix ste_mask(const RealMatrix& omega);

RealMatrix to_real(const BitMatrix& bits);

// Soft relaxation of a binary matrix: ones stay 1, zeros become
// (-1)^z * eps with z ~ Bernoulli(1/2) drawn from the seeded stream.
RealMatrix h_tilde(const BitMatrix& h, double eps, std::uint64_t seed);

// Binary cross-entropy of the decoder output against the all-zero
// codeword: mean over frames of sum_v softplus(o_v), over the final
// iteration's output or summed over all iterations. Assumes the LLR batch
// was generated under the zero codeword. Binary matrices route through
// the sparse edge decoder; fractional ones through the dense kernel.
double decode_loss(const RealMatrix& llr, const RealMatrix& h, const LossConfig& cfg);

// Exact reverse-mode derivative of the dense-kernel loss with respect to
// H. Accumulation over frames uses fixed-size blocks reduced in index
// order, so the result is bit-identical for any thread count.
RealMatrix grad_wrt_h(const RealMatrix& llr, const RealMatrix& h, const LossConfig& cfg);

// Same pass returning the (dense-kernel) loss alongside the gradient.
std::pair<double, RealMatrix> loss_and_grad_wrt_h(const RealMatrix& llr, const RealMatrix& h,
                                                  const LossConfig& cfg);

// Chain rule through bin: grad_wrt_h evaluated at bin(omega) (or at
// h_tilde when soft_h_eps is set), times the straight-through mask.
RealMatrix grad_wrt_omega(const RealMatrix& llr, const RealMatrix& omega, const LossConfig& cfg);

double softplus(double x);

} // namespace bpc
