#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpc/bit_matrix.hpp"

namespace bpc {

// A binary linear block code given by its (n-k) x n parity-check matrix.
struct ParityCheck {
    BitMatrix h;

    int n() const { return h.cols(); }
    int k() const { return h.cols() - h.rows(); }
    double rate() const { return static_cast<double>(k()) / n(); }
};

// Validates 0 < k < n. All-zero columns are allowed (the optimizer may
// disconnect a variable); callers that care can check zero_columns().
ParityCheck make_parity_check(BitMatrix h);

std::vector<int> zero_columns(const ParityCheck& code);

enum class GirthKind { Finite, Acyclic, AtLeastCap };

struct CodeStats {
    double density = 0.0; // ones / (rows * cols)
    GirthKind girth_kind = GirthKind::Acyclic;
    int girth = 0;     // valid when Finite; equals the cap when AtLeastCap
    int girth_cap = 0; // 2 * min(n, n-k)
    std::vector<int> row_degrees;
    std::vector<int> col_degrees;
};

// Parses either MacKay alist text or the plain dense format
// ("n m" header then m rows of n 0/1 entries); the two are
// distinguished by the token shape.
ParityCheck load_alist(const std::string& text);

// Canonical alist emission: unpadded 1-indexed adjacency, deterministic.
std::string save_alist(const ParityCheck& code);

// H = [I_(n-k) | P] with P ~ Bernoulli(p) from the seeded stream.
ParityCheck random_systematic(int n, int k, double p, std::uint64_t seed);

CodeStats stats(const ParityCheck& code);

// 100 * (ones(base) - ones(learned)) / ones(base).
double sparsity_delta(const ParityCheck& base, const ParityCheck& learned);

// File helpers used by the CLI and tests.
ParityCheck load_code_file(const std::string& path);
void save_code_file(const ParityCheck& code, const std::string& path);

// FNV-1a over dimensions and bits; used for run manifests.
std::uint64_t code_fingerprint(const ParityCheck& code);

} // namespace bpc
