#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

namespace bpc {

// Dense row-major matrix of doubles. Doubles as the container for LLR
// batches (rows = frames) and for real-valued parity-check relaxations.
struct RealMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    RealMatrix() = default;
    RealMatrix(int r, int c, double fill = 0.0)
        : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, fill) {}

    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

    const double* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }
    double* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }

    std::size_t size() const { return v.size(); }

    bool same_shape(const RealMatrix& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const RealMatrix& o) const {
        return rows == o.rows && cols == o.cols && v == o.v;
    }
};

} // namespace bpc
