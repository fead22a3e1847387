#pragma once

#include <cstddef>
#include <vector>

#include "kfs/errors.hpp"

namespace kfs {

// Plain row-major matrix of doubles for data that never enters the
// autodiff graph (raw series, pyramids, window slices).
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(int r, int c, double fill = 0.0) : rows(r), cols(c), v(static_cast<size_t>(r) * c, fill) {}
    Matrix(int r, int c, std::vector<double> data) : rows(r), cols(c), v(std::move(data)) {
        if (v.size() != static_cast<size_t>(r) * c) {
            throw ShapeError("Matrix: data length does not match rows*cols");
        }
    }

    double& at(int r, int c) { return v[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return v[static_cast<size_t>(r) * cols + c]; }

    std::vector<double> column(int c) const {
        std::vector<double> out(static_cast<size_t>(rows));
        for (int r = 0; r < rows; ++r) out[r] = at(r, c);
        return out;
    }

    void set_column(int c, const std::vector<double>& col) {
        for (int r = 0; r < rows; ++r) at(r, c) = col[r];
    }
};

}  // namespace kfs
