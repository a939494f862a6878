#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace edastress {

// Row-major dense matrix; just enough linear algebra for the learners.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* row(std::size_t i) { return data.data() + i * cols; }
    const double* row(std::size_t i) const { return data.data() + i * cols; }

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    Matrix select_rows(std::span<const std::size_t> idx) const {
        Matrix out(idx.size(), cols);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double* src = row(idx[i]);
            double* dst = out.row(i);
            for (std::size_t c = 0; c < cols; ++c) dst[c] = src[c];
        }
        return out;
    }
};

} // namespace edastress
