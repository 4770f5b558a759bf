#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bdm/errors.hpp"

namespace bdm {

// Dense column-major matrix of doubles. Column-major so per-feature columns
// are contiguous and can be fed straight into the kernels.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double* col(std::size_t j) { return data_.data() + j * rows_; }
    const double* col(std::size_t j) const { return data_.data() + j * rows_; }

    std::span<double> col_span(std::size_t j) { return {col(j), rows_}; }
    std::span<const double> col_span(std::size_t j) const { return {col(j), rows_}; }

    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    // Copy of the rows listed in idx, preserving their order.
    Matrix select_rows(std::span<const std::size_t> idx) const {
        Matrix out(idx.size(), cols_);
        for (std::size_t j = 0; j < cols_; ++j) {
            const double* src = col(j);
            double* dst = out.col(j);
            for (std::size_t k = 0; k < idx.size(); ++k) dst[k] = src[idx[k]];
        }
        return out;
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace bdm
