#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lsq {

// Dense row-major sample matrix (rows = samples, cols = features).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data) : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows * cols) throw std::invalid_argument("Matrix: data size does not match shape");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return rows_ == 0; }

    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    void append_row(std::span<const double> values) {
        if (values.size() != cols_) throw std::invalid_argument("Matrix: row width mismatch");
        data_.insert(data_.end(), values.begin(), values.end());
        ++rows_;
    }

    // New matrix with the given rows / columns, in the order given.
    Matrix select_rows(const std::vector<std::size_t>& idx) const {
        Matrix out(0, cols_);
        out.data_.reserve(idx.size() * cols_);
        for (std::size_t r : idx) out.append_row(row(r));
        return out;
    }
    Matrix select_cols(const std::vector<std::size_t>& idx) const {
        Matrix out(rows_, idx.size());
        for (std::size_t r = 0; r < rows_; ++r) {
            for (std::size_t j = 0; j < idx.size(); ++j) out(r, j) = (*this)(r, idx[j]);
        }
        return out;
    }

    const std::vector<double>& data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace lsq
