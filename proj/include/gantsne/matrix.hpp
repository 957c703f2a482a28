#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gantsne/errors.hpp"

namespace gantsne {

// Dense row-major matrix of doubles. The universal numeric carrier: images,
// weights, noise batches, affinities and embeddings are all Matrix values.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    bool all_finite() const;

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C = A * B. Throws ShapeError naming both shapes when a.cols != b.rows.
// Parallelized over output rows; each element is a serial dot product, so the
// result is identical for any thread count.
Matrix matmul(const Matrix& a, const Matrix& b);

// C = A^T * B without materializing the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// C = A * B^T without materializing the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// Symmetric N x N matrix of squared Euclidean distances between rows of x.
// Uses the |a|^2 + |b|^2 - 2 a.b expansion; tiny negative results are clamped
// to zero. Zero diagonal and exact symmetry by construction.
Matrix pairwise_sq_dists(const Matrix& x);

} // namespace gantsne
