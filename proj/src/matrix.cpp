#include "gantsne/matrix.hpp"

#include <cmath>
#include <string>

namespace gantsne {

namespace {

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

} // namespace

bool Matrix::all_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

// Row-major i-k-j product. Each output row is owned by one thread and filled
// in a fixed serial order, so results are bit-identical for any thread count.
Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ, " + shape_str(a) +
                         " * " + shape_str(b));
    }
    const std::size_t n = a.rows(), k_dim = a.cols(), m = b.cols();
    Matrix c(n, m);
    const double* __restrict ap = a.data();
    const double* __restrict bp = b.data();
    double* __restrict cp = c.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        double* crow = cp + static_cast<std::size_t>(i) * m;
        const double* arow = ap + static_cast<std::size_t>(i) * k_dim;
        for (std::size_t k = 0; k < k_dim; ++k) {
            const double aik = arow[k];
            const double* brow = bp + k * m;
            for (std::size_t j = 0; j < m; ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
    return c;
}

// C = A^T * B, shapes: a is k x n, b is k x m, result n x m. Used by the
// backward pass for weight gradients (activations^T * deltas).
Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("matmul_tn: row counts differ, " + shape_str(a) +
                         "^T * " + shape_str(b));
    }
    const std::size_t k_dim = a.rows(), n = a.cols(), m = b.cols();
    Matrix c(n, m);
    const double* __restrict ap = a.data();
    const double* __restrict bp = b.data();
    double* __restrict cp = c.data();
    // Accumulate k-slices in fixed k order; each thread owns a band of output
    // rows so writes never overlap.
#pragma omp parallel
    {
#pragma omp for schedule(static)
        for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
            double* crow = cp + static_cast<std::size_t>(i) * m;
            for (std::size_t k = 0; k < k_dim; ++k) {
                const double aki = ap[k * n + static_cast<std::size_t>(i)];
                const double* brow = bp + k * m;
                for (std::size_t j = 0; j < m; ++j) {
                    crow[j] += aki * brow[j];
                }
            }
        }
    }
    return c;
}

// C = A * B^T, shapes: a is n x k, b is m x k, result n x m. Row-times-row dot
// products, contiguous on both sides.
Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_nt: column counts differ, " + shape_str(a) +
                         " * " + shape_str(b) + "^T");
    }
    const std::size_t n = a.rows(), k_dim = a.cols(), m = b.rows();
    Matrix c(n, m);
    const double* __restrict ap = a.data();
    const double* __restrict bp = b.data();
    double* __restrict cp = c.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const double* arow = ap + static_cast<std::size_t>(i) * k_dim;
        double* crow = cp + static_cast<std::size_t>(i) * m;
        for (std::size_t j = 0; j < m; ++j) {
            const double* brow = bp + j * k_dim;
            double acc = 0.0;
            for (std::size_t k = 0; k < k_dim; ++k) {
                acc += arow[k] * brow[k];
            }
            crow[j] = acc;
        }
    }
    return c;
}

Matrix pairwise_sq_dists(const Matrix& x) {
    if (x.rows() < 2) {
        throw InputError("pairwise_sq_dists: need at least 2 rows, got " +
                         std::to_string(x.rows()));
    }
    const std::size_t n = x.rows(), d = x.cols();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = x.data() + i * d;
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k) acc += row[k] * row[k];
        norms[i] = acc;
    }
    Matrix dists(n, n);
    const double* __restrict xp = x.data();
    double* __restrict dp = dists.data();
    // Upper triangle only; the mirrored entry reuses the identical dot product
    // and the commutative norm sum, so symmetry is exact.
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const std::size_t ui = static_cast<std::size_t>(i);
        const double* xi = xp + ui * d;
        for (std::size_t j = ui + 1; j < n; ++j) {
            const double* xj = xp + j * d;
            double dot = 0.0;
            for (std::size_t k = 0; k < d; ++k) dot += xi[k] * xj[k];
            double v = norms[ui] + norms[j] - 2.0 * dot;
            if (v < 0.0) v = 0.0; // expansion can go slightly negative
            dp[ui * n + j] = v;
            dp[j * n + ui] = v;
        }
        dp[ui * n + ui] = 0.0;
    }
    return dists;
}

} // namespace gantsne
