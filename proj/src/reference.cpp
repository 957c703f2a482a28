#include "gantsne/reference.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gantsne/errors.hpp"

namespace gantsne::ref {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("ref::matmul: " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " times " + std::to_string(b.rows()) +
                         "x" + std::to_string(b.cols()));
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) {
                acc += a(i, k) * b(k, j);
            }
            c(i, j) = acc;
        }
    }
    return c;
}

Matrix pairwise_sq_dists(const Matrix& x) {
    const std::size_t n = x.rows();
    if (n < 2) {
        throw InputError("ref::pairwise_sq_dists: needs at least 2 rows");
    }
    Matrix d(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double acc = 0.0;
            for (std::size_t k = 0; k < x.cols(); ++k) {
                const double diff = x(i, k) - x(j, k);
                acc += diff * diff;
            }
            d(i, j) = acc;
        }
    }
    return d;
}

ConditionalP conditional_p(const Matrix& x, double perplexity) {
    const Matrix dists = ref::pairwise_sq_dists(x);
    const std::size_t n = x.rows();
    const double target = std::log2(perplexity);

    ConditionalP out;
    out.p = Matrix(n, n);
    out.sigmas.assign(n, 0.0);

    for (std::size_t i = 0; i < n; ++i) {
        double beta = 1.0;
        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        for (std::size_t step = 0; step < 50; ++step) {
            double sum = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j != i) sum += std::exp(-beta * dists(i, j));
            }
            double entropy_bits = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double p = std::exp(-beta * dists(i, j)) / sum;
                if (p > 0.0) entropy_bits -= p * std::log2(p);
            }
            const double diff = entropy_bits - target;
            if (std::fabs(diff) <= 1e-5) break;
            if (diff > 0.0) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) sum += std::exp(-beta * dists(i, j));
        }
        for (std::size_t j = 0; j < n; ++j) {
            out.p(i, j) = (j == i) ? 0.0 : std::exp(-beta * dists(i, j)) / sum;
        }
        out.sigmas[i] = std::sqrt(0.5 / beta);
    }
    return out;
}

Matrix symmetrize_p(const Matrix& conditional) {
    const std::size_t n = conditional.rows();
    Matrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double v = (conditional(i, j) + conditional(j, i)) /
                       (2.0 * static_cast<double>(n));
            if (v < 1e-12) v = 1e-12;
            p(i, j) = v;
        }
    }
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += p.data()[i];
    for (std::size_t i = 0; i < p.size(); ++i) p.data()[i] /= total;
    return p;
}

Matrix joint_q(const Matrix& y) {
    const std::size_t n = y.rows();
    Matrix q(n, n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double dist = 0.0;
            for (std::size_t k = 0; k < y.cols(); ++k) {
                const double diff = y(i, k) - y(j, k);
                dist += diff * diff;
            }
            q(i, j) = 1.0 / (1.0 + dist);
            total += q(i, j);
        }
    }
    for (std::size_t i = 0; i < q.size(); ++i) q.data()[i] /= total;
    return q;
}

double kl_divergence(const Matrix& p, const Matrix& q) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j) {
            if (i == j) continue;
            const double pv = p(i, j);
            if (pv < 1e-12) continue;
            total += pv * std::log(pv / q(i, j));
        }
    }
    return total;
}

Matrix kl_gradient(const Matrix& p, const Matrix& y) {
    const std::size_t n = y.rows();
    const std::size_t d = y.cols();
    const Matrix q = joint_q(y);
    Matrix grad(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            double dist = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = y(i, k) - y(j, k);
                dist += diff * diff;
            }
            const double coef = 4.0 * (p(i, j) - q(i, j)) / (1.0 + dist);
            for (std::size_t k = 0; k < d; ++k) {
                grad(i, k) += coef * (y(i, k) - y(j, k));
            }
        }
    }
    return grad;
}

} // namespace gantsne::ref
