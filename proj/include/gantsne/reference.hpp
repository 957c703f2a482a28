#pragma once

// Serial reference implementations: straight scalar transcriptions of the
// defining formulas, kept deliberately independent of the OpenMP kernels in
// the main library. Tests compare the two routes; the bench tool times them.

#include <vector>

#include "gantsne/matrix.hpp"

namespace gantsne::ref {

// Triple-loop matrix product.
Matrix matmul(const Matrix& a, const Matrix& b);

// Difference-based squared distances (no norm expansion).
Matrix pairwise_sq_dists(const Matrix& x);

struct ConditionalP {
    Matrix p;
    std::vector<double> sigmas;
};

// Direct Gaussian conditionals with entropy bisection, one scalar loop per
// row, no exp-shift rescaling.
ConditionalP conditional_p(const Matrix& x, double perplexity);

// (p_{j|i} + p_{i|j}) / 2N with floor + renormalize, scalar loops.
Matrix symmetrize_p(const Matrix& conditional);

// Student-t joint affinities, scalar loops.
Matrix joint_q(const Matrix& y);

// Sum over i != j of P log(P/Q), skipping P below 1e-12.
double kl_divergence(const Matrix& p, const Matrix& q);

// Direct evaluation of the KL gradient sum.
Matrix kl_gradient(const Matrix& p, const Matrix& y);

} // namespace gantsne::ref
