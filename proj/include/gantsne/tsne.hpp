#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gantsne/matrix.hpp"

namespace gantsne {

enum class AffinityKind {
    ConditionalP, // rows sum to 1
    JointP,       // symmetric, total sum 1
    JointQ,       // symmetric, total sum 1
};

struct AffinityMatrix {
    Matrix values; // N x N, zero diagonal, entries >= 0
    AffinityKind kind = AffinityKind::ConditionalP;

    std::size_t n() const { return values.rows(); }
};

struct TsneConfig {
    std::size_t out_dims = 2; // 2 or 3
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    double learning_rate = 200.0;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    std::size_t momentum_switch_iter = 250;
    double early_exaggeration = 12.0;
    std::size_t exaggeration_stop_iter = 250;
    std::uint64_t seed = 0;
};

struct Embedding {
    Matrix points;                // N x out_dims
    std::vector<double> kl_trace; // one entry per iteration, unexaggerated P
};

inline constexpr double kAffinityFloor = 1e-12;
inline constexpr double kEntropyTol = 1e-5; // |log2(perplexity) - H| target
inline constexpr std::size_t kMaxBisectSteps = 50;

struct ConditionalResult {
    AffinityMatrix p;           // ConditionalP
    std::vector<double> sigmas; // per-point Gaussian bandwidths
};

// Gaussian conditionals p_{j|i} with per-point sigma_i found by bisection so
// the row entropy matches log2(perplexity) within kEntropyTol. Rows are
// independent, so the search runs in parallel per row.
ConditionalResult conditional_p(const Matrix& x, double perplexity);

// Same, starting from a precomputed squared-distance matrix.
ConditionalResult conditional_p_from_dists(const Matrix& sq_dists, double perplexity);

// P_ij = (p_{j|i} + p_{i|j}) / (2N), off-diagonal entries floored at 1e-12,
// then renormalized to unit total so the sum invariant holds for any input.
AffinityMatrix symmetrize_p(const AffinityMatrix& conditional);

struct JointQResult {
    AffinityMatrix q;  // JointQ
    Matrix numerators; // (1 + |y_i - y_j|^2)^-1 with zero diagonal
};

// Student-t joint affinities over the embedding.
JointQResult joint_q(const Matrix& y);

// Sum over i != j of P log(P/Q), natural log; P entries below the floor are
// skipped. Throws ShapeError on size mismatch.
double kl_divergence(const AffinityMatrix& p, const AffinityMatrix& q);

// dKL/dy_i = 4 sum_j (P_ij - Q_ij)(y_i - y_j)(1 + |y_i - y_j|^2)^-1,
// with Q recomputed from y.
Matrix kl_gradient(const AffinityMatrix& p, const Matrix& y);

// Full exact t-SNE: seeded N(0, 1e-4 I) init, gradient descent with momentum
// (0.5 then 0.8), early exaggeration, per-iteration recentering and KL trace.
// initial_y overrides the seeded init when provided (used by property tests).
Embedding run_tsne(const Matrix& x, const TsneConfig& config,
                   const std::optional<Matrix>& initial_y = std::nullopt);

} // namespace gantsne
