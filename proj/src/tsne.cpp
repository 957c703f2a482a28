#include "gantsne/tsne.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gantsne/errors.hpp"
#include "gantsne/rng.hpp"

namespace gantsne {

namespace {

constexpr double kLn2 = 0.6931471805599453;

// Row entropy (bits) of the Gaussian conditional with precision beta,
// computed against a min-shifted exponential so large beta cannot underflow
// the whole row. Returns the shifted partition sums for reuse.
struct RowEntropy {
    double bits;
    double sum_e;
};

RowEntropy row_entropy(const double* dists, std::size_t n, std::size_t i,
                       double d_min, double beta) {
    double sum_e = 0.0;
    double sum_ed = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double shifted = dists[j] - d_min;
        const double e = std::exp(-beta * shifted);
        sum_e += e;
        sum_ed += e * shifted;
    }
    const double nats = std::log(sum_e) + beta * sum_ed / sum_e;
    return {nats / kLn2, sum_e};
}

// Shared gradient kernel: 4 * sum_j (P - Q)(y_i - y_j) * num_ij, row-parallel
// with a serial inner loop so results do not depend on the thread count.
Matrix gradient_from(const Matrix& p_values, const JointQResult& qr, const Matrix& y) {
    const std::size_t n = y.rows();
    const std::size_t d = y.cols();
    Matrix grad(n, d);
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* yi = y.data() + i * d;
        double* gi = grad.data() + i * d;
        const double* p_row = p_values.data() + i * n;
        const double* q_row = qr.q.values.data() + i * n;
        const double* num_row = qr.numerators.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double coef = 4.0 * (p_row[j] - q_row[j]) * num_row[j];
            const double* yj = y.data() + j * d;
            for (std::size_t k = 0; k < d; ++k) {
                gi[k] += coef * (yi[k] - yj[k]);
            }
        }
    }
    return grad;
}

} // namespace

ConditionalResult conditional_p_from_dists(const Matrix& sq_dists, double perplexity) {
    const std::size_t n = sq_dists.rows();
    if (sq_dists.cols() != n) {
        throw ShapeError("conditional_p: distance matrix is " + std::to_string(n) +
                         "x" + std::to_string(sq_dists.cols()) + ", expected square");
    }
    if (n < 3) {
        throw InputError("conditional_p: needs at least 3 points, got " +
                         std::to_string(n));
    }
    if (!(perplexity > 0.0)) {
        throw InputError("conditional_p: perplexity must be positive");
    }
    if (perplexity >= static_cast<double>(n)) {
        throw InputError("conditional_p: perplexity " + std::to_string(perplexity) +
                         " must be below the point count " + std::to_string(n));
    }
    double max_dist = 0.0;
    for (std::size_t i = 0; i < sq_dists.size(); ++i) {
        max_dist = std::max(max_dist, sq_dists.data()[i]);
    }
    if (max_dist == 0.0) {
        throw InputError("conditional_p: all points coincide, so no Gaussian "
                         "bandwidth can reach the requested perplexity");
    }

    ConditionalResult result;
    result.p.kind = AffinityKind::ConditionalP;
    result.p.values = Matrix(n, n);
    result.sigmas.assign(n, 0.0);
    const double target_bits = std::log2(perplexity);

#pragma omp parallel for schedule(dynamic)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* dists = sq_dists.data() + i * n;
        double d_min = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) d_min = std::min(d_min, dists[j]);
        }

        double beta = 1.0;
        double beta_lo = 0.0;
        double beta_hi = std::numeric_limits<double>::infinity();
        for (std::size_t step = 0; step < kMaxBisectSteps; ++step) {
            const double diff = row_entropy(dists, n, i, d_min, beta).bits - target_bits;
            if (std::fabs(diff) <= kEntropyTol) break;
            if (diff > 0.0) {
                // Too much entropy: narrow the Gaussian.
                beta_lo = beta;
                beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
            } else {
                beta_hi = beta;
                beta = 0.5 * (beta + beta_lo);
            }
        }

        const double sum_e = row_entropy(dists, n, i, d_min, beta).sum_e;
        double* row = result.p.values.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            row[j] = (j == i) ? 0.0 : std::exp(-beta * (dists[j] - d_min)) / sum_e;
        }
        result.sigmas[i] = std::sqrt(0.5 / beta);
    }
    return result;
}

ConditionalResult conditional_p(const Matrix& x, double perplexity) {
    return conditional_p_from_dists(pairwise_sq_dists(x), perplexity);
}

AffinityMatrix symmetrize_p(const AffinityMatrix& conditional) {
    if (conditional.kind != AffinityKind::ConditionalP) {
        throw ContractError("symmetrize_p: input must be a conditional affinity matrix");
    }
    const std::size_t n = conditional.n();
    const Matrix& c = conditional.values;
    AffinityMatrix joint;
    joint.kind = AffinityKind::JointP;
    joint.values = Matrix(n, n);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double v = (c(i, j) + c(j, i)) * scale;
            if (v < kAffinityFloor) v = kAffinityFloor;
            joint.values(i, j) = v;
            joint.values(j, i) = v;
            total += 2.0 * v;
        }
    }
    // Flooring can push the total above 1; renormalize so the sum invariant
    // holds for any input while every entry stays within a hair of the floor.
    const double inv_total = 1.0 / total;
    for (std::size_t i = 0; i < joint.values.size(); ++i) {
        joint.values.data()[i] *= inv_total;
    }
    return joint;
}

JointQResult joint_q(const Matrix& y) {
    const std::size_t n = y.rows();
    const std::size_t d = y.cols();
    if (n < 2) {
        throw InputError("joint_q: needs at least 2 points, got " + std::to_string(n));
    }
    JointQResult result;
    result.numerators = Matrix(n, n);
    std::vector<double> row_sums(n, 0.0);

#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* yi = y.data() + i * d;
        double* num_row = result.numerators.data() + i * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double* yj = y.data() + j * d;
            double dist = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = yi[k] - yj[k];
                dist += diff * diff;
            }
            const double numerator = 1.0 / (1.0 + dist);
            num_row[j] = numerator;
            acc += numerator;
        }
        row_sums[i] = acc;
    }

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += row_sums[i];
    const double denom = std::max(total, kAffinityFloor);

    result.q.kind = AffinityKind::JointQ;
    result.q.values = Matrix(n, n);
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* num_row = result.numerators.data() + i * n;
        double* q_row = result.q.values.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            q_row[j] = num_row[j] / denom;
        }
    }
    return result;
}

double kl_divergence(const AffinityMatrix& p, const AffinityMatrix& q) {
    if (p.kind != AffinityKind::JointP || q.kind != AffinityKind::JointQ) {
        throw ContractError("kl_divergence: expects a joint P and a joint Q");
    }
    const std::size_t n = p.n();
    if (q.n() != n) {
        throw ShapeError("kl_divergence: P is " + std::to_string(n) + "x" +
                         std::to_string(n) + " but Q is " + std::to_string(q.n()) +
                         "x" + std::to_string(q.n()));
    }
    std::vector<double> row_sums(n, 0.0);
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const std::size_t i = static_cast<std::size_t>(ii);
        const double* p_row = p.values.data() + i * n;
        const double* q_row = q.values.data() + i * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double pv = p_row[j];
            if (pv < kAffinityFloor) continue;
            acc += pv * std::log(pv / q_row[j]);
        }
        row_sums[i] = acc;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += row_sums[i];
    return total;
}

Matrix kl_gradient(const AffinityMatrix& p, const Matrix& y) {
    if (p.kind != AffinityKind::JointP) {
        throw ContractError("kl_gradient: expects a joint P");
    }
    if (p.n() != y.rows()) {
        throw ShapeError("kl_gradient: P has " + std::to_string(p.n()) +
                         " points but y has " + std::to_string(y.rows()) + " rows");
    }
    return gradient_from(p.values, joint_q(y), y);
}

Embedding run_tsne(const Matrix& x, const TsneConfig& config,
                   const std::optional<Matrix>& initial_y) {
    const std::size_t n = x.rows();
    if (n < 3) {
        throw InputError("run_tsne: needs at least 3 points, got " + std::to_string(n));
    }
    if (config.out_dims != 2 && config.out_dims != 3) {
        throw InputError("run_tsne: out_dims must be 2 or 3, got " +
                         std::to_string(config.out_dims));
    }
    if (!(config.perplexity > 1.0)) {
        throw InputError("run_tsne: perplexity must exceed 1");
    }
    if (config.perplexity >= static_cast<double>(n)) {
        throw InputError("run_tsne: perplexity " + std::to_string(config.perplexity) +
                         " must be below the point count " + std::to_string(n));
    }

    const AffinityMatrix joint = symmetrize_p(conditional_p(x, config.perplexity).p);
    Matrix p_exaggerated = joint.values;
    for (std::size_t i = 0; i < p_exaggerated.size(); ++i) {
        p_exaggerated.data()[i] *= config.early_exaggeration;
    }

    Matrix y;
    if (initial_y.has_value()) {
        if (initial_y->rows() != n || initial_y->cols() != config.out_dims) {
            throw ShapeError("run_tsne: initial_y is " + std::to_string(initial_y->rows()) +
                             "x" + std::to_string(initial_y->cols()) + ", expected " +
                             std::to_string(n) + "x" + std::to_string(config.out_dims));
        }
        y = *initial_y;
    } else {
        Rng rng(config.seed);
        y = rand_normal(rng, n, config.out_dims);
        for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] *= 1e-2;
    }

    Matrix velocity(n, config.out_dims);
    Embedding embedding;
    embedding.kl_trace.reserve(config.iterations);

    JointQResult qr = joint_q(y);
    for (std::size_t iter = 0; iter < config.iterations; ++iter) {
        const bool exaggerating = iter < config.exaggeration_stop_iter;
        const Matrix& p_used = exaggerating ? p_exaggerated : joint.values;
        const Matrix grad = gradient_from(p_used, qr, y);

        const double momentum = (iter < config.momentum_switch_iter)
                                    ? config.initial_momentum
                                    : config.final_momentum;
        for (std::size_t i = 0; i < y.size(); ++i) {
            velocity.data()[i] = momentum * velocity.data()[i] -
                                 config.learning_rate * grad.data()[i];
            y.data()[i] += velocity.data()[i];
        }

        for (std::size_t k = 0; k < config.out_dims; ++k) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += y(i, k);
            mean /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) y(i, k) -= mean;
        }

        if (!y.all_finite()) {
            throw NumericError("run_tsne: non-finite coordinate at iteration " +
                               std::to_string(iter));
        }

        qr = joint_q(y);
        embedding.kl_trace.push_back(kl_divergence(joint, qr.q));
    }

    embedding.points = std::move(y);
    return embedding;
}

} // namespace gantsne
