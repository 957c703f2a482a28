#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gantsne/matrix.hpp"

namespace gantsne {

// xoshiro256** seeded through splitmix64. Fixed, documented algorithm rather
// than the platform default so that identical seeds give bit-identical streams
// on every platform and standard-library version. Normal deviates come from
// Box-Muller on the raw 64-bit stream, which keeps them reproducible too
// (std::normal_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    // Rebuild from serialized state (checkpoint restore).
    Rng(std::uint64_t seed, const std::array<std::uint64_t, 4>& state)
        : seed_(seed), state_(state) {}

    std::uint64_t seed() const { return seed_; }
    const std::array<std::uint64_t, 4>& state() const { return state_; }

    std::uint64_t next_u64();

    // Uniform double in [0, 1).
    double next_unit();

    // Uniform integer in [0, bound). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t bound);

    // Standard normal pair via Box-Muller; first of the pair.
    // Draws exactly two 64-bit words per call.
    std::pair<double, double> next_normal_pair();

    // Fisher-Yates shuffle of an index vector.
    void shuffle(std::vector<std::size_t>& v);

    friend bool operator==(const Rng& a, const Rng& b) {
        return a.seed_ == b.seed_ && a.state_ == b.state_;
    }

private:
    std::uint64_t seed_ = 0;
    std::array<std::uint64_t, 4> state_{};
};

// Matrix of i.i.d. standard normal samples, filled row-major from rng.
Matrix rand_normal(Rng& rng, std::size_t rows, std::size_t cols);

} // namespace gantsne
