#include "gantsne/rng.hpp"

#include <cmath>
#include <numbers>

namespace gantsne {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& word : state_) word = splitmix64(s);
    // xoshiro must not start from the all-zero state
    if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
        state_[0] = 1;
    }
}

std::uint64_t Rng::next_u64() {
    // xoshiro256**
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    // rejection sampling over the top of the range removes modulo bias
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        const std::uint64_t x = next_u64();
        if (x >= threshold) return x % bound;
    }
}

std::pair<double, double> Rng::next_normal_pair() {
    // Box-Muller; u1 is shifted into (0, 1] so the log stays finite.
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return {r * std::cos(theta), r * std::sin(theta)};
}

void Rng::shuffle(std::vector<std::size_t>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
        const std::size_t j = below(i + 1);
        std::swap(v[i], v[j]);
    }
}

Matrix rand_normal(Rng& rng, std::size_t rows, std::size_t cols) {
    if (rows < 1 || cols < 1) {
        throw InputError("rand_normal: shape must be at least 1x1");
    }
    Matrix m(rows, cols);
    double* p = m.data();
    const std::size_t total = rows * cols;
    std::size_t i = 0;
    for (; i + 1 < total; i += 2) {
        const auto [a, b] = rng.next_normal_pair();
        p[i] = a;
        p[i + 1] = b;
    }
    if (i < total) {
        p[i] = rng.next_normal_pair().first; // odd tail discards the spare
    }
    return m;
}

} // namespace gantsne
