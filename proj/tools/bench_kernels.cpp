// Times the OpenMP kernels against the serial reference implementations and
// cross-checks their outputs. Exits nonzero if any pair disagrees beyond
// floating-point reassociation noise.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "gantsne/matrix.hpp"
#include "gantsne/reference.hpp"
#include "gantsne/rng.hpp"
#include "gantsne/tsne.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace {

using gantsne::Matrix;

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
        .count();
}

double max_rel_diff(const Matrix& a, const Matrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = std::fabs(a.data()[i] - b.data()[i]);
        const double scale = std::max({std::fabs(a.data()[i]), std::fabs(b.data()[i]), 1.0});
        worst = std::max(worst, diff / scale);
    }
    return worst;
}

bool report(const char* name, double serial_ms, double parallel_ms, double diff,
            double tol) {
    const bool ok = diff <= tol;
    std::printf("%-18s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   "
                "max rel diff %.2e   %s\n",
                name, serial_ms, parallel_ms,
                parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0, diff,
                ok ? "ok" : "MISMATCH");
    return ok;
}

template <typename F>
std::pair<double, Matrix> timed(F&& f) {
    const double start = now_ms();
    Matrix result = f();
    return {now_ms() - start, std::move(result)};
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP disabled (serial build)\n");
#endif

    gantsne::Rng rng(42);
    bool ok = true;

    {
        const Matrix a = gantsne::rand_normal(rng, 256, 784);
        const Matrix b = gantsne::rand_normal(rng, 784, 512);
        auto [ser_ms, ser] = timed([&] { return gantsne::ref::matmul(a, b); });
        auto [par_ms, par] = timed([&] { return gantsne::matmul(a, b); });
        ok &= report("matmul", ser_ms, par_ms, max_rel_diff(ser, par), 1e-10);
    }
    {
        const Matrix x = gantsne::rand_normal(rng, 600, 784);
        auto [ser_ms, ser] = timed([&] { return gantsne::ref::pairwise_sq_dists(x); });
        auto [par_ms, par] = timed([&] { return gantsne::pairwise_sq_dists(x); });
        ok &= report("pairwise_sq_dists", ser_ms, par_ms, max_rel_diff(ser, par), 1e-8);
    }
    {
        const Matrix x = gantsne::rand_normal(rng, 300, 50);
        auto [ser_ms, ser] = timed([&] { return gantsne::ref::conditional_p(x, 30.0).p; });
        auto [par_ms, par] =
            timed([&] { return gantsne::conditional_p(x, 30.0).p.values; });
        ok &= report("conditional_p", ser_ms, par_ms, max_rel_diff(ser, par), 1e-8);
    }
    {
        const Matrix y = gantsne::rand_normal(rng, 800, 2);
        auto [ser_ms, ser] = timed([&] { return gantsne::ref::joint_q(y); });
        auto [par_ms, par] = timed([&] { return gantsne::joint_q(y).q.values; });
        ok &= report("joint_q", ser_ms, par_ms, max_rel_diff(ser, par), 1e-10);
    }
    {
        const Matrix y = gantsne::rand_normal(rng, 800, 2);
        const Matrix x = gantsne::rand_normal(rng, 800, 10);
        const auto cond = gantsne::conditional_p(x, 30.0);
        const auto joint = gantsne::symmetrize_p(cond.p);
        auto [ser_ms, ser] =
            timed([&] { return gantsne::ref::kl_gradient(joint.values, y); });
        auto [par_ms, par] = timed([&] { return gantsne::kl_gradient(joint, y); });
        ok &= report("kl_gradient", ser_ms, par_ms, max_rel_diff(ser, par), 1e-8);
    }

    return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
