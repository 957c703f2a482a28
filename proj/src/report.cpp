#include "gantsne/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gantsne/errors.hpp"

namespace gantsne {

namespace {

std::vector<double> centroid(const Matrix& points, std::size_t begin, std::size_t end) {
    std::vector<double> c(points.cols(), 0.0);
    for (std::size_t i = begin; i < end; ++i) {
        for (std::size_t k = 0; k < points.cols(); ++k) c[k] += points(i, k);
    }
    for (double& v : c) v /= static_cast<double>(end - begin);
    return c;
}

double dist_to(const Matrix& points, std::size_t row, const std::vector<double>& c) {
    double acc = 0.0;
    for (std::size_t k = 0; k < points.cols(); ++k) {
        const double diff = points(row, k) - c[k];
        acc += diff * diff;
    }
    return std::sqrt(acc);
}

} // namespace

ComparisonReport compare_embeddings(const Matrix& points, std::size_t n_real) {
    const std::size_t n = points.rows();
    if (n_real < 2 || n_real >= n) {
        throw InputError("compare_embeddings: needs at least 2 real and 1 synthetic "
                         "rows, got " + std::to_string(n_real) + " real of " +
                         std::to_string(n) + " total");
    }
    ComparisonReport report;
    report.n_real = n_real;
    report.n_synthetic = n - n_real;

    const std::vector<double> real_c = centroid(points, 0, n_real);
    const std::vector<double> synth_c = centroid(points, n_real, n);
    double dist = 0.0;
    for (std::size_t k = 0; k < points.cols(); ++k) {
        const double diff = real_c[k] - synth_c[k];
        dist += diff * diff;
    }
    report.centroid_distance = std::sqrt(dist);

    double spread = 0.0;
    for (std::size_t i = 0; i < n_real; ++i) spread += dist_to(points, i, real_c);
    report.mean_real_spread = spread / static_cast<double>(n_real);
    report.overlap_ratio = report.centroid_distance / report.mean_real_spread;

    // Average, over synthetic points, of the real fraction among the k nearest
    // embedding neighbors (ties broken by row index for determinism).
    const std::size_t k_eff = std::min(kReportKnn, n - 1);
    std::vector<std::pair<double, std::size_t>> dists;
    double fraction_sum = 0.0;
    for (std::size_t i = n_real; i < n; ++i) {
        dists.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double acc = 0.0;
            for (std::size_t k = 0; k < points.cols(); ++k) {
                const double diff = points(i, k) - points(j, k);
                acc += diff * diff;
            }
            dists.emplace_back(acc, j);
        }
        std::partial_sort(dists.begin(), dists.begin() + static_cast<std::ptrdiff_t>(k_eff),
                          dists.end());
        std::size_t real_count = 0;
        for (std::size_t m = 0; m < k_eff; ++m) {
            if (dists[m].second < n_real) ++real_count;
        }
        fraction_sum += static_cast<double>(real_count) / static_cast<double>(k_eff);
    }
    report.knn_real_fraction = fraction_sum / static_cast<double>(report.n_synthetic);
    return report;
}

void write_report_json(const ComparisonReport& report,
                       const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["n_real"] = report.n_real;
    doc["n_synthetic"] = report.n_synthetic;
    doc["centroid_distance"] = report.centroid_distance;
    doc["mean_real_spread"] = report.mean_real_spread;
    doc["overlap_ratio"] = report.overlap_ratio;
    doc["knn_real_fraction"] = report.knn_real_fraction;
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << "\n";
}

} // namespace gantsne
