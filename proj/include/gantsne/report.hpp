#pragma once

#include <cstddef>
#include <filesystem>

#include "gantsne/matrix.hpp"

namespace gantsne {

// Numeric proxy for the paper's visual "nested" claim: how far the synthetic
// centroid sits from the real centroid, measured in units of the real cloud's
// mean radius, plus a neighborhood-mixing statistic.
struct ComparisonReport {
    std::size_t n_real = 0;
    std::size_t n_synthetic = 0;
    double centroid_distance = 0.0;
    double mean_real_spread = 0.0;
    double overlap_ratio = 0.0;      // centroid_distance / mean_real_spread
    double knn_real_fraction = 0.0;  // k = 10 embedding neighbors of each synthetic point
};

inline constexpr std::size_t kReportKnn = 10;

// points holds the joint embedding with the first n_real rows real and the
// remaining rows synthetic.
ComparisonReport compare_embeddings(const Matrix& points, std::size_t n_real);

void write_report_json(const ComparisonReport& report,
                       const std::filesystem::path& path);

} // namespace gantsne
