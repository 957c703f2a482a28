#pragma once

#include <filesystem>
#include <vector>

#include "gantsne/matrix.hpp"
#include "gantsne/rng.hpp"

namespace gantsne {

enum class PixelRange {
    Raw0_255, // [0, 255]
    Unit0_1,  // [0, 1]
    Sym1_1,   // [-1, 1]
};

// N x 784 image matrix plus N digit labels in [0, 9].
struct LabeledDataset {
    Matrix images;
    std::vector<int> labels;
    PixelRange range = PixelRange::Raw0_255;

    std::size_t n() const { return images.rows(); }
};

inline constexpr std::size_t kImagePixels = 784; // 28 x 28
inline constexpr std::size_t kImageSide = 28;

// MNIST IDX pair (big-endian; magics 0x00000803 / 0x00000801). Counts come
// from the headers, never hard-coded. Returns Raw0_255 data.
LabeledDataset load_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path);

void save_idx(const LabeledDataset& ds,
              const std::filesystem::path& images_path,
              const std::filesystem::path& labels_path);

// 785-column CSV, label first. A single leading header row is skipped when its
// first field is not numeric.
LabeledDataset load_csv(const std::filesystem::path& path);

void save_csv(const LabeledDataset& ds, const std::filesystem::path& path);

// Affine remap between pixel ranges; labels untouched; no-op when target
// equals the current range.
LabeledDataset normalize(const LabeledDataset& ds, PixelRange target);

// All rows whose label equals digit, original order preserved.
LabeledDataset filter_by_label(const LabeledDataset& ds, int digit);

// Uniform sample of n rows without replacement (partial Fisher-Yates).
LabeledDataset sample_n(const LabeledDataset& ds, std::size_t n, Rng& rng);

// Shortest decimal text for a pixel/coordinate value; integers print without
// a decimal point and exponents are never used for dataset-scale values.
std::string format_double(double v);

} // namespace gantsne
