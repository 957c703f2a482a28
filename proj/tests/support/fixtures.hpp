#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gantsne/dataset.hpp"
#include "gantsne/matrix.hpp"
#include "gantsne/neural.hpp"
#include "gantsne/tsne.hpp"

namespace fixtures {

// Unique self-deleting directory for test artifacts.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

// Deterministic MNIST stand-in: seven-segment style digit glyphs rendered
// into 28 x 28 with per-image jitter in position, stroke width and
// brightness. Raw0_255 range, bright strokes on black.
gantsne::LabeledDataset digit_images(int digit, std::size_t n, std::uint64_t seed);

// counts[d] images of digit d, appended in digit order.
gantsne::LabeledDataset digit_corpus(const std::vector<std::size_t>& counts,
                                     std::uint64_t seed);

// Two unit-variance Gaussian blobs whose centers sit `separation` apart.
// Rows 0..per_blob-1 belong to blob 0; labels_out (optional) receives 0/1.
gantsne::Matrix two_blobs(std::size_t per_blob, std::size_t dims, double separation,
                          std::uint64_t seed, std::vector<int>* labels_out = nullptr);

// Joint t-SNE affinities for Gaussian random data, handy as a valid P.
gantsne::AffinityMatrix random_joint_p(std::size_t n, std::size_t dims,
                                       double perplexity, std::uint64_t seed);

// Largest relative error between analytic parameter gradients and central
// finite differences of the mean-BCE loss, over every weight and bias.
// Relative error divides by |fd| floored at `floor`.
double max_grad_rel_error(gantsne::DenseNet& net, const gantsne::Matrix& x,
                          const gantsne::Matrix& targets, double h, double floor);

// Same comparison for the KL gradient over every embedding coordinate.
double max_kl_grad_rel_error(const gantsne::AffinityMatrix& p, gantsne::Matrix y,
                             double h, double floor);

struct ProcResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

// Run a shell command, capturing exit code, stdout and stderr separately.
ProcResult run_process(const std::string& command);

// Whole file as bytes; throws when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);

} // namespace fixtures
