#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "gantsne/dataset.hpp"
#include "gantsne/neural.hpp"

namespace gantsne {

struct TrainConfig {
    std::size_t epochs = 2400;
    std::size_t batch_size = 128;
    double learning_rate = 2e-4;
    std::size_t noise_dim = 100;
    std::size_t snapshot_every = 50;
    std::size_t snapshot_samples = 100;
    std::uint64_t seed = 0;
    // Optional cap on batches per epoch (0 = full pass over the data).
    std::size_t max_batches_per_epoch = 0;
};

inline constexpr std::size_t kMosaicSamples = 25; // 5 x 5 snapshot grid

struct EpochStats {
    double gen_loss = 0.0;
    double disc_loss = 0.0;
    double mean_disc_real = 0.0;
    double mean_disc_fake = 0.0;
};

// Generator (100 -> 256 -> 512 -> 1024 -> 784, tanh out) and discriminator
// (784 -> 512 -> 256 -> 1, sigmoid out) with their Adam states, per-epoch
// history, the training RNG, and the digit the model was trained on.
struct GanModel {
    DenseNet generator;
    DenseNet discriminator;
    AdamState gen_opt;
    AdamState disc_opt;
    std::vector<EpochStats> history;
    std::optional<int> class_label;
    Rng rng{0};
    std::size_t noise_dim = 100;
};

GanModel build_gan(const TrainConfig& config);

struct DiscStepResult {
    double loss = 0.0;       // L_D = BCE(D(real), 1) + BCE(D(G(z)), 0)
    double mean_real = 0.0;  // mean D(x) on the real batch
    double mean_fake = 0.0;  // mean D(G(z)) before the update
};

// One discriminator update. The generator is treated as a constant sampler
// and its parameters are untouched.
DiscStepResult disc_step(GanModel& model, const Matrix& real_batch, Rng& rng);

// One generator update against the frozen discriminator; returns
// L_G = BCE(D(G(z)), 1).
double gen_step(GanModel& model, std::size_t batch_size, Rng& rng);

// Adversarial training: per epoch, shuffle, iterate full batches (trailing
// partial batch dropped), one disc_step then one gen_step per batch. Every
// snapshot_every epochs writes snapshot_samples generated images as CSV plus
// a 25-sample PGM mosaic under run_dir/snapshots (skipped when run_dir is
// empty). Fully deterministic for a given config.
GanModel train(const LabeledDataset& ds, const TrainConfig& config,
               const std::filesystem::path& run_dir = {});

// n generated images mapped from [-1, 1] back to Raw0_255 (rounded, clamped),
// labeled with the model's class label. Throws ContractError without one.
LabeledDataset generate(const GanModel& model, std::size_t n, Rng& rng);

// Raw generator output (n x 784 in [-1, 1]) without the pixel remap.
Matrix generate_raw(const GanModel& model, std::size_t n, Rng& rng);

// Checkpoint container (magic "GTSN"+version; layout in the README).
// Round-trips bit-exactly.
void save_checkpoint(const GanModel& model, const std::filesystem::path& path);
GanModel load_checkpoint(const std::filesystem::path& path);

// history.csv with the fixed column order epoch,L_G,L_D,mean_D_real,mean_D_fake.
void write_history_csv(const std::vector<EpochStats>& history,
                       const std::filesystem::path& path);

} // namespace gantsne
