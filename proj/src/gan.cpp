#include "gantsne/gan.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "gantsne/errors.hpp"

namespace gantsne {

namespace {

constexpr char kCheckpointMagic[4] = {'G', 'T', 'S', 'N'};
constexpr std::uint32_t kCheckpointVersion = 1;

Matrix constant_matrix(std::size_t rows, std::size_t cols, double value) {
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = value;
    return m;
}

double mean_of(const Matrix& m) {
    double total = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) total += m.data()[i];
    return m.size() == 0 ? 0.0 : total / static_cast<double>(m.size());
}

double to_byte(double sym) {
    double v = std::round((sym + 1.0) * 0.5 * 255.0);
    if (v < 0.0) v = 0.0;
    if (v > 255.0) v = 255.0;
    return v;
}

// snapshot_samples rows of pixel bytes, 784 columns, no label column (the
// generator output has no ground-truth label during training).
void write_snapshot_csv(const Matrix& pixels, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    std::string line;
    for (std::size_t i = 0; i < pixels.rows(); ++i) {
        line.clear();
        for (std::size_t j = 0; j < pixels.cols(); ++j) {
            if (j) line += ',';
            line += format_double(pixels(i, j));
        }
        line += '\n';
        out << line;
    }
}

// 5x5 mosaic of 28x28 tiles as binary PGM (P5), row-major fill, unused cells
// left black.
void write_mosaic_pgm(const Matrix& pixels, const std::vector<std::size_t>& picks,
                      const std::filesystem::path& path) {
    const std::size_t grid = 5;
    const std::size_t side = grid * kImageSide;
    std::vector<unsigned char> canvas(side * side, 0);
    for (std::size_t s = 0; s < picks.size() && s < grid * grid; ++s) {
        const std::size_t cell_row = s / grid;
        const std::size_t cell_col = s % grid;
        const double* img = pixels.data() + picks[s] * kImagePixels;
        for (std::size_t r = 0; r < kImageSide; ++r) {
            unsigned char* dst =
                canvas.data() + (cell_row * kImageSide + r) * side + cell_col * kImageSide;
            for (std::size_t c = 0; c < kImageSide; ++c) {
                dst[c] = static_cast<unsigned char>(img[r * kImageSide + c]);
            }
        }
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << "P5\n" << side << " " << side << "\n255\n";
    out.write(reinterpret_cast<const char*>(canvas.data()),
              static_cast<std::streamsize>(canvas.size()));
}

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw LengthError("checkpoint truncated");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw LengthError("checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

double read_f64(std::istream& in) {
    const std::uint64_t bits = read_u64(in);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

void validate_config(const TrainConfig& config) {
    if (config.epochs < 1 || config.batch_size < 1 || config.noise_dim < 1 ||
        config.snapshot_every < 1 || config.snapshot_samples < 1) {
        throw InputError("train config: counts must all be at least 1");
    }
    if (!(config.learning_rate > 0.0)) {
        throw InputError("train config: learning rate must be positive");
    }
}

} // namespace

GanModel build_gan(const TrainConfig& config) {
    validate_config(config);
    GanModel model;
    Rng rng(config.seed);

    constexpr double kSlope = 0.2;
    model.generator.layers.push_back(
        make_layer(config.noise_dim, 256, Activation::LeakyReLU, rng, kSlope));
    model.generator.layers.push_back(
        make_layer(256, 512, Activation::LeakyReLU, rng, kSlope));
    model.generator.layers.push_back(
        make_layer(512, 1024, Activation::LeakyReLU, rng, kSlope));
    model.generator.layers.push_back(
        make_layer(1024, kImagePixels, Activation::Tanh, rng));

    model.discriminator.layers.push_back(
        make_layer(kImagePixels, 512, Activation::LeakyReLU, rng, kSlope));
    model.discriminator.layers.push_back(
        make_layer(512, 256, Activation::LeakyReLU, rng, kSlope));
    model.discriminator.layers.push_back(make_layer(256, 1, Activation::Sigmoid, rng));

    model.gen_opt = make_adam_state(model.generator, config.learning_rate);
    model.disc_opt = make_adam_state(model.discriminator, config.learning_rate);
    model.noise_dim = config.noise_dim;
    model.rng = rng; // leftover stream drives training draws
    return model;
}

DiscStepResult disc_step(GanModel& model, const Matrix& real_batch, Rng& rng) {
    const std::size_t batch = real_batch.rows();
    Matrix z = rand_normal(rng, batch, model.noise_dim);
    const Matrix fake = forward_inference(model.generator, z);

    ForwardResult real_fwd = forward(model.discriminator, real_batch);
    const BceResult real_bce =
        bce_loss(real_fwd.output, constant_matrix(batch, 1, 1.0));
    Gradients grads = backward(model.discriminator, real_fwd.tape, real_bce.dloss_dpred);

    ForwardResult fake_fwd = forward(model.discriminator, fake);
    const BceResult fake_bce =
        bce_loss(fake_fwd.output, constant_matrix(batch, 1, 0.0));
    grads.add(backward(model.discriminator, fake_fwd.tape, fake_bce.dloss_dpred));

    adam_apply(model.discriminator, grads, model.disc_opt);

    DiscStepResult result;
    result.loss = real_bce.loss + fake_bce.loss;
    result.mean_real = mean_of(real_fwd.output);
    result.mean_fake = mean_of(fake_fwd.output);
    return result;
}

double gen_step(GanModel& model, std::size_t batch_size, Rng& rng) {
    if (batch_size < 1) throw InputError("gen_step: batch size must be at least 1");
    Matrix z = rand_normal(rng, batch_size, model.noise_dim);
    ForwardResult gen_fwd = forward(model.generator, z);
    ForwardResult disc_fwd = forward(model.discriminator, gen_fwd.output);
    const BceResult bce =
        bce_loss(disc_fwd.output, constant_matrix(batch_size, 1, 1.0));
    const Matrix dfake = backward_input(model.discriminator, disc_fwd.tape, bce.dloss_dpred);
    const Gradients grads = backward(model.generator, gen_fwd.tape, dfake);
    adam_apply(model.generator, grads, model.gen_opt);
    return bce.loss;
}

GanModel train(const LabeledDataset& ds, const TrainConfig& config,
               const std::filesystem::path& run_dir) {
    validate_config(config);
    if (ds.n() == 0) throw InputError("train: dataset is empty");
    if (ds.range != PixelRange::Sym1_1) {
        throw InputError("train: dataset pixels must be normalized to [-1, 1]");
    }
    if (ds.n() < config.batch_size) {
        throw InputError("train: dataset has " + std::to_string(ds.n()) +
                         " images, fewer than one batch of " +
                         std::to_string(config.batch_size));
    }

    GanModel model = build_gan(config);
    const bool single_class =
        std::all_of(ds.labels.begin(), ds.labels.end(),
                    [&](int l) { return l == ds.labels.front(); });
    if (single_class) model.class_label = ds.labels.front();

    const bool emit_snapshots = !run_dir.empty();
    if (emit_snapshots) {
        std::filesystem::create_directories(run_dir / "snapshots");
    }
    // Snapshots draw from their own stream so emitting them (or not) never
    // changes the training trajectory.
    Rng snapshot_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

    std::vector<std::size_t> order(ds.n());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::size_t n_batches = ds.n() / config.batch_size;
    if (config.max_batches_per_epoch > 0) {
        n_batches = std::min(n_batches, config.max_batches_per_epoch);
    }

    Matrix batch(config.batch_size, kImagePixels);
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        model.rng.shuffle(order);
        EpochStats stats;
        for (std::size_t b = 0; b < n_batches; ++b) {
            for (std::size_t r = 0; r < config.batch_size; ++r) {
                const std::size_t src = order[b * config.batch_size + r];
                std::memcpy(batch.data() + r * kImagePixels,
                            ds.images.data() + src * kImagePixels,
                            kImagePixels * sizeof(double));
            }
            const DiscStepResult d = disc_step(model, batch, model.rng);
            const double g_loss = gen_step(model, config.batch_size, model.rng);
            if (!std::isfinite(d.loss) || !std::isfinite(g_loss)) {
                throw NumericError("train: non-finite loss at epoch " +
                                   std::to_string(epoch) + ", batch " +
                                   std::to_string(b));
            }
            stats.disc_loss += d.loss;
            stats.gen_loss += g_loss;
            stats.mean_disc_real += d.mean_real;
            stats.mean_disc_fake += d.mean_fake;
        }
        const double inv = 1.0 / static_cast<double>(n_batches);
        stats.disc_loss *= inv;
        stats.gen_loss *= inv;
        stats.mean_disc_real *= inv;
        stats.mean_disc_fake *= inv;
        model.history.push_back(stats);

        if (emit_snapshots && (epoch + 1) % config.snapshot_every == 0) {
            Matrix raw = generate_raw(model, config.snapshot_samples, snapshot_rng);
            Matrix bytes(raw.rows(), raw.cols());
            for (std::size_t i = 0; i < raw.size(); ++i) {
                bytes.data()[i] = to_byte(raw.data()[i]);
            }
            const std::string stem = "epoch_" + std::to_string(epoch);
            write_snapshot_csv(bytes, run_dir / "snapshots" / (stem + ".csv"));

            std::vector<std::size_t> all(bytes.rows());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            snapshot_rng.shuffle(all);
            all.resize(std::min<std::size_t>(kMosaicSamples, all.size()));
            write_mosaic_pgm(bytes, all, run_dir / "snapshots" / (stem + ".pgm"));
        }
    }
    return model;
}

Matrix generate_raw(const GanModel& model, std::size_t n, Rng& rng) {
    if (n == 0) return Matrix(0, model.generator.output_size());
    Matrix z = rand_normal(rng, n, model.noise_dim);
    return forward_inference(model.generator, z);
}

LabeledDataset generate(const GanModel& model, std::size_t n, Rng& rng) {
    if (!model.class_label.has_value()) {
        throw ContractError("generate: model has no class label to assign");
    }
    const Matrix raw = generate_raw(model, n, rng);
    LabeledDataset ds;
    ds.images = Matrix(n, kImagePixels);
    for (std::size_t i = 0; i < raw.size(); ++i) {
        ds.images.data()[i] = to_byte(raw.data()[i]);
    }
    ds.labels.assign(n, *model.class_label);
    ds.range = PixelRange::Raw0_255;
    return ds;
}

void save_checkpoint(const GanModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out.write(kCheckpointMagic, 4);
    write_u32(out, kCheckpointVersion);
    write_u32(out, model.class_label.has_value() ? 1 : 0);
    write_u32(out, model.class_label.has_value()
                       ? static_cast<std::uint32_t>(*model.class_label)
                       : 0);
    write_u64(out, model.noise_dim);
    write_u64(out, model.rng.seed());
    for (std::uint64_t word : model.rng.state()) write_u64(out, word);
    write_net(out, model.generator);
    write_net(out, model.discriminator);
    write_adam(out, model.gen_opt);
    write_adam(out, model.disc_opt);
    write_u64(out, model.history.size());
    for (const EpochStats& s : model.history) {
        write_f64(out, s.gen_loss);
        write_f64(out, s.disc_loss);
        write_f64(out, s.mean_disc_real);
        write_f64(out, s.mean_disc_fake);
    }
    if (!out) throw InputError("write failed for " + path.string());
}

GanModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0) {
        throw FormatError(path.string() + ": not a checkpoint file (bad magic)");
    }
    const std::uint32_t version = read_u32(in);
    if (version != kCheckpointVersion) {
        throw FormatError(path.string() + ": unsupported checkpoint version " +
                          std::to_string(version));
    }
    GanModel model;
    const std::uint32_t has_label = read_u32(in);
    const std::uint32_t label = read_u32(in);
    if (has_label) model.class_label = static_cast<int>(label);
    model.noise_dim = read_u64(in);
    const std::uint64_t seed = read_u64(in);
    std::array<std::uint64_t, 4> state{};
    for (auto& word : state) word = read_u64(in);
    model.rng = Rng(seed, state);
    model.generator = read_net(in);
    model.discriminator = read_net(in);
    model.gen_opt = read_adam(in);
    model.disc_opt = read_adam(in);
    const std::uint64_t n_epochs = read_u64(in);
    model.history.resize(n_epochs);
    for (auto& s : model.history) {
        s.gen_loss = read_f64(in);
        s.disc_loss = read_f64(in);
        s.mean_disc_real = read_f64(in);
        s.mean_disc_fake = read_f64(in);
    }
    return model;
}

void write_history_csv(const std::vector<EpochStats>& history,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << "epoch,L_G,L_D,mean_D_real,mean_D_fake\n";
    for (std::size_t e = 0; e < history.size(); ++e) {
        out << e << ',' << format_double(history[e].gen_loss) << ','
            << format_double(history[e].disc_loss) << ','
            << format_double(history[e].mean_disc_real) << ','
            << format_double(history[e].mean_disc_fake) << '\n';
    }
}

} // namespace gantsne
