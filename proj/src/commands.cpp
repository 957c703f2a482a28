#include "gantsne/commands.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gantsne/dataset.hpp"
#include "gantsne/errors.hpp"
#include "gantsne/gan.hpp"
#include "gantsne/manifest.hpp"
#include "gantsne/report.hpp"
#include "gantsne/svg.hpp"
#include "gantsne/tsne.hpp"
#include "gantsne/version.hpp"

namespace gantsne {

namespace {

namespace fs = std::filesystem;

// --data takes one CSV path or an IDX images/labels pair.
LabeledDataset load_data(const std::vector<std::string>& paths) {
    if (paths.size() == 1) return load_csv(paths[0]);
    if (paths.size() == 2) return load_idx(paths[0], paths[1]);
    throw InputError("--data expects one CSV path or two IDX paths (images labels)");
}

// Sibling file next to `base` with the extension swapped for `suffix`
// (out.csv -> out.manifest.json / out.kl.csv).
fs::path sibling(const fs::path& base, const char* suffix) {
    fs::path p = base;
    p.replace_extension();
    p += suffix;
    return p;
}

void ensure_parent(const fs::path& file) {
    const fs::path parent = file.parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

nlohmann::json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError("config file " + path + ": " + e.what());
    }
}

// Config precedence: explicit flags beat the config file, which beats
// defaults. An option counts as explicit when it appeared on the command line.
template <typename T>
void take(const CLI::App& cmd, const nlohmann::json& cfg, const char* flag,
          const char* key, T& value) {
    if (cmd.count(flag) == 0 && cfg.contains(key)) {
        value = cfg.at(key).get<T>();
    }
}

void write_embedding_csv(const fs::path& path, const Matrix& points,
                         const std::vector<int>& labels,
                         const std::vector<std::string>& tags) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << "source_tag,label";
    for (std::size_t k = 0; k < points.cols(); ++k) out << ",y" << (k + 1);
    out << "\n";
    for (std::size_t i = 0; i < points.rows(); ++i) {
        out << tags[i] << ',' << labels[i];
        for (std::size_t k = 0; k < points.cols(); ++k) {
            out << ',' << format_double(points(i, k));
        }
        out << "\n";
    }
}

void write_kl_csv(const fs::path& path, const std::vector<double>& trace) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << "iteration,kl\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << i << ',' << format_double(trace[i]) << "\n";
    }
}

std::vector<ScatterPoint> to_scatter(const Matrix& points,
                                     const std::vector<int>& labels,
                                     const std::vector<std::string>& tags) {
    std::vector<ScatterPoint> out(points.rows());
    for (std::size_t i = 0; i < points.rows(); ++i) {
        out[i].coords.assign(points.data() + i * points.cols(),
                             points.data() + (i + 1) * points.cols());
        out[i].label = labels[i];
        out[i].source_tag = tags[i];
    }
    return out;
}

int usage_error(const CLI::App& cmd, const std::string& message) {
    std::cerr << "error: " << message << "\n\n" << cmd.help();
    return kExitUsage;
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
    std::vector<std::string> data;
    std::string out;
    int digit = -1;
    bool all_digits = false;
    std::string config_path;
    TrainConfig cfg;
};

int run_train(const CLI::App& cmd, TrainArgs& a) {
    if (!a.config_path.empty()) {
        const nlohmann::json cfg = load_config_file(a.config_path);
        take(cmd, cfg, "--data", "data", a.data);
        take(cmd, cfg, "--out", "out", a.out);
        take(cmd, cfg, "--digit", "digit", a.digit);
        take(cmd, cfg, "--all-digits", "all_digits", a.all_digits);
        take(cmd, cfg, "--epochs", "epochs", a.cfg.epochs);
        take(cmd, cfg, "--batch-size", "batch_size", a.cfg.batch_size);
        take(cmd, cfg, "--lr", "learning_rate", a.cfg.learning_rate);
        take(cmd, cfg, "--seed", "seed", a.cfg.seed);
        take(cmd, cfg, "--snapshot-every", "snapshot_every", a.cfg.snapshot_every);
        take(cmd, cfg, "--snapshot-samples", "snapshot_samples", a.cfg.snapshot_samples);
        take(cmd, cfg, "--max-batches", "max_batches_per_epoch",
             a.cfg.max_batches_per_epoch);
    }
    if (a.data.empty()) return usage_error(cmd, "--data is required");
    if (a.out.empty()) return usage_error(cmd, "--out is required");
    if (a.digit > 9 || (a.digit < 0 && a.digit != -1)) {
        return usage_error(cmd, "--digit must be between 0 and 9");
    }

    std::vector<int> digits;
    if (a.digit >= 0) {
        digits.push_back(a.digit);
    } else {
        for (int d = 0; d <= 9; ++d) digits.push_back(d);
    }

    const fs::path out_dir(a.out);
    fs::create_directories(out_dir);
    nlohmann::json resolved = {
        {"data", a.data},
        {"out", a.out},
        {"digit", a.digit >= 0 ? nlohmann::json(a.digit) : nlohmann::json()},
        {"all_digits", a.digit < 0},
        {"epochs", a.cfg.epochs},
        {"batch_size", a.cfg.batch_size},
        {"learning_rate", a.cfg.learning_rate},
        {"noise_dim", a.cfg.noise_dim},
        {"snapshot_every", a.cfg.snapshot_every},
        {"snapshot_samples", a.cfg.snapshot_samples},
        {"seed", a.cfg.seed},
        {"max_batches_per_epoch", a.cfg.max_batches_per_epoch}};
    write_manifest(make_manifest("train", a.cfg.seed, resolved,
                                 {a.data.begin(), a.data.end()}),
                   out_dir / "manifest.json");

    const LabeledDataset ds = normalize(load_data(a.data), PixelRange::Sym1_1);
    for (int d : digits) {
        const LabeledDataset cls = filter_by_label(ds, d);
        TrainConfig cls_cfg = a.cfg;
        cls_cfg.seed = a.cfg.seed + static_cast<std::uint64_t>(d);
        const fs::path run_dir = out_dir / ("class_" + std::to_string(d));
        const GanModel model = train(cls, cls_cfg, run_dir);
        save_checkpoint(model, run_dir / "checkpoint.bin");
        write_history_csv(model.history, run_dir / "history.csv");
        const EpochStats& last = model.history.back();
        std::cout << "class " << d << ": " << model.history.size() << " epochs on "
                  << cls.n() << " images, final L_G=" << format_double(last.gen_loss)
                  << " L_D=" << format_double(last.disc_loss) << "\n";
    }
    return kExitOk;
}

// ------------------------------------------------------------- generate ----

struct GenerateArgs {
    std::string model;
    std::uint64_t n = 0;
    std::string out;
    std::uint64_t seed = 0;
    std::string config_path;
};

int run_generate(const CLI::App& cmd, GenerateArgs& a) {
    if (!a.config_path.empty()) {
        const nlohmann::json cfg = load_config_file(a.config_path);
        take(cmd, cfg, "--model", "model", a.model);
        take(cmd, cfg, "--n", "n", a.n);
        take(cmd, cfg, "--out", "out", a.out);
        take(cmd, cfg, "--seed", "seed", a.seed);
    }
    if (a.model.empty()) return usage_error(cmd, "--model is required");
    if (a.out.empty()) return usage_error(cmd, "--out is required");
    if (cmd.count("--n") == 0 && a.config_path.empty()) {
        return usage_error(cmd, "--n is required");
    }

    std::vector<fs::path> checkpoints;
    const fs::path model_path(a.model);
    if (fs::is_directory(model_path)) {
        for (int d = 0; d <= 9; ++d) {
            const fs::path p = model_path / ("class_" + std::to_string(d)) /
                               "checkpoint.bin";
            if (fs::exists(p)) checkpoints.push_back(p);
        }
        if (checkpoints.empty() && fs::exists(model_path / "checkpoint.bin")) {
            checkpoints.push_back(model_path / "checkpoint.bin");
        }
        if (checkpoints.empty()) {
            throw InputError("no checkpoints found under " + a.model);
        }
    } else {
        if (!fs::exists(model_path)) {
            throw InputError("checkpoint not found: " + a.model);
        }
        checkpoints.push_back(model_path);
    }

    ensure_parent(a.out);
    nlohmann::json resolved = {
        {"model", a.model}, {"n", a.n}, {"out", a.out}, {"seed", a.seed}};
    write_manifest(make_manifest("generate", a.seed, resolved, checkpoints),
                   sibling(a.out, ".manifest.json"));

    // Split n evenly; any remainder goes to the lowest digits first.
    const std::size_t k = checkpoints.size();
    const std::uint64_t base = a.n / k;
    const std::uint64_t rem = a.n % k;

    LabeledDataset all;
    all.range = PixelRange::Raw0_255;
    all.images = Matrix(a.n, kImagePixels);
    all.labels.reserve(a.n);
    Rng rng(a.seed);
    std::size_t row = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::uint64_t count = base + (i < rem ? 1 : 0);
        const GanModel model = load_checkpoint(checkpoints[i]);
        const LabeledDataset part = generate(model, count, rng);
        if (part.n() > 0) {
            std::memcpy(all.images.data() + row * kImagePixels, part.images.data(),
                        part.images.size() * sizeof(double));
        }
        all.labels.insert(all.labels.end(), part.labels.begin(), part.labels.end());
        row += part.n();
    }
    save_csv(all, a.out);
    std::cout << "wrote " << all.n() << " synthetic rows from " << k
              << " model(s) to " << a.out << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- embed ----

struct EmbedArgs {
    std::vector<std::string> data;
    int digit = -1;
    std::uint64_t sample = 0; // 0 = use everything
    std::size_t dims = 2;
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    std::string out;
    std::string svg;
    std::string config_path;
};

int run_embed(const CLI::App& cmd, EmbedArgs& a) {
    if (!a.config_path.empty()) {
        const nlohmann::json cfg = load_config_file(a.config_path);
        take(cmd, cfg, "--data", "data", a.data);
        take(cmd, cfg, "--digit", "digit", a.digit);
        take(cmd, cfg, "--sample", "sample", a.sample);
        take(cmd, cfg, "--dims", "dims", a.dims);
        take(cmd, cfg, "--perplexity", "perplexity", a.perplexity);
        take(cmd, cfg, "--iterations", "iterations", a.iterations);
        take(cmd, cfg, "--seed", "seed", a.seed);
        take(cmd, cfg, "--out", "out", a.out);
        take(cmd, cfg, "--svg", "svg", a.svg);
    }
    if (a.data.empty()) return usage_error(cmd, "--data is required");
    if (a.out.empty()) return usage_error(cmd, "--out is required");

    ensure_parent(a.out);
    nlohmann::json resolved = {{"data", a.data},
                               {"digit", a.digit >= 0 ? nlohmann::json(a.digit)
                                                      : nlohmann::json()},
                               {"sample", a.sample},
                               {"dims", a.dims},
                               {"perplexity", a.perplexity},
                               {"iterations", a.iterations},
                               {"seed", a.seed},
                               {"out", a.out},
                               {"svg", a.svg}};
    write_manifest(make_manifest("embed", a.seed, resolved,
                                 {a.data.begin(), a.data.end()}),
                   sibling(a.out, ".manifest.json"));

    LabeledDataset ds = load_data(a.data);
    if (a.digit >= 0) ds = filter_by_label(ds, a.digit);
    Rng rng(a.seed);
    if (a.sample > 0) ds = sample_n(ds, a.sample, rng);
    ds = normalize(ds, PixelRange::Unit0_1);

    TsneConfig tc;
    tc.out_dims = a.dims;
    tc.perplexity = a.perplexity;
    tc.iterations = a.iterations;
    tc.seed = a.seed;
    const Embedding emb = run_tsne(ds.images, tc);

    const std::vector<std::string> tags(ds.n(), "data");
    write_embedding_csv(a.out, emb.points, ds.labels, tags);
    write_kl_csv(sibling(a.out, ".kl.csv"), emb.kl_trace);
    if (!a.svg.empty()) {
        ensure_parent(a.svg);
        render_svg(to_scatter(emb.points, ds.labels, tags), a.svg);
    }
    std::cout << "embedded " << ds.n() << " points into " << a.dims
              << "-D, final KL="
              << (emb.kl_trace.empty() ? std::string("n/a")
                                       : format_double(emb.kl_trace.back()))
              << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- compare ----

struct CompareArgs {
    std::vector<std::string> real;
    std::string synthetic;
    int digit = -1;
    std::uint64_t n_real = 0;  // 0 = all
    std::uint64_t n_synth = 0; // 0 = all
    std::size_t dims = 2;
    double perplexity = 30.0;
    std::size_t iterations = 1000;
    std::uint64_t seed = 0;
    std::string out_prefix;
    std::string config_path;
};

int run_compare(const CLI::App& cmd, CompareArgs& a) {
    if (!a.config_path.empty()) {
        const nlohmann::json cfg = load_config_file(a.config_path);
        take(cmd, cfg, "--real", "real", a.real);
        take(cmd, cfg, "--synthetic", "synthetic", a.synthetic);
        take(cmd, cfg, "--digit", "digit", a.digit);
        take(cmd, cfg, "--n-real", "n_real", a.n_real);
        take(cmd, cfg, "--n-synth", "n_synth", a.n_synth);
        take(cmd, cfg, "--dims", "dims", a.dims);
        take(cmd, cfg, "--perplexity", "perplexity", a.perplexity);
        take(cmd, cfg, "--iterations", "iterations", a.iterations);
        take(cmd, cfg, "--seed", "seed", a.seed);
        take(cmd, cfg, "--out-prefix", "out_prefix", a.out_prefix);
    }
    if (a.real.empty()) return usage_error(cmd, "--real is required");
    if (a.synthetic.empty()) return usage_error(cmd, "--synthetic is required");
    if (a.out_prefix.empty()) return usage_error(cmd, "--out-prefix is required");

    ensure_parent(fs::path(a.out_prefix + ".csv"));
    std::vector<fs::path> inputs(a.real.begin(), a.real.end());
    inputs.emplace_back(a.synthetic);
    nlohmann::json resolved = {{"real", a.real},
                               {"synthetic", a.synthetic},
                               {"digit", a.digit >= 0 ? nlohmann::json(a.digit)
                                                      : nlohmann::json()},
                               {"n_real", a.n_real},
                               {"n_synth", a.n_synth},
                               {"dims", a.dims},
                               {"perplexity", a.perplexity},
                               {"iterations", a.iterations},
                               {"seed", a.seed},
                               {"out_prefix", a.out_prefix}};
    write_manifest(make_manifest("compare", a.seed, resolved, inputs),
                   fs::path(a.out_prefix + ".manifest.json"));

    LabeledDataset real_ds = load_data(a.real);
    LabeledDataset synth_ds = load_csv(a.synthetic);
    if (a.digit >= 0) {
        real_ds = filter_by_label(real_ds, a.digit);
        for (int label : synth_ds.labels) {
            if (label != a.digit) {
                throw InputError("synthetic data carries label " +
                                 std::to_string(label) + " but --digit is " +
                                 std::to_string(a.digit));
            }
        }
    }
    Rng rng(a.seed);
    if (a.n_real > 0) real_ds = sample_n(real_ds, a.n_real, rng);
    if (a.n_synth > 0) synth_ds = sample_n(synth_ds, a.n_synth, rng);
    real_ds = normalize(real_ds, PixelRange::Unit0_1);
    synth_ds = normalize(synth_ds, PixelRange::Unit0_1);

    const std::size_t nr = real_ds.n();
    const std::size_t ns = synth_ds.n();
    Matrix joint(nr + ns, kImagePixels);
    std::memcpy(joint.data(), real_ds.images.data(),
                real_ds.images.size() * sizeof(double));
    std::memcpy(joint.data() + nr * kImagePixels, synth_ds.images.data(),
                synth_ds.images.size() * sizeof(double));
    std::vector<int> labels = real_ds.labels;
    labels.insert(labels.end(), synth_ds.labels.begin(), synth_ds.labels.end());
    std::vector<std::string> tags(nr, "real");
    tags.insert(tags.end(), ns, "synthetic");

    TsneConfig tc;
    tc.out_dims = a.dims;
    tc.perplexity = a.perplexity;
    tc.iterations = a.iterations;
    tc.seed = a.seed;
    const Embedding emb = run_tsne(joint, tc);

    write_embedding_csv(a.out_prefix + ".csv", emb.points, labels, tags);
    SvgOptions svg_options;
    svg_options.color_by_tag = true;
    render_svg(to_scatter(emb.points, labels, tags), a.out_prefix + ".svg",
               svg_options);
    const ComparisonReport report = compare_embeddings(emb.points, nr);
    write_report_json(report, a.out_prefix + ".report.json");
    std::cout << "compared " << nr << " real vs " << ns
              << " synthetic points: overlap_ratio="
              << format_double(report.overlap_ratio)
              << " knn_real_fraction=" << format_double(report.knn_real_fraction)
              << "\n";
    return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"Adversarial digit synthesis with pairwise-exact t-SNE comparison"};
    app.name("gantsne");
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(0, 1);

    TrainArgs ta;
    GenerateArgs ga;
    EmbedArgs ea;
    CompareArgs ca;
    int rc = kExitOk;

    CLI::App* train_cmd =
        app.add_subcommand("train", "Train one adversarial model per digit class");
    train_cmd->set_version_flag("--version", std::string(kVersion));
    train_cmd->add_option("--data", ta.data,
                          "Input data: one CSV path, or IDX images and labels paths")
        ->expected(1, 2);
    train_cmd->add_option("--out", ta.out, "Run directory to create");
    CLI::Option* digit_opt =
        train_cmd->add_option("--digit", ta.digit, "Train only this digit class")
            ->check(CLI::Range(0, 9));
    digit_opt->excludes(
        train_cmd->add_flag("--all-digits", ta.all_digits,
                            "Train one model per digit (the default)"));
    train_cmd->add_option("--epochs", ta.cfg.epochs, "Training epochs");
    train_cmd->add_option("--batch-size", ta.cfg.batch_size, "Images per batch");
    train_cmd->add_option("--lr", ta.cfg.learning_rate, "Adam learning rate");
    train_cmd->add_option("--seed", ta.cfg.seed, "Base RNG seed");
    train_cmd->add_option("--snapshot-every", ta.cfg.snapshot_every,
                          "Epochs between sample snapshots");
    train_cmd->add_option("--snapshot-samples", ta.cfg.snapshot_samples,
                          "Generated images per snapshot");
    train_cmd->add_option("--max-batches", ta.cfg.max_batches_per_epoch,
                          "Cap batches per epoch (0 = full pass)");
    train_cmd->add_option("--config", ta.config_path,
                          "JSON config file (explicit flags win)");
    train_cmd->callback([&] { rc = run_train(*train_cmd, ta); });

    CLI::App* gen_cmd = app.add_subcommand(
        "generate", "Sample labeled synthetic digits from trained models");
    gen_cmd->set_version_flag("--version", std::string(kVersion));
    gen_cmd->add_option("--model", ga.model, "Checkpoint file or run directory");
    gen_cmd->add_option("--n", ga.n, "Total images (split evenly across models)");
    gen_cmd->add_option("--out", ga.out, "Output CSV path (label,pixels...)");
    gen_cmd->add_option("--seed", ga.seed, "RNG seed");
    gen_cmd->add_option("--config", ga.config_path,
                        "JSON config file (explicit flags win)");
    gen_cmd->callback([&] { rc = run_generate(*gen_cmd, ga); });

    CLI::App* embed_cmd = app.add_subcommand(
        "embed", "Embed image data into 2-D or 3-D with exact t-SNE");
    embed_cmd->set_version_flag("--version", std::string(kVersion));
    embed_cmd->add_option("--data", ea.data,
                          "Input data: one CSV path, or IDX images and labels paths")
        ->expected(1, 2);
    embed_cmd->add_option("--digit", ea.digit, "Keep only this digit class")
        ->check(CLI::Range(0, 9));
    embed_cmd->add_option("--sample", ea.sample, "Sample this many rows first");
    embed_cmd->add_option("--dims", ea.dims, "Embedding dimensions")
        ->check(CLI::IsMember({2, 3}));
    embed_cmd->add_option("--perplexity", ea.perplexity, "t-SNE perplexity");
    embed_cmd->add_option("--iterations", ea.iterations, "Gradient descent steps");
    embed_cmd->add_option("--seed", ea.seed, "RNG seed");
    embed_cmd->add_option("--out", ea.out, "Embedding CSV path");
    embed_cmd->add_option("--svg", ea.svg, "Optional scatter SVG path");
    embed_cmd->add_option("--config", ea.config_path,
                          "JSON config file (explicit flags win)");
    embed_cmd->callback([&] { rc = run_embed(*embed_cmd, ea); });

    CLI::App* compare_cmd = app.add_subcommand(
        "compare", "Joint t-SNE of real vs synthetic data with a report");
    compare_cmd->set_version_flag("--version", std::string(kVersion));
    compare_cmd->add_option("--real", ca.real,
                            "Real data: one CSV path, or IDX images and labels paths")
        ->expected(1, 2);
    compare_cmd->add_option("--synthetic", ca.synthetic, "Synthetic data CSV");
    compare_cmd->add_option("--digit", ca.digit, "Restrict both sides to this digit")
        ->check(CLI::Range(0, 9));
    compare_cmd->add_option("--n-real", ca.n_real, "Sample this many real rows");
    compare_cmd->add_option("--n-synth", ca.n_synth, "Sample this many synthetic rows");
    compare_cmd->add_option("--dims", ca.dims, "Embedding dimensions")
        ->check(CLI::IsMember({2, 3}));
    compare_cmd->add_option("--perplexity", ca.perplexity, "t-SNE perplexity");
    compare_cmd->add_option("--iterations", ca.iterations, "Gradient descent steps");
    compare_cmd->add_option("--seed", ca.seed, "RNG seed");
    compare_cmd->add_option("--out-prefix", ca.out_prefix,
                            "Prefix for .csv/.svg/.report.json outputs");
    compare_cmd->add_option("--config", ca.config_path,
                            "JSON config file (explicit flags win)");
    compare_cmd->callback([&] { rc = run_compare(*compare_cmd, ca); });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return kExitUsage;
        }
        return rc;
    } catch (const CLI::CallForHelp& e) {
        const auto subs = app.get_subcommands();
        std::cout << (subs.empty() ? app : *subs.front()).help();
        return e.get_exit_code();
    } catch (const CLI::Success& e) {
        return app.exit(e); // --version and friends print to stdout
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        std::cerr << (subs.empty() ? app : *subs.front()).help();
        return kExitUsage;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
}

} // namespace gantsne
