#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gantsne/dataset.hpp"
#include "support/fixtures.hpp"

using namespace gantsne;
using fixtures::TempDir;

namespace {

fixtures::ProcResult cli(const std::string& args) {
    return fixtures::run_process(std::string(GANTSNE_BIN) + " " + args);
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        lines.push_back(text.substr(start, end - start));
        start = end + 1;
    }
    return lines;
}

// One trained run shared by the cases below; training is the slow part.
struct SharedRun {
    TempDir dir;
    std::string data_csv;
    std::string run_dir;
    int train_exit = -1;
    std::string train_stdout;

    SharedRun() {
        const LabeledDataset ds = fixtures::digit_corpus({40, 40}, 101);
        data_csv = (dir / "digits.csv").string();
        save_csv(ds, data_csv);
        run_dir = (dir / "run").string();
        const auto r = cli("train --data " + data_csv + " --out " + run_dir +
                           " --digit 1 --epochs 1 --batch-size 16 --max-batches 2"
                           " --snapshot-every 1 --snapshot-samples 8 --seed 5");
        train_exit = r.exit_code;
        train_stdout = r.out;
    }
};

SharedRun& shared() {
    static SharedRun s;
    return s;
}

} // namespace

TEST_CASE("--version prints the version on stdout") {
    const auto r = cli("--version");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("0.1.0") != std::string::npos);
}

TEST_CASE("running without a subcommand is a usage error") {
    const auto r = cli("");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("train") != std::string::npos); // usage lists subcommands
}

TEST_CASE("unknown flags are usage errors") {
    const auto r = cli("train --such-flag-does-not-exist 1");
    CHECK(r.exit_code == 1);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("subcommand help goes to stdout and exits cleanly") {
    const auto r = cli("train --help");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("--data") != std::string::npos);
    CHECK(r.out.find("--epochs") != std::string::npos);

    const auto e = cli("embed --help");
    CHECK(e.exit_code == 0);
    CHECK(e.out.find("--perplexity") != std::string::npos);
}

TEST_CASE("missing required options are usage errors on stderr") {
    const auto r = cli("train --out somewhere");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("--data") != std::string::npos);

    const auto g = cli("generate --out x.csv --n 5");
    CHECK(g.exit_code == 1);
}

TEST_CASE("out-of-range digits are rejected by the parser") {
    const auto r = cli("train --data x.csv --out y --digit 12");
    CHECK(r.exit_code == 1);
}

TEST_CASE("train produces the documented run directory") {
    const SharedRun& s = shared();
    REQUIRE(s.train_exit == 0);
    CHECK(s.train_stdout.find("class 1") != std::string::npos);

    namespace fs = std::filesystem;
    CHECK(fs::exists(fs::path(s.run_dir) / "manifest.json"));
    CHECK(fs::exists(fs::path(s.run_dir) / "class_1/checkpoint.bin"));
    CHECK(fs::exists(fs::path(s.run_dir) / "class_1/history.csv"));
    CHECK(fs::exists(fs::path(s.run_dir) / "class_1/snapshots/epoch_0.csv"));
    CHECK(fs::exists(fs::path(s.run_dir) / "class_1/snapshots/epoch_0.pgm"));
    CHECK_FALSE(fs::exists(fs::path(s.run_dir) / "class_0")); // --digit 1 only

    const auto history =
        lines_of(fixtures::read_file(fs::path(s.run_dir) / "class_1/history.csv"));
    REQUIRE(history.size() == 2);
    CHECK(history[0] == "epoch,L_G,L_D,mean_D_real,mean_D_fake");
    CHECK(history[1].rfind("0,", 0) == 0);

    const nlohmann::json manifest =
        nlohmann::json::parse(fixtures::read_file(fs::path(s.run_dir) / "manifest.json"));
    CHECK(manifest.at("command") == "train");
    CHECK(manifest.at("version") == "0.1.0");
    CHECK(manifest.at("seed").get<std::uint64_t>() == 5);
    CHECK(manifest.at("config").at("epochs").get<int>() == 1);
    CHECK(manifest.at("config").at("digit").get<int>() == 1);
    const auto& inputs = manifest.at("inputs");
    REQUIRE(inputs.size() == 1);
    CHECK(inputs[0].at("fnv1a64").get<std::string>().size() == 16);
    CHECK(inputs[0].at("bytes").get<std::uint64_t>() > 0);
    const std::string stamp = manifest.at("timestamp_utc");
    CHECK(stamp.size() == 20);
    CHECK(stamp.back() == 'Z');
}

TEST_CASE("generate writes labeled synthetic rows with a manifest") {
    const SharedRun& s = shared();
    REQUIRE(s.train_exit == 0);
    TempDir tmp;
    const std::string out = (tmp / "synth.csv").string();

    const auto r = cli("generate --model " + s.run_dir + " --n 10 --out " + out +
                       " --seed 3");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("10") != std::string::npos);

    const LabeledDataset ds = load_csv(out);
    REQUIRE(ds.n() == 10);
    for (int label : ds.labels) CHECK(label == 1);
    for (std::size_t i = 0; i < ds.images.size(); ++i) {
        CHECK(ds.images.data()[i] >= 0.0);
        CHECK(ds.images.data()[i] <= 255.0);
    }
    CHECK(std::filesystem::exists(tmp / "synth.manifest.json"));

    // same seed, same bytes
    const std::string again = (tmp / "synth2.csv").string();
    const auto r2 = cli("generate --model " + s.run_dir + " --n 10 --out " + again +
                        " --seed 3");
    REQUIRE(r2.exit_code == 0);
    CHECK(fixtures::read_file(out) == fixtures::read_file(again));

    // a direct checkpoint path works too
    const std::string direct = (tmp / "direct.csv").string();
    const auto r3 = cli("generate --model " + s.run_dir + "/class_1/checkpoint.bin" +
                        " --n 4 --out " + direct + " --seed 9");
    CHECK(r3.exit_code == 0);
    CHECK(load_csv(direct).n() == 4);
}

TEST_CASE("generate with n 0 writes a valid empty csv") {
    const SharedRun& s = shared();
    REQUIRE(s.train_exit == 0);
    TempDir tmp;
    const std::string out = (tmp / "none.csv").string();
    const auto r = cli("generate --model " + s.run_dir + " --n 0 --out " + out);
    CHECK(r.exit_code == 0);
    CHECK(load_csv(out).n() == 0);
}

TEST_CASE("generate without a usable checkpoint is a data error") {
    TempDir tmp;
    const auto r = cli("generate --model " + (tmp / "nothing").string() +
                       " --n 3 --out " + (tmp / "x.csv").string());
    CHECK(r.exit_code == 2);
}

TEST_CASE("embed writes the embedding, kl trace and svg") {
    const SharedRun& s = shared();
    TempDir tmp;
    const std::string out = (tmp / "emb.csv").string();
    const std::string svg = (tmp / "emb.svg").string();

    const auto r = cli("embed --data " + s.data_csv + " --out " + out +
                       " --perplexity 5 --iterations 40 --seed 2 --svg " + svg);
    REQUIRE(r.exit_code == 0);

    const auto rows = lines_of(fixtures::read_file(out));
    REQUIRE(rows.size() == 81); // header + 80 points
    CHECK(rows[0] == "source_tag,label,y1,y2");
    CHECK(rows[1].rfind("data,0,", 0) == 0);
    CHECK(rows[80].rfind("data,1,", 0) == 0);

    const auto kl = lines_of(fixtures::read_file(tmp / "emb.kl.csv"));
    REQUIRE(kl.size() == 41); // header + one entry per iteration
    CHECK(kl[0] == "iteration,kl");
    CHECK(kl[1].rfind("0,", 0) == 0);

    const std::string svg_text = fixtures::read_file(svg);
    CHECK(svg_text.find("<circle") != std::string::npos);
    CHECK(std::filesystem::exists(tmp / "emb.manifest.json"));

    // byte-identical on a second run
    const std::string out2 = (tmp / "emb2.csv").string();
    const auto r2 = cli("embed --data " + s.data_csv + " --out " + out2 +
                        " --perplexity 5 --iterations 40 --seed 2");
    REQUIRE(r2.exit_code == 0);
    CHECK(fixtures::read_file(out) == fixtures::read_file(out2));
}

TEST_CASE("embed supports class filtering, sampling and 3-D output") {
    const SharedRun& s = shared();
    TempDir tmp;
    const std::string out = (tmp / "e3.csv").string();
    const auto r = cli("embed --data " + s.data_csv + " --out " + out +
                       " --digit 1 --sample 20 --dims 3 --perplexity 4"
                       " --iterations 25 --seed 7");
    REQUIRE(r.exit_code == 0);
    const auto rows = lines_of(fixtures::read_file(out));
    REQUIRE(rows.size() == 21);
    CHECK(rows[0] == "source_tag,label,y1,y2,y3");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        CHECK(rows[i].rfind("data,1,", 0) == 0);
    }
}

TEST_CASE("embed rejects bad inputs with a data error") {
    const SharedRun& s = shared();
    TempDir tmp;
    // perplexity must stay below the point count
    const auto r = cli("embed --data " + s.data_csv + " --out " + (tmp / "x.csv").string() +
                       " --sample 10 --perplexity 30 --iterations 5");
    CHECK(r.exit_code == 2);

    const auto missing = cli("embed --data " + (tmp / "absent.csv").string() +
                             " --out " + (tmp / "y.csv").string());
    CHECK(missing.exit_code == 2);

    std::ofstream bad(tmp / "bad.csv");
    bad << "1,2,3\n";
    bad.close();
    const auto malformed = cli("embed --data " + (tmp / "bad.csv").string() +
                               " --out " + (tmp / "z.csv").string());
    CHECK(malformed.exit_code == 2);
}

TEST_CASE("compare emits the joint embedding, svg and report") {
    const SharedRun& s = shared();
    REQUIRE(s.train_exit == 0);
    TempDir tmp;
    const std::string synth = (tmp / "synth.csv").string();
    REQUIRE(cli("generate --model " + s.run_dir + " --n 10 --out " + synth +
                " --seed 11").exit_code == 0);

    const std::string prefix = (tmp / "cmp").string();
    const auto r = cli("compare --real " + s.data_csv + " --synthetic " + synth +
                       " --digit 1 --n-real 30 --n-synth 8 --perplexity 6"
                       " --iterations 50 --seed 13 --out-prefix " + prefix);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("overlap") != std::string::npos);

    const auto rows = lines_of(fixtures::read_file(tmp / "cmp.csv"));
    REQUIRE(rows.size() == 39); // header + 30 real + 8 synthetic
    CHECK(rows[0] == "source_tag,label,y1,y2");
    CHECK(rows[1].rfind("real,1,", 0) == 0);
    CHECK(rows[31].rfind("synthetic,1,", 0) == 0);

    const std::string svg = fixtures::read_file(tmp / "cmp.svg");
    CHECK(svg.find("#1f77b4") != std::string::npos); // real points in blue
    CHECK(svg.find("#d62728") != std::string::npos); // synthetic points in red

    const nlohmann::json report =
        nlohmann::json::parse(fixtures::read_file(tmp / "cmp.report.json"));
    CHECK(report.at("n_real").get<int>() == 30);
    CHECK(report.at("n_synthetic").get<int>() == 8);
    CHECK(report.at("overlap_ratio").get<double>() >= 0.0);
    CHECK(report.at("knn_real_fraction").get<double>() >= 0.0);
    CHECK(report.at("knn_real_fraction").get<double>() <= 1.0);
    CHECK(std::filesystem::exists(tmp / "cmp.manifest.json"));
}

TEST_CASE("compare rejects synthetic labels that contradict --digit") {
    const SharedRun& s = shared();
    TempDir tmp;
    const std::string synth = (tmp / "synth.csv").string();
    REQUIRE(cli("generate --model " + s.run_dir + " --n 5 --out " + synth +
                " --seed 1").exit_code == 0); // labels are all 1
    const auto r = cli("compare --real " + s.data_csv + " --synthetic " + synth +
                       " --digit 0 --out-prefix " + (tmp / "x").string());
    CHECK(r.exit_code == 2);
}

TEST_CASE("config files fill in flags and explicit flags win") {
    const SharedRun& s = shared();
    TempDir tmp;
    std::ofstream cfg(tmp / "cfg.json");
    cfg << R"({"epochs": 2, "batch_size": 16, "max_batches_per_epoch": 1,)"
        << R"( "snapshot_every": 100, "digit": 1, "seed": 5})";
    cfg.close();

    const std::string run_a = (tmp / "run_a").string();
    const auto a = cli("train --data " + s.data_csv + " --out " + run_a +
                       " --config " + (tmp / "cfg.json").string());
    REQUIRE(a.exit_code == 0);
    const auto hist_a =
        lines_of(fixtures::read_file(std::filesystem::path(run_a) / "class_1/history.csv"));
    CHECK(hist_a.size() == 3); // config's two epochs

    const std::string run_b = (tmp / "run_b").string();
    const auto b = cli("train --data " + s.data_csv + " --out " + run_b +
                       " --config " + (tmp / "cfg.json").string() + " --epochs 1");
    REQUIRE(b.exit_code == 0);
    const auto hist_b =
        lines_of(fixtures::read_file(std::filesystem::path(run_b) / "class_1/history.csv"));
    CHECK(hist_b.size() == 2); // the flag overrode the config file
}

TEST_CASE("a corrupt config file is a data error") {
    const SharedRun& s = shared();
    TempDir tmp;
    std::ofstream cfg(tmp / "broken.json");
    cfg << "{ not json";
    cfg.close();
    const auto r = cli("train --data " + s.data_csv + " --out " + (tmp / "r").string() +
                       " --config " + (tmp / "broken.json").string());
    CHECK(r.exit_code == 2);
}

TEST_CASE("malformed data files exit with the data error code") {
    TempDir tmp;
    std::ofstream img(tmp / "garbage.idx", std::ios::binary);
    img << "this is not idx data at all";
    img.close();
    std::ofstream lab(tmp / "garbage_labels.idx", std::ios::binary);
    lab << "nor is this";
    lab.close();
    const auto r = cli("train --data " + (tmp / "garbage.idx").string() + " " +
                       (tmp / "garbage_labels.idx").string() + " --out " +
                       (tmp / "r").string() + " --digit 1 --epochs 1");
    CHECK(r.exit_code == 2);
}
