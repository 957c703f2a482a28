#include "support/fixtures.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gantsne/rng.hpp"

namespace fixtures {

namespace fs = std::filesystem;

TempDir::TempDir() {
    static std::atomic<unsigned> counter{0};
    const auto ticks = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = fs::temp_directory_path() /
            ("gantsne_test_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++) + "_" + std::to_string(ticks % 1000000));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec); // best effort
}

namespace {

struct Segment {
    double x1, y1, x2, y2;
};

// Seven-segment layout on the 28 x 28 canvas (x right, y down):
//
//        A (9,5)-(19,5)
//   F |         | B
//        G (9,14)-(19,14)
//   E |         | C
//        D (9,23)-(19,23)
const Segment kSegments[7] = {
    {9, 5, 19, 5},    // A
    {19, 5, 19, 14},  // B
    {19, 14, 19, 23}, // C
    {9, 23, 19, 23},  // D
    {9, 14, 9, 23},   // E
    {9, 5, 9, 14},    // F
    {9, 14, 19, 14},  // G
};

// Classic segment masks, bit k lights kSegments[k].
constexpr unsigned kDigitMask[10] = {0x3F, 0x06, 0x5B, 0x4F, 0x66,
                                     0x6D, 0x7D, 0x07, 0x7F, 0x6F};

double segment_distance(double px, double py, const Segment& s) {
    const double vx = s.x2 - s.x1, vy = s.y2 - s.y1;
    const double wx = px - s.x1, wy = py - s.y1;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? (wx * vx + wy * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = px - (s.x1 + t * vx);
    const double dy = py - (s.y1 + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

void render_digit(double* row, int digit, gantsne::Rng& rng) {
    const double dx = double(rng.below(5)) - 2.0; // +-2 px translation
    const double dy = double(rng.below(5)) - 2.0;
    const double bright = 190.0 + double(rng.below(66)); // peak stroke value
    const double radius = 1.0 + 0.6 * rng.next_unit();   // stroke half-width
    const unsigned mask = kDigitMask[digit];
    for (std::size_t y = 0; y < gantsne::kImageSide; ++y) {
        for (std::size_t x = 0; x < gantsne::kImageSide; ++x) {
            double best = 1e30;
            for (int s = 0; s < 7; ++s) {
                if (!((mask >> s) & 1U)) continue;
                const double d =
                    segment_distance(double(x) - dx, double(y) - dy, kSegments[s]);
                best = std::min(best, d);
            }
            const double v = bright * std::clamp(1.2 - best / radius, 0.0, 1.0);
            row[y * gantsne::kImageSide + x] = std::round(v);
        }
    }
}

} // namespace

gantsne::LabeledDataset digit_images(int digit, std::size_t n, std::uint64_t seed) {
    if (digit < 0 || digit > 9) throw std::invalid_argument("digit outside [0,9]");
    gantsne::LabeledDataset ds;
    ds.range = gantsne::PixelRange::Raw0_255;
    ds.images = gantsne::Matrix(n, gantsne::kImagePixels);
    ds.labels.assign(n, digit);
    gantsne::Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        render_digit(ds.images.data() + i * gantsne::kImagePixels, digit, rng);
    }
    return ds;
}

gantsne::LabeledDataset digit_corpus(const std::vector<std::size_t>& counts,
                                     std::uint64_t seed) {
    if (counts.size() > 10) throw std::invalid_argument("more than 10 digit classes");
    std::size_t total = 0;
    for (std::size_t c : counts) total += c;
    gantsne::LabeledDataset ds;
    ds.range = gantsne::PixelRange::Raw0_255;
    ds.images = gantsne::Matrix(total, gantsne::kImagePixels);
    ds.labels.reserve(total);
    gantsne::Rng rng(seed);
    std::size_t row = 0;
    for (std::size_t d = 0; d < counts.size(); ++d) {
        for (std::size_t i = 0; i < counts[d]; ++i, ++row) {
            render_digit(ds.images.data() + row * gantsne::kImagePixels, int(d), rng);
            ds.labels.push_back(int(d));
        }
    }
    return ds;
}

gantsne::Matrix two_blobs(std::size_t per_blob, std::size_t dims, double separation,
                          std::uint64_t seed, std::vector<int>* labels_out) {
    gantsne::Rng rng(seed);
    gantsne::Matrix x = gantsne::rand_normal(rng, 2 * per_blob, dims);
    const double off = separation / std::sqrt(double(dims));
    for (std::size_t i = per_blob; i < 2 * per_blob; ++i) {
        for (std::size_t j = 0; j < dims; ++j) x(i, j) += off;
    }
    if (labels_out) {
        labels_out->assign(2 * per_blob, 0);
        for (std::size_t i = per_blob; i < 2 * per_blob; ++i) (*labels_out)[i] = 1;
    }
    return x;
}

gantsne::AffinityMatrix random_joint_p(std::size_t n, std::size_t dims,
                                       double perplexity, std::uint64_t seed) {
    gantsne::Rng rng(seed);
    const gantsne::Matrix x = gantsne::rand_normal(rng, n, dims);
    return gantsne::symmetrize_p(gantsne::conditional_p(x, perplexity).p);
}

double max_grad_rel_error(gantsne::DenseNet& net, const gantsne::Matrix& x,
                          const gantsne::Matrix& targets, double h, double floor) {
    using namespace gantsne;
    const auto loss_at = [&]() {
        return bce_loss(forward_inference(net, x), targets).loss;
    };
    const ForwardResult fr = forward(net, x);
    const BceResult bce = bce_loss(fr.output, targets);
    const Gradients grads = backward(net, fr.tape, bce.dloss_dpred);

    double worst = 0.0;
    const auto probe = [&](Matrix& param, const Matrix& grad) {
        for (std::size_t i = 0; i < param.size(); ++i) {
            const double saved = param.data()[i];
            param.data()[i] = saved + h;
            const double up = loss_at();
            param.data()[i] = saved - h;
            const double down = loss_at();
            param.data()[i] = saved;
            const double fd = (up - down) / (2.0 * h);
            const double denom = std::max(std::abs(fd), floor);
            worst = std::max(worst, std::abs(grad.data()[i] - fd) / denom);
        }
    };
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        probe(net.layers[l].weights, grads.weight_grads[l]);
        probe(net.layers[l].biases, grads.bias_grads[l]);
    }
    return worst;
}

double max_kl_grad_rel_error(const gantsne::AffinityMatrix& p, gantsne::Matrix y,
                             double h, double floor) {
    using namespace gantsne;
    const Matrix analytic = kl_gradient(p, y);
    const auto kl_at = [&]() { return kl_divergence(p, joint_q(y).q); };
    double worst = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double saved = y.data()[i];
        y.data()[i] = saved + h;
        const double up = kl_at();
        y.data()[i] = saved - h;
        const double down = kl_at();
        y.data()[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max(std::abs(fd), floor);
        worst = std::max(worst, std::abs(analytic.data()[i] - fd) / denom);
    }
    return worst;
}

ProcResult run_process(const std::string& command) {
    TempDir tmp;
    const fs::path out_path = tmp.path() / "stdout.txt";
    const fs::path err_path = tmp.path() / "stderr.txt";
    const std::string full =
        command + " > " + out_path.string() + " 2> " + err_path.string();
    const int status = std::system(full.c_str());
    ProcResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out_path);
    r.err = read_file(err_path);
    return r;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace fixtures
