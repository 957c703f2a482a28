#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "gantsne/matrix.hpp"
#include "gantsne/rng.hpp"

namespace gantsne {

enum class Activation : std::uint32_t {
    Identity = 0,
    LeakyReLU = 1, // slope applies to x < 0
    Sigmoid = 2,
    Tanh = 3,
};

struct Layer {
    Matrix weights; // in x out
    Matrix biases;  // 1 x out
    Activation activation = Activation::Identity;
    double slope = 0.0; // LeakyReLU only

    std::size_t in_size() const { return weights.rows(); }
    std::size_t out_size() const { return weights.cols(); }
};

// Feed-forward stack of dense layers. Consecutive layer sizes must chain.
struct DenseNet {
    std::vector<Layer> layers;

    std::size_t input_size() const { return layers.front().in_size(); }
    std::size_t output_size() const { return layers.back().out_size(); }
    std::size_t parameter_count() const;
};

// Layer with weights ~ N(0, 0.02^2) and zero biases.
Layer make_layer(std::size_t in, std::size_t out, Activation act, Rng& rng,
                 double slope = 0.0);

// Activation cache from a forward pass; consumed by backward().
struct ForwardTape {
    Matrix input;                        // the batch fed in
    std::vector<Matrix> pre_activations; // z_k per layer
    std::vector<Matrix> activations;     // a_k per layer (a_last == output)
};

struct ForwardResult {
    Matrix output;
    ForwardTape tape;
};

// Batched forward pass; x is batch x input_size.
ForwardResult forward(const DenseNet& net, const Matrix& x);

// Forward without recording a tape (inference only).
Matrix forward_inference(const DenseNet& net, const Matrix& x);

// Per-layer parameter gradients, shapes mirroring the network.
struct Gradients {
    std::vector<Matrix> weight_grads;
    std::vector<Matrix> bias_grads;

    void add(const Gradients& other); // elementwise accumulate
};

// Exact reverse-mode gradients for every weight and bias. dloss_doutput is the
// loss gradient w.r.t. the network output. When input_grad is non-null it
// receives the loss gradient w.r.t. the input batch (used to chain the GAN's
// generator behind the frozen discriminator). Throws ContractError when the
// tape does not match the network or the upstream gradient shape.
Gradients backward(const DenseNet& net, const ForwardTape& tape,
                   const Matrix& dloss_doutput, Matrix* input_grad = nullptr);

// Input gradient only; skips the parameter-gradient work.
Matrix backward_input(const DenseNet& net, const ForwardTape& tape,
                      const Matrix& dloss_doutput);

struct BceResult {
    double loss = 0.0;
    Matrix dloss_dpred;
};

// Mean binary cross entropy over all elements, with predictions clamped to
// [1e-7, 1 - 1e-7] so the loss cannot diverge at 0/1. Gradient is analytic.
BceResult bce_loss(const Matrix& predictions, const Matrix& targets);

inline constexpr double kBceClamp = 1e-7;

// Adam with bias correction. Defaults follow the adversarial-training choice:
// beta1 = 0.5, beta2 = 0.999, eps = 1e-8, lr = 2e-4.
struct AdamState {
    std::vector<Matrix> m_weights, v_weights;
    std::vector<Matrix> m_biases, v_biases;
    std::uint64_t step_count = 0;
    double beta1 = 0.5;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 2e-4;
};

AdamState make_adam_state(const DenseNet& net, double learning_rate = 2e-4);

// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps); increments step_count.
void adam_apply(DenseNet& net, const Gradients& grads, AdamState& state);

// Binary stream round-trip for checkpoints (little-endian, layout documented
// in the README). Bit-exact.
void write_net(std::ostream& out, const DenseNet& net);
DenseNet read_net(std::istream& in);
void write_adam(std::ostream& out, const AdamState& state);
AdamState read_adam(std::istream& in);

} // namespace gantsne
