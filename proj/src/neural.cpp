#include "gantsne/neural.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

namespace gantsne {

namespace {

double activate(double z, Activation act, double slope) {
    switch (act) {
        case Activation::Identity: return z;
        case Activation::LeakyReLU: return z >= 0.0 ? z : slope * z;
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-z));
        case Activation::Tanh: return std::tanh(z);
    }
    return z;
}

// Derivative expressed through the pre-activation z and the activation a.
double activate_grad(double z, double a, Activation act, double slope) {
    switch (act) {
        case Activation::Identity: return 1.0;
        case Activation::LeakyReLU: return z >= 0.0 ? 1.0 : slope;
        case Activation::Sigmoid: return a * (1.0 - a);
        case Activation::Tanh: return 1.0 - a * a;
    }
    return 1.0;
}

void check_tape(const DenseNet& net, const ForwardTape& tape,
                const Matrix& dloss_doutput) {
    if (tape.pre_activations.size() != net.layers.size() ||
        tape.activations.size() != net.layers.size()) {
        throw ContractError("backward: tape layer count does not match network");
    }
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        if (tape.pre_activations[k].cols() != net.layers[k].out_size()) {
            throw ContractError("backward: tape layer " + std::to_string(k) +
                                " width does not match network");
        }
    }
    const Matrix& out = tape.activations.back();
    if (dloss_doutput.rows() != out.rows() || dloss_doutput.cols() != out.cols()) {
        throw ContractError("backward: upstream gradient shape does not match output");
    }
    if (tape.input.cols() != net.input_size()) {
        throw ContractError("backward: tape input width does not match network");
    }
}

void write_u32(std::ostream& out, std::uint32_t v) {
    std::array<unsigned char, 4> b = {
        static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b.data()), 4);
}

std::uint32_t read_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (!in) throw LengthError("checkpoint stream truncated (u32)");
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) |
           (std::uint32_t(b[2]) << 16) | (std::uint32_t(b[3]) << 24);
}

void write_u64(std::ostream& out, std::uint64_t v) {
    std::array<unsigned char, 8> b{};
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b.data()), 8);
}

std::uint64_t read_u64(std::istream& in) {
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char*>(b.data()), 8);
    if (!in) throw LengthError("checkpoint stream truncated (u64)");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& out, double v) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &v, 8);
    write_u64(out, bits);
}

double read_f64(std::istream& in) {
    const std::uint64_t bits = read_u64(in);
    double v = 0.0;
    std::memcpy(&v, &bits, 8);
    return v;
}

void write_matrix(std::ostream& out, const Matrix& m) {
    write_u32(out, std::uint32_t(m.rows()));
    write_u32(out, std::uint32_t(m.cols()));
    for (std::size_t i = 0; i < m.size(); ++i) write_f64(out, m.data()[i]);
}

Matrix read_matrix(std::istream& in) {
    const std::uint32_t rows = read_u32(in);
    const std::uint32_t cols = read_u32(in);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = read_f64(in);
    return m;
}

} // namespace

std::size_t DenseNet::parameter_count() const {
    std::size_t total = 0;
    for (const auto& layer : layers) {
        total += layer.weights.size() + layer.biases.size();
    }
    return total;
}

Layer make_layer(std::size_t in, std::size_t out, Activation act, Rng& rng,
                 double slope) {
    Layer layer;
    layer.weights = rand_normal(rng, in, out);
    for (std::size_t i = 0; i < layer.weights.size(); ++i) {
        layer.weights.data()[i] *= 0.02;
    }
    layer.biases = Matrix(1, out);
    layer.activation = act;
    layer.slope = slope;
    return layer;
}

ForwardResult forward(const DenseNet& net, const Matrix& x) {
    if (x.cols() != net.input_size()) {
        throw ShapeError("forward: input has " + std::to_string(x.cols()) +
                         " columns, network expects " +
                         std::to_string(net.input_size()));
    }
    ForwardResult result;
    result.tape.input = x;
    result.tape.pre_activations.reserve(net.layers.size());
    result.tape.activations.reserve(net.layers.size());

    const Matrix* current = &x;
    for (const auto& layer : net.layers) {
        Matrix z = matmul(*current, layer.weights);
        const double* bias = layer.biases.data();
        for (std::size_t i = 0; i < z.rows(); ++i) {
            double* row = z.data() + i * z.cols();
            for (std::size_t j = 0; j < z.cols(); ++j) row[j] += bias[j];
        }
        Matrix a(z.rows(), z.cols());
        for (std::size_t i = 0; i < z.size(); ++i) {
            a.data()[i] = activate(z.data()[i], layer.activation, layer.slope);
        }
        result.tape.pre_activations.push_back(std::move(z));
        result.tape.activations.push_back(std::move(a));
        current = &result.tape.activations.back();
    }
    result.output = result.tape.activations.back();
    return result;
}

Matrix forward_inference(const DenseNet& net, const Matrix& x) {
    if (x.cols() != net.input_size()) {
        throw ShapeError("forward: input has " + std::to_string(x.cols()) +
                         " columns, network expects " +
                         std::to_string(net.input_size()));
    }
    Matrix current = x;
    for (const auto& layer : net.layers) {
        Matrix z = matmul(current, layer.weights);
        const double* bias = layer.biases.data();
        for (std::size_t i = 0; i < z.rows(); ++i) {
            double* row = z.data() + i * z.cols();
            for (std::size_t j = 0; j < z.cols(); ++j) row[j] += bias[j];
        }
        for (std::size_t i = 0; i < z.size(); ++i) {
            z.data()[i] = activate(z.data()[i], layer.activation, layer.slope);
        }
        current = std::move(z);
    }
    return current;
}

void Gradients::add(const Gradients& other) {
    for (std::size_t k = 0; k < weight_grads.size(); ++k) {
        for (std::size_t i = 0; i < weight_grads[k].size(); ++i) {
            weight_grads[k].data()[i] += other.weight_grads[k].data()[i];
        }
        for (std::size_t i = 0; i < bias_grads[k].size(); ++i) {
            bias_grads[k].data()[i] += other.bias_grads[k].data()[i];
        }
    }
}

namespace {

// Shared reverse sweep; param_grads may be null when only the input gradient
// is wanted (generator updates through a frozen discriminator).
Matrix backward_impl(const DenseNet& net, const ForwardTape& tape,
                     const Matrix& dloss_doutput, Gradients* param_grads,
                     bool want_input_grad) {
    check_tape(net, tape, dloss_doutput);
    const std::size_t n_layers = net.layers.size();

    Matrix delta = dloss_doutput; // becomes dloss/dz per layer below
    for (std::size_t kk = n_layers; kk-- > 0;) {
        const Layer& layer = net.layers[kk];
        const Matrix& z = tape.pre_activations[kk];
        const Matrix& a = tape.activations[kk];
        for (std::size_t i = 0; i < delta.size(); ++i) {
            delta.data()[i] *= activate_grad(z.data()[i], a.data()[i],
                                             layer.activation, layer.slope);
        }
        if (param_grads) {
            const Matrix& prev = (kk == 0) ? tape.input : tape.activations[kk - 1];
            param_grads->weight_grads[kk] = matmul_tn(prev, delta);
            Matrix bias(1, delta.cols());
            for (std::size_t i = 0; i < delta.rows(); ++i) {
                const double* row = delta.data() + i * delta.cols();
                for (std::size_t j = 0; j < delta.cols(); ++j) {
                    bias.data()[j] += row[j];
                }
            }
            param_grads->bias_grads[kk] = std::move(bias);
        }
        if (kk > 0 || want_input_grad) {
            delta = matmul_nt(delta, layer.weights);
        }
    }
    return want_input_grad ? std::move(delta) : Matrix{};
}

} // namespace

Gradients backward(const DenseNet& net, const ForwardTape& tape,
                   const Matrix& dloss_doutput, Matrix* input_grad) {
    Gradients grads;
    grads.weight_grads.resize(net.layers.size());
    grads.bias_grads.resize(net.layers.size());
    Matrix din = backward_impl(net, tape, dloss_doutput, &grads, input_grad != nullptr);
    if (input_grad) *input_grad = std::move(din);
    return grads;
}

Matrix backward_input(const DenseNet& net, const ForwardTape& tape,
                      const Matrix& dloss_doutput) {
    return backward_impl(net, tape, dloss_doutput, nullptr, true);
}

BceResult bce_loss(const Matrix& predictions, const Matrix& targets) {
    if (predictions.rows() != targets.rows() || predictions.cols() != targets.cols()) {
        throw ShapeError("bce_loss: predictions " + std::to_string(predictions.rows()) +
                         "x" + std::to_string(predictions.cols()) + " vs targets " +
                         std::to_string(targets.rows()) + "x" +
                         std::to_string(targets.cols()));
    }
    const std::size_t count = predictions.size();
    BceResult result;
    result.dloss_dpred = Matrix(predictions.rows(), predictions.cols());
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double p = predictions.data()[i];
        if (p < kBceClamp) p = kBceClamp;
        if (p > 1.0 - kBceClamp) p = 1.0 - kBceClamp;
        const double t = targets.data()[i];
        total += -(t * std::log(p) + (1.0 - t) * std::log(1.0 - p));
        result.dloss_dpred.data()[i] =
            (p - t) / (p * (1.0 - p)) / static_cast<double>(count);
    }
    result.loss = total / static_cast<double>(count);
    return result;
}

AdamState make_adam_state(const DenseNet& net, double learning_rate) {
    AdamState state;
    state.learning_rate = learning_rate;
    for (const auto& layer : net.layers) {
        state.m_weights.emplace_back(layer.weights.rows(), layer.weights.cols());
        state.v_weights.emplace_back(layer.weights.rows(), layer.weights.cols());
        state.m_biases.emplace_back(1, layer.biases.cols());
        state.v_biases.emplace_back(1, layer.biases.cols());
    }
    return state;
}

namespace {

void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                 const AdamState& s, double m_corr, double v_corr) {
    if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
        throw ShapeError("adam_apply: gradient shape " + std::to_string(grad.rows()) +
                         "x" + std::to_string(grad.cols()) + " does not mirror parameter " +
                         std::to_string(param.rows()) + "x" + std::to_string(param.cols()));
    }
    for (std::size_t i = 0; i < param.size(); ++i) {
        const double g = grad.data()[i];
        m.data()[i] = s.beta1 * m.data()[i] + (1.0 - s.beta1) * g;
        v.data()[i] = s.beta2 * v.data()[i] + (1.0 - s.beta2) * g * g;
        const double m_hat = m.data()[i] / m_corr;
        const double v_hat = v.data()[i] / v_corr;
        param.data()[i] -= s.learning_rate * m_hat / (std::sqrt(v_hat) + s.epsilon);
    }
}

} // namespace

void adam_apply(DenseNet& net, const Gradients& grads, AdamState& state) {
    if (grads.weight_grads.size() != net.layers.size()) {
        throw ShapeError("adam_apply: gradient layer count does not match network");
    }
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double m_corr = 1.0 - std::pow(state.beta1, t);
    const double v_corr = 1.0 - std::pow(state.beta2, t);
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        adam_update(net.layers[k].weights, grads.weight_grads[k],
                    state.m_weights[k], state.v_weights[k], state, m_corr, v_corr);
        adam_update(net.layers[k].biases, grads.bias_grads[k],
                    state.m_biases[k], state.v_biases[k], state, m_corr, v_corr);
    }
}

void write_net(std::ostream& out, const DenseNet& net) {
    write_u32(out, std::uint32_t(net.layers.size()));
    for (const auto& layer : net.layers) {
        write_u32(out, std::uint32_t(layer.in_size()));
        write_u32(out, std::uint32_t(layer.out_size()));
        write_u32(out, static_cast<std::uint32_t>(layer.activation));
        write_f64(out, layer.slope);
        write_matrix(out, layer.weights);
        write_matrix(out, layer.biases);
    }
}

DenseNet read_net(std::istream& in) {
    DenseNet net;
    const std::uint32_t n_layers = read_u32(in);
    net.layers.resize(n_layers);
    for (auto& layer : net.layers) {
        const std::uint32_t in_size = read_u32(in);
        const std::uint32_t out_size = read_u32(in);
        const std::uint32_t act = read_u32(in);
        if (act > 3) throw FormatError("checkpoint: unknown activation id " + std::to_string(act));
        layer.activation = static_cast<Activation>(act);
        layer.slope = read_f64(in);
        layer.weights = read_matrix(in);
        layer.biases = read_matrix(in);
        if (layer.weights.rows() != in_size || layer.weights.cols() != out_size ||
            layer.biases.cols() != out_size) {
            throw FormatError("checkpoint: layer dimensions inconsistent");
        }
    }
    return net;
}

void write_adam(std::ostream& out, const AdamState& state) {
    write_u64(out, state.step_count);
    write_f64(out, state.beta1);
    write_f64(out, state.beta2);
    write_f64(out, state.epsilon);
    write_f64(out, state.learning_rate);
    write_u32(out, std::uint32_t(state.m_weights.size()));
    for (std::size_t k = 0; k < state.m_weights.size(); ++k) {
        write_matrix(out, state.m_weights[k]);
        write_matrix(out, state.v_weights[k]);
        write_matrix(out, state.m_biases[k]);
        write_matrix(out, state.v_biases[k]);
    }
}

AdamState read_adam(std::istream& in) {
    AdamState state;
    state.step_count = read_u64(in);
    state.beta1 = read_f64(in);
    state.beta2 = read_f64(in);
    state.epsilon = read_f64(in);
    state.learning_rate = read_f64(in);
    const std::uint32_t n_layers = read_u32(in);
    for (std::uint32_t k = 0; k < n_layers; ++k) {
        state.m_weights.push_back(read_matrix(in));
        state.v_weights.push_back(read_matrix(in));
        state.m_biases.push_back(read_matrix(in));
        state.v_biases.push_back(read_matrix(in));
    }
    return state;
}

} // namespace gantsne
