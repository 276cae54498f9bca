#include "shapesense/nn/layers.hpp"

#include <cmath>

#include "shapesense/errors.hpp"

namespace shapesense::nn {

std::string_view to_string(Activation a) { return a == Activation::tanh ? "tanh" : "linear"; }

Activation activation_from_string(std::string_view s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "linear") return Activation::linear;
    throw SchemaError("unknown activation '" + std::string(s) + "'");
}

double activate(Activation a, double z) { return a == Activation::tanh ? std::tanh(z) : z; }

double activation_slope(Activation a, double y) { return a == Activation::tanh ? 1.0 - y * y : 1.0; }

namespace {

struct ConvDims {
    std::size_t h, w, c, k, s, oh, ow;
};

ConvDims conv_dims(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    if (input.rank() != 3) throw ShapeMismatch("conv input must be (H, W, C)");
    if (weights.rank() != 4) throw ShapeMismatch("conv weights must be (K, S, S, C)");
    ConvDims d{input.shape[0], input.shape[1], input.shape[2], weights.shape[0], weights.shape[1], 0, 0};
    if (weights.shape[2] != d.s) throw ShapeMismatch("conv kernels must be square");
    if (weights.shape[3] != d.c) throw ShapeMismatch("conv kernel depth does not match input channels");
    if (bias.size() != d.k) throw ShapeMismatch("conv bias length does not match kernel count");
    if (d.h < d.s || d.w < d.s) throw ShapeMismatch("conv kernel larger than input");
    d.oh = d.h - d.s + 1;
    d.ow = d.w - d.s + 1;
    return d;
}

void check_dense(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    if (weights.rank() != 2) throw ShapeMismatch("dense weights must be (in, out)");
    if (input.size() != weights.shape[0])
        throw ShapeMismatch("dense input length " + std::to_string(input.size()) +
                            " does not match weight rows " + std::to_string(weights.shape[0]));
    if (bias.size() != weights.shape[1]) throw ShapeMismatch("dense bias length does not match units");
}

}  // namespace

Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, Activation act) {
    const auto d = conv_dims(input, weights, bias);
    Tensor out({d.oh, d.ow, d.k});
    for (std::size_t y = 0; y < d.oh; ++y)
        for (std::size_t x = 0; x < d.ow; ++x)
            for (std::size_t k = 0; k < d.k; ++k) {
                double z = bias[k];
                for (std::size_t dy = 0; dy < d.s; ++dy)
                    for (std::size_t dx = 0; dx < d.s; ++dx) {
                        const double* in = &input.data[((y + dy) * d.w + (x + dx)) * d.c];
                        const double* w = &weights.data[((k * d.s + dy) * d.s + dx) * d.c];
                        for (std::size_t c = 0; c < d.c; ++c) z += w[c] * in[c];
                    }
                out.data[(y * d.ow + x) * d.k + k] = activate(act, z);
            }
    return out;
}

Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, Activation act) {
    check_dense(input, weights, bias);
    const std::size_t n = weights.shape[0], u = weights.shape[1];
    std::vector<double> z(bias.data);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = input.data[i];
        const double* row = &weights.data[i * u];
        for (std::size_t o = 0; o < u; ++o) z[o] += xi * row[o];
    }
    for (auto& v : z) v = activate(act, v);
    return Tensor({u}, std::move(z));
}

Tensor conv2d_backward(const Tensor& input, const Tensor& weights, Activation act,
                       const Tensor& output, const Tensor& grad_output, Tensor& grad_weights,
                       Tensor& grad_bias, bool want_input_grad) {
    const auto d = conv_dims(input, weights, grad_bias);
    if (grad_output.size() != d.oh * d.ow * d.k || output.size() != grad_output.size())
        throw ShapeMismatch("conv output gradient has the wrong size");
    if (grad_weights.size() != weights.size()) throw ShapeMismatch("conv weight gradient has the wrong size");

    Tensor grad_input;
    if (want_input_grad) grad_input = Tensor(input.shape);
    for (std::size_t y = 0; y < d.oh; ++y)
        for (std::size_t x = 0; x < d.ow; ++x)
            for (std::size_t k = 0; k < d.k; ++k) {
                const std::size_t o = (y * d.ow + x) * d.k + k;
                const double dz = grad_output.data[o] * activation_slope(act, output.data[o]);
                grad_bias.data[k] += dz;
                for (std::size_t dy = 0; dy < d.s; ++dy)
                    for (std::size_t dx = 0; dx < d.s; ++dx) {
                        const std::size_t in_off = ((y + dy) * d.w + (x + dx)) * d.c;
                        const std::size_t w_off = ((k * d.s + dy) * d.s + dx) * d.c;
                        for (std::size_t c = 0; c < d.c; ++c) {
                            grad_weights.data[w_off + c] += dz * input.data[in_off + c];
                            if (want_input_grad) grad_input.data[in_off + c] += dz * weights.data[w_off + c];
                        }
                    }
            }
    return grad_input;
}

Tensor dense_backward(const Tensor& input, const Tensor& weights, Activation act,
                      const Tensor& output, const Tensor& grad_output, Tensor& grad_weights,
                      Tensor& grad_bias, bool want_input_grad) {
    check_dense(input, weights, grad_bias);
    const std::size_t n = weights.shape[0], u = weights.shape[1];
    if (grad_output.size() != u || output.size() != u)
        throw ShapeMismatch("dense output gradient has the wrong size");
    if (grad_weights.size() != weights.size()) throw ShapeMismatch("dense weight gradient has the wrong size");

    std::vector<double> dz(u);
    for (std::size_t o = 0; o < u; ++o) {
        dz[o] = grad_output.data[o] * activation_slope(act, output.data[o]);
        grad_bias.data[o] += dz[o];
    }
    Tensor grad_input;
    if (want_input_grad) grad_input = Tensor(input.shape);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = input.data[i];
        double* grow = &grad_weights.data[i * u];
        const double* wrow = &weights.data[i * u];
        double gi = 0.0;
        for (std::size_t o = 0; o < u; ++o) {
            grow[o] += xi * dz[o];
            gi += wrow[o] * dz[o];
        }
        if (want_input_grad) grad_input.data[i] = gi;
    }
    return grad_input;
}

}  // namespace shapesense::nn
