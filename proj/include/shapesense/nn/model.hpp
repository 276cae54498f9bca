#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapesense/dataset.hpp"
#include "shapesense/nn/layers.hpp"
#include "shapesense/nn/tensor.hpp"

namespace shapesense::nn {

enum class LayerKind { conv, dense, flatten };

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    int units = 0;        // kernels for conv, neurons for dense
    int kernel_size = 0;  // conv only
    Activation activation = Activation::tanh;

    static LayerSpec conv(int kernels, int size, Activation act = Activation::tanh) {
        return {LayerKind::conv, kernels, size, act};
    }
    static LayerSpec dense(int units, Activation act = Activation::tanh) {
        return {LayerKind::dense, units, 0, act};
    }
    static LayerSpec flatten() { return {LayerKind::flatten, 0, 0, Activation::linear}; }

    bool has_params() const { return kind != LayerKind::flatten; }
    bool operator==(const LayerSpec&) const = default;
};

struct ModelSpec {
    std::string name;
    std::vector<LayerSpec> layers;
    std::array<std::size_t, 3> input{4, 4, 1};  // H, W, C

    /// Layer list with the implicit flatten inserted ahead of the first dense
    /// layer that receives a spatial tensor. Throws std::invalid_argument on
    /// bad sizes or a conv after a dense layer.
    std::vector<LayerSpec> resolved() const;

    /// Input shape of each resolved layer, plus the final output shape.
    std::vector<Shape> shapes() const;

    std::size_t output_dim() const;

    /// Compact notation, e.g. "C16,2 C8,2 F16 F8 F3".
    std::string describe() const;

    bool operator==(const ModelSpec&) const = default;
};

/// Total learnable scalars (weights + biases).
std::size_t param_count(const ModelSpec& spec);

/// Learnable weights and biases; params holds (weight, bias) for each
/// parametric layer in resolved order. Conv weights are (K, S, S, C_in),
/// dense weights (in, out).
struct Model {
    ModelSpec spec;
    std::vector<LayerSpec> layers;  // resolved
    std::vector<Tensor> params;
    std::optional<NormStats> norm;  // statistics the model was trained with

    static Model zeros(const ModelSpec& spec);
    /// Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    static Model glorot(const ModelSpec& spec, std::uint64_t seed);

    std::size_t param_count() const;
};

using Gradients = std::vector<Tensor>;

Gradients zero_gradients(const Model& model);

/// Wraps a 4x4 feature image as an (H, W, 1) tensor.
Tensor image_tensor(const FeatureImage& image);

/// Per-layer outputs of one forward pass; activations[0] is the input.
struct Trace {
    std::vector<Tensor> activations;
    const Tensor& output() const { return activations.back(); }
};

Trace forward_trace(const Model& model, const Tensor& input);

std::vector<double> forward(const Model& model, const FeatureImage& image);

/// (1/N) sum_i ||pred_i - target_i||^2.
double mse_loss(std::span<const std::vector<double>> pred, std::span<const std::vector<double>> target);

/// Adds the gradient of the batch MSE to grads and returns the batch loss.
double accumulate_gradients(const Model& model, std::span<const FeatureImage> images,
                            std::span<const TargetVector> targets, Gradients& grads);

Gradients backward(const Model& model, std::span<const FeatureImage> images,
                   std::span<const TargetVector> targets);

Gradients backward(const Model& model, const FeatureImage& image, const TargetVector& target);

}  // namespace shapesense::nn
