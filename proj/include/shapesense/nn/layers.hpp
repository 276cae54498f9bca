#pragma once

#include <string>
#include <string_view>

#include "shapesense/nn/tensor.hpp"

namespace shapesense::nn {

enum class Activation { tanh, linear };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

double activate(Activation a, double z);
/// Derivative of the activation expressed through its output y = act(z).
double activation_slope(Activation a, double y);

/// Valid cross-correlation, stride 1.
/// input (H, W, C), weights (K, S, S, C), bias (K) -> output (H-S+1, W-S+1, K).
Tensor conv2d_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, Activation act);

/// Treats input as a flat vector of length n. weights (n, U), bias (U) -> (U).
Tensor dense_forward(const Tensor& input, const Tensor& weights, const Tensor& bias, Activation act);

/// Reverse pass of conv2d_forward. `output` is the post-activation result of
/// the forward call and `grad_output` is dLoss/d(output). Parameter gradients
/// are accumulated (+=) into grad_weights / grad_bias. Returns dLoss/d(input)
/// unless want_input_grad is false, in which case an empty tensor is returned.
Tensor conv2d_backward(const Tensor& input, const Tensor& weights, Activation act,
                       const Tensor& output, const Tensor& grad_output, Tensor& grad_weights,
                       Tensor& grad_bias, bool want_input_grad = true);

Tensor dense_backward(const Tensor& input, const Tensor& weights, Activation act,
                      const Tensor& output, const Tensor& grad_output, Tensor& grad_weights,
                      Tensor& grad_bias, bool want_input_grad = true);

}  // namespace shapesense::nn
