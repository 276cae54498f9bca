#pragma once

#include <cstdint>
#include <vector>

#include "shapesense/nn/tensor.hpp"

namespace shapesense::nn {

struct AdamConfig {
    double lr = 1e-2;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moment estimates, one pair per parameter tensor.
struct AdamState {
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::int64_t step = 0;

    static AdamState zeros_like(const std::vector<Tensor>& params);
};

/// One bias-corrected Adam update of every parameter tensor.
void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
               const AdamConfig& config);

}  // namespace shapesense::nn
