#pragma once

#include <string>
#include <string_view>

#include "shapesense/nn/model.hpp"

namespace shapesense::nn {

// Model file layout:
//   {"format": "shapesense-model", "version": 1,
//    "spec": {"name": ..., "input": [4,4,1],
//             "layers": [{"kind": "conv", "kernels": 16, "size": 2, "activation": "tanh"}, ...]},
//    "params": [{"weight_shape": [...], "weight": [...], "bias": [...]}, ...],
//    "norm": {"mu": [16], "sigma": [16]}}
// params has one entry per conv/dense layer, flattened row-major.

std::string model_to_json(const Model& model);

/// Throws SchemaError on any structural or shape inconsistency.
Model model_from_json(std::string_view text);

std::string spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(std::string_view text);

}  // namespace shapesense::nn
