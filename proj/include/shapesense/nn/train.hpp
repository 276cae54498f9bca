#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "shapesense/dataset.hpp"
#include "shapesense/nn/adam.hpp"
#include "shapesense/nn/model.hpp"

namespace shapesense::nn {

enum class LrSchedule { constant, cosine };

struct TrainConfig {
    double lr = 1e-2;  // rate of the first epoch
    int batch_size = 32;
    int epochs = 500;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps_adam = 1e-8;
    std::uint64_t seed = 0;
    bool shuffle = true;
    // cosine: per-epoch anneal from lr down to lr * final_lr_fraction.
    LrSchedule schedule = LrSchedule::cosine;
    double final_lr_fraction = 1e-2;

    void validate() const;
    double lr_at(int epoch) const;
    AdamConfig adam(int epoch) const { return {lr_at(epoch), beta1, beta2, eps_adam}; }
};

std::string_view to_string(LrSchedule s);
LrSchedule schedule_from_string(std::string_view s);

struct TrainHistory {
    std::vector<double> train_mse;  // sample-weighted mean of batch losses over the epoch
    std::vector<double> val_mse;    // after the epoch; NaN when the validation split is empty
    std::int64_t optimizer_steps = 0;
};

struct TrainResult {
    Model model;
    TrainHistory history;
};

/// Mini-batch Adam on the training split of a split, normalized dataset.
/// Throws MissingSplit / MissingNormalization.
TrainResult train(const ModelSpec& spec, const Dataset& dataset, const TrainConfig& config);

/// Normalized images and encoded targets for a set of indices.
struct Batch {
    std::vector<FeatureImage> images;
    std::vector<TargetVector> targets;
};
Batch make_batch(const Dataset& dataset, const NormStats& norm, const std::vector<std::size_t>& indices);

/// Mean over samples of the summed squared error.
double batch_mse(const Model& model, const Batch& batch);

}  // namespace shapesense::nn
