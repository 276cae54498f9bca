#include "shapesense/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "shapesense/errors.hpp"
#include "shapesense/rng.hpp"

namespace shapesense::nn {

void TrainConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be positive");
    if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw std::invalid_argument("adam betas must lie in [0, 1)");
    if (!(eps_adam > 0.0)) throw std::invalid_argument("adam epsilon must be positive");
    if (!(final_lr_fraction > 0.0 && final_lr_fraction <= 1.0))
        throw std::invalid_argument("final_lr_fraction must lie in (0, 1]");
}

double TrainConfig::lr_at(int epoch) const {
    if (schedule == LrSchedule::constant || epochs <= 1) return lr;
    const double progress = static_cast<double>(epoch) / static_cast<double>(epochs - 1);
    const double floor = lr * final_lr_fraction;
    return floor + 0.5 * (lr - floor) * (1.0 + std::cos(std::numbers::pi * progress));
}

std::string_view to_string(LrSchedule s) { return s == LrSchedule::cosine ? "cosine" : "constant"; }

LrSchedule schedule_from_string(std::string_view s) {
    if (s == "cosine") return LrSchedule::cosine;
    if (s == "constant") return LrSchedule::constant;
    throw std::invalid_argument("unknown learning-rate schedule '" + std::string(s) + "'");
}

Batch make_batch(const Dataset& dataset, const NormStats& norm, const std::vector<std::size_t>& indices) {
    Batch b;
    b.images.reserve(indices.size());
    b.targets.reserve(indices.size());
    for (auto i : indices) {
        const auto& s = dataset.samples.at(i);
        b.images.push_back(apply_normalization(s.frame, norm));
        b.targets.push_back(encode_target(s.label));
    }
    return b;
}

double batch_mse(const Model& model, const Batch& batch) {
    if (batch.images.empty()) return std::numeric_limits<double>::quiet_NaN();
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.images.size(); ++i) {
        const auto pred = forward(model, batch.images[i]);
        if (pred.size() != batch.targets[i].size()) throw ShapeMismatch("model output width does not match target");
        for (std::size_t j = 0; j < pred.size(); ++j) {
            const double d = pred[j] - batch.targets[i][j];
            sum += d * d;
        }
    }
    return sum / static_cast<double>(batch.images.size());
}

TrainResult train(const ModelSpec& spec, const Dataset& dataset, const TrainConfig& config) {
    config.validate();
    if (!dataset.split) throw MissingSplit();
    if (!dataset.norm) throw MissingNormalization();
    if (dataset.split->train.empty()) throw std::invalid_argument("training split is empty");

    TrainResult result{Model::glorot(spec, mix_seed(config.seed, 0)), {}};
    Model& model = result.model;
    model.norm = dataset.norm;

    const Batch train_set = make_batch(dataset, *dataset.norm, dataset.split->train);
    const Batch val_set = make_batch(dataset, *dataset.norm, dataset.split->val);

    AdamState adam = AdamState::zeros_like(model.params);
    Gradients grads = zero_gradients(model);
    Rng shuffle_rng(mix_seed(config.seed, 1));

    const std::size_t n = train_set.images.size();
    const auto batch = static_cast<std::size_t>(config.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<FeatureImage> images;
    std::vector<TargetVector> targets;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const AdamConfig step_config = config.adam(epoch);
        if (config.shuffle) shuffle_rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t end = std::min(n, start + batch);
            images.clear();
            targets.clear();
            for (std::size_t k = start; k < end; ++k) {
                images.push_back(train_set.images[order[k]]);
                targets.push_back(train_set.targets[order[k]]);
            }
            for (auto& g : grads) g.fill(0.0);
            const double loss = accumulate_gradients(model, images, targets, grads);
            epoch_loss += loss * static_cast<double>(end - start);
            adam_step(model.params, grads, adam, step_config);
        }
        result.history.train_mse.push_back(epoch_loss / static_cast<double>(n));
        result.history.val_mse.push_back(batch_mse(model, val_set));
    }
    result.history.optimizer_steps = adam.step;
    return result;
}

}  // namespace shapesense::nn
