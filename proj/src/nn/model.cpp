#include "shapesense/nn/model.hpp"

#include <cmath>
#include <stdexcept>

#include "shapesense/errors.hpp"
#include "shapesense/rng.hpp"

namespace shapesense::nn {

std::vector<LayerSpec> ModelSpec::resolved() const {
    if (layers.empty()) throw std::invalid_argument("model has no layers");
    std::vector<LayerSpec> out;
    bool spatial = true;
    for (const auto& l : layers) {
        switch (l.kind) {
            case LayerKind::conv:
                if (!spatial) throw std::invalid_argument("conv layer after flatten/dense");
                if (l.units < 1 || l.kernel_size < 1)
                    throw std::invalid_argument("conv kernels and size must be >= 1");
                break;
            case LayerKind::dense:
                if (l.units < 1) throw std::invalid_argument("dense units must be >= 1");
                if (spatial) {
                    out.push_back(LayerSpec::flatten());
                    spatial = false;
                }
                break;
            case LayerKind::flatten:
                if (!spatial) continue;
                spatial = false;
                break;
        }
        out.push_back(l);
    }
    if (out.back().kind != LayerKind::dense) throw std::invalid_argument("model must end in a dense layer");
    return out;
}

std::vector<Shape> ModelSpec::shapes() const {
    std::vector<Shape> result;
    Shape cur{input[0], input[1], input[2]};
    result.push_back(cur);
    for (const auto& l : resolved()) {
        switch (l.kind) {
            case LayerKind::conv: {
                const auto s = static_cast<std::size_t>(l.kernel_size);
                if (cur[0] < s || cur[1] < s) throw std::invalid_argument("conv kernel larger than its input");
                cur = {cur[0] - s + 1, cur[1] - s + 1, static_cast<std::size_t>(l.units)};
                break;
            }
            case LayerKind::flatten:
                cur = {shape_size(cur)};
                break;
            case LayerKind::dense:
                cur = {static_cast<std::size_t>(l.units)};
                break;
        }
        result.push_back(cur);
    }
    return result;
}

std::size_t ModelSpec::output_dim() const { return shape_size(shapes().back()); }

std::string ModelSpec::describe() const {
    std::string s;
    for (const auto& l : layers) {
        if (!s.empty()) s += ' ';
        switch (l.kind) {
            case LayerKind::conv:
                s += "C" + std::to_string(l.units) + "," + std::to_string(l.kernel_size);
                break;
            case LayerKind::dense:
                s += "F" + std::to_string(l.units);
                break;
            case LayerKind::flatten:
                s += "Flatten";
                break;
        }
        if (l.kind != LayerKind::flatten && l.activation == Activation::linear) s += "(linear)";
    }
    return s;
}

namespace {

// Weight and bias shapes of each parametric layer, in resolved order.
std::vector<Shape> param_shapes(const ModelSpec& spec) {
    const auto layers = spec.resolved();
    const auto io = spec.shapes();
    std::vector<Shape> out;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        const auto u = static_cast<std::size_t>(l.units);
        if (l.kind == LayerKind::conv) {
            const auto s = static_cast<std::size_t>(l.kernel_size);
            out.push_back({u, s, s, io[i][2]});
            out.push_back({u});
        } else if (l.kind == LayerKind::dense) {
            out.push_back({shape_size(io[i]), u});
            out.push_back({u});
        }
    }
    return out;
}

}  // namespace

std::size_t param_count(const ModelSpec& spec) {
    std::size_t n = 0;
    for (const auto& s : param_shapes(spec)) n += shape_size(s);
    return n;
}

Model Model::zeros(const ModelSpec& spec) {
    Model m;
    m.spec = spec;
    m.layers = spec.resolved();
    for (auto& s : param_shapes(spec)) m.params.emplace_back(std::move(s));
    return m;
}

Model Model::glorot(const ModelSpec& spec, std::uint64_t seed) {
    Model m = zeros(spec);
    Rng rng(seed);
    for (std::size_t p = 0; p < m.params.size(); p += 2) {
        auto& w = m.params[p];
        std::size_t fan_in = 0, fan_out = 0;
        if (w.rank() == 4) {
            const std::size_t area = w.shape[1] * w.shape[2];
            fan_in = area * w.shape[3];
            fan_out = area * w.shape[0];
        } else {
            fan_in = w.shape[0];
            fan_out = w.shape[1];
        }
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (auto& v : w.data) v = rng.uniform(-limit, limit);
    }
    return m;
}

std::size_t Model::param_count() const {
    std::size_t n = 0;
    for (const auto& t : params) n += t.size();
    return n;
}

Gradients zero_gradients(const Model& model) {
    Gradients g;
    g.reserve(model.params.size());
    for (const auto& p : model.params) g.emplace_back(p.shape);
    return g;
}

Tensor image_tensor(const FeatureImage& image) {
    return Tensor({kGridSize, kGridSize, 1}, std::vector<double>(image.begin(), image.end()));
}

Trace forward_trace(const Model& model, const Tensor& input) {
    const auto& in = model.spec.input;
    if (input.shape != Shape{in[0], in[1], in[2]}) throw ShapeMismatch("model input shape mismatch");
    Trace t;
    t.activations.reserve(model.layers.size() + 1);
    t.activations.push_back(input);
    std::size_t p = 0;
    for (const auto& l : model.layers) {
        const Tensor& x = t.activations.back();
        switch (l.kind) {
            case LayerKind::conv:
                t.activations.push_back(conv2d_forward(x, model.params[p], model.params[p + 1], l.activation));
                p += 2;
                break;
            case LayerKind::dense:
                t.activations.push_back(dense_forward(x, model.params[p], model.params[p + 1], l.activation));
                p += 2;
                break;
            case LayerKind::flatten:
                t.activations.push_back(Tensor({x.size()}, x.data));
                break;
        }
    }
    return t;
}

std::vector<double> forward(const Model& model, const FeatureImage& image) {
    return forward_trace(model, image_tensor(image)).output().data;
}

double mse_loss(std::span<const std::vector<double>> pred, std::span<const std::vector<double>> target) {
    if (pred.size() != target.size()) throw ShapeMismatch("prediction and target batch sizes differ");
    if (pred.empty()) throw ShapeMismatch("empty batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i].size() != target[i].size()) throw ShapeMismatch("prediction and target widths differ");
        for (std::size_t j = 0; j < pred[i].size(); ++j) {
            const double d = pred[i][j] - target[i][j];
            sum += d * d;
        }
    }
    return sum / static_cast<double>(pred.size());
}

double accumulate_gradients(const Model& model, std::span<const FeatureImage> images,
                            std::span<const TargetVector> targets, Gradients& grads) {
    if (images.size() != targets.size()) throw ShapeMismatch("image and target batch sizes differ");
    if (images.empty()) throw ShapeMismatch("empty batch");
    if (grads.size() != model.params.size()) throw ShapeMismatch("gradient set does not match model");
    if (model.spec.output_dim() != std::tuple_size_v<TargetVector>)
        throw ShapeMismatch("model output width does not match the 3-component target");

    const double n = static_cast<double>(images.size());
    double loss = 0.0;
    for (std::size_t b = 0; b < images.size(); ++b) {
        const Trace trace = forward_trace(model, image_tensor(images[b]));
        const Tensor& out = trace.output();
        Tensor grad({out.size()});
        for (std::size_t j = 0; j < out.size(); ++j) {
            const double d = out[j] - targets[b][j];
            loss += d * d;
            grad[j] = 2.0 * d / n;
        }
        std::size_t p = model.params.size();
        for (std::size_t li = model.layers.size(); li-- > 0;) {
            const auto& l = model.layers[li];
            const Tensor& x = trace.activations[li];
            const Tensor& y = trace.activations[li + 1];
            const bool need_input = li > 0;
            switch (l.kind) {
                case LayerKind::conv:
                    p -= 2;
                    grad = conv2d_backward(x, model.params[p], l.activation, y, grad, grads[p], grads[p + 1],
                                           need_input);
                    break;
                case LayerKind::dense:
                    p -= 2;
                    grad = dense_backward(x, model.params[p], l.activation, y, grad, grads[p], grads[p + 1],
                                          need_input);
                    break;
                case LayerKind::flatten:
                    grad.shape = x.shape;
                    break;
            }
        }
    }
    return loss / n;
}

Gradients backward(const Model& model, std::span<const FeatureImage> images,
                   std::span<const TargetVector> targets) {
    Gradients g = zero_gradients(model);
    accumulate_gradients(model, images, targets, g);
    return g;
}

Gradients backward(const Model& model, const FeatureImage& image, const TargetVector& target) {
    return backward(model, std::span<const FeatureImage>(&image, 1), std::span<const TargetVector>(&target, 1));
}

}  // namespace shapesense::nn
