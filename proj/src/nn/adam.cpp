#include "shapesense/nn/adam.hpp"

#include <cmath>

#include "shapesense/errors.hpp"

namespace shapesense::nn {

AdamState AdamState::zeros_like(const std::vector<Tensor>& params) {
    AdamState s;
    for (const auto& p : params) {
        s.m.emplace_back(p.shape);
        s.v.emplace_back(p.shape);
    }
    return s;
}

void adam_step(std::vector<Tensor>& params, const std::vector<Tensor>& grads, AdamState& state,
               const AdamConfig& config) {
    if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size())
        throw ShapeMismatch("adam: parameter, gradient and moment sets differ in length");

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correct1 = 1.0 - std::pow(config.beta1, t);
    const double correct2 = 1.0 - std::pow(config.beta2, t);

    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& theta = params[p].data;
        const auto& g = grads[p].data;
        auto& m = state.m[p].data;
        auto& v = state.v[p].data;
        if (g.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size())
            throw ShapeMismatch("adam: tensor sizes differ");
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
            v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
            const double m_hat = m[i] / correct1;
            const double v_hat = v[i] / correct2;
            theta[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
        }
    }
}

}  // namespace shapesense::nn
