#include "shapesense/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "shapesense/errors.hpp"

namespace shapesense {

std::vector<double> phi_grid(int n_phi) {
    if (n_phi < 1) throw std::invalid_argument("n_phi must be at least 1");
    constexpr double pi = std::numbers::pi;
    std::vector<double> grid;
    grid.reserve(n_phi);
    for (int j = 0; j < n_phi; ++j) {
        // 2*pi*j/n wrapped into (-pi, pi]; the half-turn is pinned to pi exactly.
        if (2 * j == n_phi)
            grid.push_back(pi);
        else if (2 * j < n_phi)
            grid.push_back(2.0 * pi * j / n_phi);
        else
            grid.push_back(-2.0 * pi * (n_phi - j) / n_phi);
    }
    std::sort(grid.begin(), grid.end());
    return grid;
}

Dataset generate(int n_kappa, int n_phi, const SensorModelConfig& config, double length) {
    if (n_kappa < 2) throw std::invalid_argument("n_kappa must be at least 2");
    config.validate();
    const auto phis = phi_grid(n_phi);
    const double kappa_max = max_curvature(length);

    Dataset ds;
    ds.length = length;
    ds.samples.reserve(static_cast<std::size_t>(n_kappa) * n_phi);
    for (int i = 0; i < n_kappa; ++i) {
        const double kappa = i == n_kappa - 1 ? kappa_max : kappa_max * i / (n_kappa - 1);
        for (double phi : phis) {
            const auto index = ds.samples.size();
            const auto state = CurvatureState::make(kappa, phi, length);
            Rng rng(mix_seed(config.seed, index));
            ds.samples.push_back({frame_from_state(state, config, rng), state});
        }
    }
    return ds;
}

std::array<std::size_t, 3> split_sizes(std::size_t n) {
    const std::size_t train = n * 70 / 100;
    const std::size_t val = n * 15 / 100;
    return {train, val, n - train - val};
}

Dataset split(Dataset dataset, std::uint64_t seed) {
    if (dataset.samples.empty()) throw std::invalid_argument("cannot split an empty dataset");
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    const auto [n_train, n_val, n_test] = split_sizes(order.size());
    SplitIndices s;
    s.train.assign(order.begin(), order.begin() + n_train);
    s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    s.test.assign(order.begin() + n_train + n_val, order.end());
    dataset.split = std::move(s);
    dataset.norm.reset();
    return dataset;
}

NormStats fit_normalization(const std::vector<Sample>& samples,
                            const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw std::invalid_argument("training split is empty");
    NormStats norm;
    const double n = static_cast<double>(indices.size());
    for (int c = 0; c < kChannels; ++c) {
        double sum = 0.0;
        for (auto i : indices) sum += samples.at(i).frame.counts[c];
        const double mu = sum / n;
        double ss = 0.0;
        for (auto i : indices) {
            const double d = samples[i].frame.counts[c] - mu;
            ss += d * d;
        }
        norm.mu[c] = mu;
        norm.sigma[c] = std::max(std::sqrt(ss / n), kSigmaFloor);
    }
    return norm;
}

NormStats fit_normalization(const Dataset& dataset) {
    if (!dataset.split) throw MissingSplit();
    return fit_normalization(dataset.samples, dataset.split->train);
}

FeatureImage apply_normalization(const SensorFrame& frame, const NormStats& norm) {
    FeatureImage img;
    for (int c = 0; c < kChannels; ++c) img[c] = (frame.counts[c] - norm.mu[c]) / norm.sigma[c];
    return img;
}

std::array<double, kChannels> invert_normalization(const FeatureImage& image, const NormStats& norm) {
    std::array<double, kChannels> raw;
    for (int c = 0; c < kChannels; ++c) raw[c] = image[c] * norm.sigma[c] + norm.mu[c];
    return raw;
}

TargetVector encode_target(const CurvatureState& label) {
    return {label.kappa / max_curvature(label.length), std::cos(label.phi), std::sin(label.phi)};
}

DecodedTarget decode_target(const TargetVector& t, double length) {
    DecodedTarget d;
    d.kappa = std::clamp(t[0], 0.0, 1.0) * max_curvature(length);
    if (std::hypot(t[1], t[2]) < 1e-9) {
        d.degenerate_angle = true;
        d.phi = 0.0;
    } else {
        d.phi = wrap_angle(std::atan2(t[2], t[1]));
    }
    return d;
}

}  // namespace shapesense
