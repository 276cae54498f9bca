#include "shapesense/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace shapesense {

void SensorFrame::validate() const {
    for (int c : counts)
        if (c < 0 || c > kAdcMax) throw std::invalid_argument("ADC count outside [0, 1023]");
}

void SensorModelConfig::validate() const {
    if (!(r0 > 0.0)) throw std::invalid_argument("r0 must be positive");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(p_scale > 0.0)) throw std::invalid_argument("p_scale must be positive");
    if (!(sat_pressure > 0.0)) throw std::invalid_argument("sat_pressure must be positive");
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be non-negative");
    if (!(vref > 0.0)) throw std::invalid_argument("vref must be positive");
}

double column_azimuth(int col) { return col * (std::numbers::pi / 2.0); }

PressureGrid pressure_field(const CurvatureState& state, const SensorModelConfig& config) {
    PressureGrid p{};
    for (int j = 0; j < kGridSize; ++j) {
        const double facing = std::max(0.0, std::cos(column_azimuth(j) - state.phi));
        for (int i = 0; i < kGridSize; ++i) {
            const double raw = config.p_scale * state.kappa * facing * kRowWeights[i];
            p[i][j] = std::clamp(raw, 0.0, config.sat_pressure);
        }
    }
    return p;
}

double resistance(double pressure, const SensorModelConfig& config) {
    return config.r0 / (1.0 + config.alpha * pressure);
}

int bridge_and_adc(double resistance, const SensorModelConfig& config, Rng* rng) {
    const double v = config.vref * (config.r0 / (config.r0 + resistance) - 0.5);
    double u = std::clamp(v / config.vref + 0.5, 0.0, 1.0);
    if (rng != nullptr && config.noise_sigma > 0.0) u += config.noise_sigma * rng->normal();
    const double count = std::round(u * kAdcMax);
    return static_cast<int>(std::clamp(count, 0.0, static_cast<double>(kAdcMax)));
}

SensorFrame frame_from_state(const CurvatureState& state, const SensorModelConfig& config, Rng& rng) {
    const auto p = pressure_field(state, config);
    SensorFrame frame;
    for (int i = 0; i < kGridSize; ++i)
        for (int j = 0; j < kGridSize; ++j)
            frame.at(i, j) = bridge_and_adc(resistance(p[i][j], config), config, &rng);
    return frame;
}

SensorFrame frame_from_state(const CurvatureState& state, const SensorModelConfig& config) {
    Rng rng(config.seed);
    return frame_from_state(state, config, rng);
}

}  // namespace shapesense
