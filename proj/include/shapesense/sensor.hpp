#pragma once

#include <array>
#include <cstdint>

#include "shapesense/kinematics.hpp"
#include "shapesense/rng.hpp"

namespace shapesense {

inline constexpr int kGridSize = 4;
inline constexpr int kChannels = kGridSize * kGridSize;
inline constexpr int kAdcMax = 1023;

/// One sample of the 4x4 matrix: rows run along the section, columns around it.
struct SensorFrame {
    std::array<int, kChannels> counts{};  // row-major, each in [0, 1023]

    int at(int row, int col) const { return counts[row * kGridSize + col]; }
    int& at(int row, int col) { return counts[row * kGridSize + col]; }

    bool operator==(const SensorFrame&) const = default;

    /// Throws std::invalid_argument if any count is outside [0, 1023].
    void validate() const;
};

using PressureGrid = std::array<std::array<double, kGridSize>, kGridSize>;

struct SensorModelConfig {
    double r0 = 10'000.0;          // ohm, unloaded resistance
    double alpha = 2e-4;           // 1/Pa
    double p_scale = 1'000.0;      // Pa*m, pressure per unit curvature
    double sat_pressure = 10'000.0;  // Pa, clamp standing in for stacked-layer range
    double noise_sigma = 0.005;    // on normalized bridge voltage
    double vref = 5.0;             // V
    std::uint64_t seed = 42;

    /// Throws std::invalid_argument when a field violates its bound.
    void validate() const;

    SensorModelConfig noiseless() const {
        auto c = *this;
        c.noise_sigma = 0.0;
        return c;
    }
};

/// Azimuth of each column and axial weight of each row.
inline constexpr std::array<double, kGridSize> kRowWeights{0.85, 1.0, 1.0, 0.85};
double column_azimuth(int col);

PressureGrid pressure_field(const CurvatureState& state, const SensorModelConfig& config);

/// Piezoresistive element: R = r0 / (1 + alpha p).
double resistance(double pressure, const SensorModelConfig& config);

/// Quarter bridge with three fixed r0 arms feeding a 10-bit ADC. Noise is
/// drawn from rng only when rng is non-null and noise_sigma > 0.
int bridge_and_adc(double resistance, const SensorModelConfig& config, Rng* rng = nullptr);

/// Full forward model for one state, drawing noise from rng.
SensorFrame frame_from_state(const CurvatureState& state, const SensorModelConfig& config, Rng& rng);

/// Same, with a fresh generator seeded from config.seed.
SensorFrame frame_from_state(const CurvatureState& state, const SensorModelConfig& config);

}  // namespace shapesense
