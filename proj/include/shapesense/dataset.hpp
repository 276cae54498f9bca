#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "shapesense/kinematics.hpp"
#include "shapesense/sensor.hpp"

namespace shapesense {

struct Sample {
    SensorFrame frame;
    CurvatureState label;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

inline constexpr double kSigmaFloor = 1e-8;

/// Per-channel Z-score statistics, fitted on training samples only.
struct NormStats {
    std::array<double, kChannels> mu{};
    std::array<double, kChannels> sigma{};
};

using FeatureImage = std::array<double, kChannels>;  // 4x4 row-major, normalized
using TargetVector = std::array<double, 3>;          // (kappa/kappa_max, cos phi, sin phi)

struct Dataset {
    std::vector<Sample> samples;
    std::optional<SplitIndices> split;
    std::optional<NormStats> norm;
    double length = kDefaultLength;

    std::size_t size() const { return samples.size(); }
    double kappa_max() const { return max_curvature(length); }
};

/// Regular (kappa, phi) grid over the quarter-turn workspace, kappa-major.
/// Per-sample noise seeds are derived from config.seed and the sample index.
Dataset generate(int n_kappa, int n_phi, const SensorModelConfig& config,
                 double length = kDefaultLength);

/// The n_phi grid angles in ascending order within (-pi, pi].
std::vector<double> phi_grid(int n_phi);

/// Sizes of the 70/15/15 partition: floor(0.7n), floor(0.15n), remainder.
std::array<std::size_t, 3> split_sizes(std::size_t n);

/// Seeded shuffle, then 70/15/15 partition. Returns a copy with split set.
Dataset split(Dataset dataset, std::uint64_t seed);

/// Population mean/std of the 16 raw channels over the training split.
NormStats fit_normalization(const Dataset& dataset);
NormStats fit_normalization(const std::vector<Sample>& samples,
                            const std::vector<std::size_t>& indices);

FeatureImage apply_normalization(const SensorFrame& frame, const NormStats& norm);
std::array<double, kChannels> invert_normalization(const FeatureImage& image, const NormStats& norm);

TargetVector encode_target(const CurvatureState& label);

struct DecodedTarget {
    double kappa = 0.0;
    double phi = 0.0;
    bool degenerate_angle = false;  // (cos, sin) part had norm < 1e-9; phi forced to 0
};
DecodedTarget decode_target(const TargetVector& t, double length = kDefaultLength);

// ---- text formats ----------------------------------------------------------

/// `a00,a01,...,a33,kappa,phi`
std::string dataset_csv_header();

/// Parses one record; throws ParseError with a 1-based column.
Sample parse_frame_line(std::string_view line, double length = kDefaultLength);

/// Inverse of parse_frame_line; reals are written in shortest round-trip form.
std::string format_frame_line(const Sample& sample);

/// Writes header plus one record per sample.
void write_dataset_csv(std::ostream& out, const std::vector<Sample>& samples);

struct CsvReadResult {
    std::vector<Sample> samples;
    struct BadLine {
        std::size_t line_number;  // 1-based
        std::string message;
    };
    std::vector<BadLine> errors;
};

/// Reads a dataset or raw log. Skips blank lines, '#' comments and a header
/// line starting with "a00". In strict mode the first bad line throws
/// ParseError; otherwise bad lines are collected in errors.
CsvReadResult read_dataset_csv(std::istream& in, bool strict, double length = kDefaultLength);

std::string norm_stats_to_json(const NormStats& norm);
NormStats norm_stats_from_json(std::string_view text);

/// Shortest decimal text that parses back to the same double.
std::string format_real(double value);

}  // namespace shapesense
