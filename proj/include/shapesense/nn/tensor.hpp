#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace shapesense::nn {

using Shape = std::vector<std::size_t>;

std::size_t shape_size(const Shape& shape);

/// Dense row-major float64 array.
struct Tensor {
    Shape shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(Shape s, double fill = 0.0);
    /// Throws ShapeMismatch when the element count does not match the shape.
    Tensor(Shape s, std::vector<double> values);

    std::size_t size() const { return data.size(); }
    std::size_t rank() const { return shape.size(); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    std::span<double> values() { return data; }
    std::span<const double> values() const { return data; }

    bool all_finite() const;
    void fill(double v);

    bool operator==(const Tensor&) const = default;
};

}  // namespace shapesense::nn
