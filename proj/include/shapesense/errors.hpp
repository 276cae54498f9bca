#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shapesense {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Rotation cannot be written as Rz(phi) Ry(theta) Rz(-phi).
class NotConstantCurvature : public Error {
public:
    explicit NotConstantCurvature(double residual)
        : Error("rotation is not a torsion-free constant-curvature frame (residual " +
                std::to_string(residual) + ")"),
          residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class ParseError : public Error {
public:
    // column is 1-based; 0 means the record as a whole (e.g. field count).
    ParseError(std::size_t column, std::string reason)
        : Error("column " + std::to_string(column) + ": " + reason),
          column_(column), reason_(std::move(reason)) {}
    std::size_t column() const noexcept { return column_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::size_t column_;
    std::string reason_;
};

class MissingSplit : public Error {
public:
    MissingSplit() : Error("dataset has no train/validation/test split") {}
};

class MissingNormalization : public Error {
public:
    MissingNormalization() : Error("dataset has no fitted normalization statistics") {}
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

// Model or data file does not match the expected schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

}  // namespace shapesense
