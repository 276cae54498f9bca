#pragma once

#include <Eigen/Dense>

namespace shapesense {

inline constexpr double kDefaultLength = 0.18;         // m
inline constexpr double kSmallCurvature = 1e-6;        // m^-1, limit branch below this
inline constexpr double kOrthonormalTolerance = 1e-9;
inline constexpr double kFrameTolerance = 1e-9;

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Largest curvature with a bend angle of at most a quarter turn.
double max_curvature(double length = kDefaultLength);

/// Constant-curvature configuration of a single section.
struct CurvatureState {
    double kappa = 0.0;              // m^-1
    double phi = 0.0;                // rad, (-pi, pi]
    double length = kDefaultLength;  // m

    /// Validates and canonicalizes: phi is wrapped, and forced to 0 when
    /// kappa is 0. Throws std::invalid_argument on kappa < 0, length <= 0,
    /// non-finite input or a bend angle beyond pi/2.
    static CurvatureState make(double kappa, double phi, double length = kDefaultLength);

    double bend_angle() const { return kappa * length; }
};

struct TipPose {
    Eigen::Vector3d position;
    Eigen::Matrix3d orientation;
};

Eigen::Matrix3d rot_z(double angle);
Eigen::Matrix3d rot_y(double angle);

/// Forward constant-curvature model; the orientation is Rz(phi) Ry(theta) Rz(-phi).
TipPose tip_pose(const CurvatureState& state);

/// Inverts a tip orientation (e.g. an IMU reading) to (kappa, phi).
/// Throws NotConstantCurvature if the rotation carries axial twist, and
/// std::invalid_argument if it is not orthonormal or bends past pi/2.
CurvatureState curvature_from_orientation(const Eigen::Matrix3d& orientation,
                                          double length = kDefaultLength);

}  // namespace shapesense
