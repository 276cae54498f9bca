#include "shapesense/kinematics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "shapesense/errors.hpp"

namespace shapesense {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kBendSlack = 1e-12;

}  // namespace

double wrap_angle(double angle) {
    double a = std::remainder(angle, 2.0 * kPi);  // [-pi, pi]
    if (a <= -kPi) a += 2.0 * kPi;
    return a;
}

double max_curvature(double length) { return kPi / (2.0 * length); }

CurvatureState CurvatureState::make(double kappa, double phi, double length) {
    if (!std::isfinite(kappa) || !std::isfinite(phi) || !std::isfinite(length))
        throw std::invalid_argument("curvature state must be finite");
    if (length <= 0.0) throw std::invalid_argument("section length must be positive");
    if (kappa < 0.0) throw std::invalid_argument("curvature must be non-negative");
    if (kappa * length > kPi / 2.0 + kBendSlack)
        throw std::invalid_argument("bend angle exceeds the quarter-turn workspace");
    CurvatureState s;
    s.kappa = kappa;
    s.phi = kappa == 0.0 ? 0.0 : wrap_angle(phi);
    s.length = length;
    return s;
}

Eigen::Matrix3d rot_z(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix3d r;
    r << c, -s, 0.0,
         s, c, 0.0,
         0.0, 0.0, 1.0;
    return r;
}

Eigen::Matrix3d rot_y(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Eigen::Matrix3d r;
    r << c, 0.0, s,
         0.0, 1.0, 0.0,
         -s, 0.0, c;
    return r;
}

TipPose tip_pose(const CurvatureState& state) {
    TipPose pose;
    if (state.kappa < kSmallCurvature) {
        pose.position = Eigen::Vector3d(0.0, 0.0, state.length);
        pose.orientation = Eigen::Matrix3d::Identity();
        return pose;
    }
    const double theta = state.bend_angle();
    // 1 - cos(theta) written as 2 sin^2(theta/2) to avoid cancellation.
    const double half = std::sin(0.5 * theta);
    const double radial = 2.0 * half * half / state.kappa;
    pose.position = Eigen::Vector3d(std::cos(state.phi) * radial, std::sin(state.phi) * radial,
                                    std::sin(theta) / state.kappa);
    pose.orientation = rot_z(state.phi) * rot_y(theta) * rot_z(-state.phi);
    return pose;
}

CurvatureState curvature_from_orientation(const Eigen::Matrix3d& orientation, double length) {
    if (!(length > 0.0)) throw std::invalid_argument("section length must be positive");
    const double ortho =
        (orientation.transpose() * orientation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
    if (!(ortho <= kOrthonormalTolerance) || orientation.determinant() < 0.0)
        throw std::invalid_argument("orientation is not a proper rotation");

    // The third column is the tip tangent (cos phi sin theta, sin phi sin theta, cos theta).
    const double rx = orientation(0, 2), ry = orientation(1, 2), rz = orientation(2, 2);
    const double theta = std::atan2(std::hypot(rx, ry), rz);
    if (theta > kPi / 2.0 + kBendSlack)
        throw std::invalid_argument("bend angle exceeds the quarter-turn workspace");

    CurvatureState s;
    s.length = length;
    if (theta / length < kSmallCurvature) {
        // A straight tangent still has to come with an untwisted frame.
        const double residual = (orientation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
        if (residual > kFrameTolerance) throw NotConstantCurvature(residual);
        return s;
    }
    s.kappa = std::min(theta, kPi / 2.0) / length;
    s.phi = wrap_angle(std::atan2(ry, rx));

    const Eigen::Matrix3d rebuilt = rot_z(s.phi) * rot_y(s.bend_angle()) * rot_z(-s.phi);
    const double residual = (orientation - rebuilt).cwiseAbs().maxCoeff();
    if (residual > kFrameTolerance) throw NotConstantCurvature(residual);
    return s;
}

}  // namespace shapesense
