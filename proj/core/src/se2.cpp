#include "parkrl/se2.hpp"

#include <cmath>

#include <Eigen/LU>

namespace parkrl {

double normalize_angle(double a) {
  if (!std::isfinite(a)) throw std::invalid_argument("normalize_angle: non-finite angle");
  double r = std::remainder(a, 2.0 * M_PI);
  if (r <= -M_PI) r += 2.0 * M_PI;
  return r;
}

Pose2D se2_compose(const Pose2D& a, const Pose2D& b) {
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y,
          normalize_angle(a.theta + b.theta)};
}

Pose2D se2_inverse(const Pose2D& a) {
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  return {-a.x * c - a.y * s, a.x * s - a.y * c, -a.theta};
}

Transform3D::Transform3D()
    : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

Transform3D::Transform3D(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (ortho > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9)
    throw std::invalid_argument("Transform3D: rotation not in SO(3)");
}

Transform3D Transform3D::from_quaternion(double qx, double qy, double qz, double qw,
                                         const Eigen::Vector3d& translation) {
  const double n = std::sqrt(qx * qx + qy * qy + qz * qz + qw * qw);
  if (n < 1e-12) throw std::invalid_argument("Transform3D: zero quaternion");
  qx /= n; qy /= n; qz /= n; qw /= n;
  Eigen::Matrix3d r;
  r << 1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw),
      2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw),
      2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy);
  return {r, translation};
}

Transform3D compose(const Transform3D& a, const Transform3D& b) {
  return {a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation()};
}

Transform3D invert(const Transform3D& t) {
  const Eigen::Matrix3d rt = t.rotation().transpose();
  return {rt, -(rt * t.translation())};
}

void VehicleParams::validate() const {
  if (wheelbase <= 0 || width <= 0 || front_overhang <= 0 || rear_overhang <= 0 ||
      max_speed <= 0)
    throw std::invalid_argument("VehicleParams: lengths/speed must be positive");
  if (!(max_steer > 0 && max_steer < M_PI / 2))
    throw std::invalid_argument("VehicleParams: max_steer outside (0, pi/2)");
  if (std::abs(min_turn_radius - wheelbase / std::tan(max_steer)) > 1e-9)
    throw std::invalid_argument("VehicleParams: min_turn_radius inconsistent");
}

std::array<Eigen::Vector2d, 4> footprint_polygon(const Pose2D& pose,
                                                 const VehicleParams& v) {
  const double x0 = -v.rear_overhang;
  const double x1 = v.wheelbase + v.front_overhang;
  const double hw = 0.5 * v.width;
  const std::array<Eigen::Vector2d, 4> local = {
      Eigen::Vector2d{x0, -hw}, {x1, -hw}, {x1, hw}, {x0, hw}};
  std::array<Eigen::Vector2d, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = se2_apply(pose, local[i]);
  return out;
}

}  // namespace parkrl
