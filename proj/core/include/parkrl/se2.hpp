#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

#include <Eigen/Core>

namespace parkrl {

// Wraps an angle into (-pi, pi]. Throws on non-finite input.
double normalize_angle(double a);

// Planar rigid-body pose. theta is kept normalized to (-pi, pi].
// For the vehicle this anchors the rear axle center.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose2D() = default;
  Pose2D(double x_, double y_, double theta_)
      : x(x_), y(y_), theta(normalize_angle(theta_)) {}

  bool operator==(const Pose2D&) const = default;
};

Pose2D se2_compose(const Pose2D& a, const Pose2D& b);
Pose2D se2_inverse(const Pose2D& a);

// Maps a point given in the frame of `pose` into the parent frame.
inline Eigen::Vector2d se2_apply(const Pose2D& pose, const Eigen::Vector2d& p) {
  const double c = std::cos(pose.theta), s = std::sin(pose.theta);
  return {pose.x + c * p.x() - s * p.y(), pose.y + s * p.x() + c * p.y()};
}

// Rigid 3D transform used for point-cloud registration.
// Rotation is validated to be orthonormal with determinant +1 (1e-9).
class Transform3D {
 public:
  Transform3D();
  Transform3D(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static Transform3D identity() { return {}; }
  static Transform3D from_quaternion(double qx, double qy, double qz, double qw,
                                     const Eigen::Vector3d& translation);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d operator*(const Eigen::Vector3d& p) const {
    return rotation_ * p + translation_;
  }

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

Transform3D compose(const Transform3D& a, const Transform3D& b);
Transform3D invert(const Transform3D& t);

// Bicycle-model vehicle geometry. Pose convention: rear axle center.
struct VehicleParams {
  double wheelbase = 2.5;
  double width = 1.8;
  double front_overhang = 0.9;
  double rear_overhang = 0.7;
  double max_steer = 0.6;
  double min_turn_radius = 2.5 / std::tan(0.6);
  double max_speed = 2.0;

  double total_length() const { return front_overhang + wheelbase + rear_overhang; }
  void validate() const;
};

// Vehicle outline at the given pose, counter-clockwise, rear axle at pose.
std::array<Eigen::Vector2d, 4> footprint_polygon(const Pose2D& pose,
                                                 const VehicleParams& v);

}  // namespace parkrl
