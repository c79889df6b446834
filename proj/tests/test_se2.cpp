#include "doctest.h"

#include <cmath>

#include "parkrl/rng.hpp"
#include "parkrl/se2.hpp"

using namespace parkrl;

namespace {

Transform3D random_transform(Rng& rng) {
  // rotation from a random unit quaternion
  double q[4];
  for (auto& v : q) v = rng.normal();
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  return Transform3D::from_quaternion(q[0] / n, q[1] / n, q[2] / n, q[3] / n,
                                      {rng.uniform(-5, 5), rng.uniform(-5, 5),
                                       rng.uniform(-5, 5)});
}

// wrap by repeated +-2pi subtraction
double wrap_oracle(double a) {
  while (a > M_PI) a -= 2.0 * M_PI;
  while (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

double shoelace(const std::array<Eigen::Vector2d, 4>& poly) {
  double a = 0;
  for (int i = 0; i < 4; ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % 4];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

}  // namespace

TEST_CASE("compose identity and inverse") {
  Rng rng(1);
  const Transform3D t = random_transform(rng);
  const Transform3D id = Transform3D::identity();

  const Transform3D it = compose(id, t);
  CHECK((it.rotation() - t.rotation()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((it.translation() - t.translation()).cwiseAbs().maxCoeff() < 1e-12);

  const Transform3D round = compose(t, invert(t));
  CHECK((round.rotation() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(round.translation().cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("invert pure translation") {
  const Transform3D t(Eigen::Matrix3d::Identity(), {1, 2, 3});
  const Transform3D inv = invert(t);
  CHECK((inv.translation() - Eigen::Vector3d(-1, -2, -3)).cwiseAbs().maxCoeff() < 1e-12);

  const Transform3D id = invert(Transform3D::identity());
  CHECK(id.translation().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("compose agrees with pointwise application on random points") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const Transform3D a = random_transform(rng);
    const Transform3D b = random_transform(rng);
    const Transform3D ab = compose(a, b);
    for (int i = 0; i < 100; ++i) {
      const Eigen::Vector3d p(rng.uniform(-10, 10), rng.uniform(-10, 10),
                              rng.uniform(-10, 10));
      CHECK((ab * p - a * (b * p)).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("invert round-trips points") {
  Rng rng(3);
  const Transform3D t = random_transform(rng);
  const Transform3D inv = invert(t);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d p(rng.uniform(-10, 10), rng.uniform(-10, 10),
                            rng.uniform(-10, 10));
    CHECK((inv * (t * p) - p).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("Transform3D rejects non-rotations") {
  Eigen::Matrix3d bad = Eigen::Matrix3d::Identity();
  bad(0, 0) = 2.0;
  CHECK_THROWS(Transform3D(bad, Eigen::Vector3d::Zero()));
  Eigen::Matrix3d mirror = Eigen::Matrix3d::Identity();
  mirror(2, 2) = -1.0;  // det -1
  CHECK_THROWS(Transform3D(mirror, Eigen::Vector3d::Zero()));
}

TEST_CASE("footprint at canonical poses") {
  VehicleParams v;
  v.wheelbase = 2.5;
  v.front_overhang = 0.9;
  v.rear_overhang = 0.7;
  v.width = 1.8;

  const auto poly = footprint_polygon({0, 0, 0}, v);
  CHECK(poly[0].x() == doctest::Approx(-0.7).epsilon(1e-12));
  CHECK(poly[0].y() == doctest::Approx(-0.9).epsilon(1e-12));
  CHECK(poly[1].x() == doctest::Approx(3.4).epsilon(1e-12));
  CHECK(poly[2].y() == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(shoelace(poly) > 0);  // counter-clockwise

  const auto rot = footprint_polygon({0, 0, M_PI / 2}, v);
  for (int i = 0; i < 4; ++i) {
    CHECK(rot[i].x() == doctest::Approx(-poly[i].y()).epsilon(1e-12));
    CHECK(rot[i].y() == doctest::Approx(poly[i].x()).epsilon(1e-12));
  }
}

TEST_CASE("footprint area and equivariance") {
  VehicleParams v;
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const Pose2D pose(rng.uniform(-10, 10), rng.uniform(-10, 10),
                      rng.uniform(-M_PI, M_PI));
    const auto poly = footprint_polygon(pose, v);
    CHECK(shoelace(poly) == doctest::Approx(v.total_length() * v.width).epsilon(1e-9));

    const Pose2D g(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-M_PI, M_PI));
    const auto moved = footprint_polygon(se2_compose(g, pose), v);
    for (int k = 0; k < 4; ++k)
      CHECK((moved[k] - se2_apply(g, poly[k])).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("VehicleParams validation") {
  VehicleParams v;
  CHECK_NOTHROW(v.validate());
  v.min_turn_radius += 1e-6;
  CHECK_THROWS(v.validate());
  v = VehicleParams{};
  v.max_steer = 2.0;
  CHECK_THROWS(v.validate());
}

TEST_CASE("normalize_angle") {
  CHECK(normalize_angle(0.0) == 0.0);
  CHECK(normalize_angle(3 * M_PI) == doctest::Approx(M_PI).epsilon(1e-12));
  CHECK(normalize_angle(-7.5 * M_PI) == doctest::Approx(wrap_oracle(-7.5 * M_PI)).epsilon(1e-12));
  CHECK(wrap_oracle(-7.5 * M_PI) == doctest::Approx(0.5 * M_PI).epsilon(1e-12));
  CHECK_THROWS(normalize_angle(std::numeric_limits<double>::infinity()));
  CHECK_THROWS(normalize_angle(std::nan("")));

  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double a = rng.uniform(-50, 50);
    const double n = normalize_angle(a);
    CHECK(n > -M_PI);
    CHECK(n <= M_PI);
    CHECK(normalize_angle(n) == n);  // idempotent
    CHECK(std::abs(n - wrap_oracle(a)) < 1e-9);
  }
}
