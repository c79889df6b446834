#include "doctest.h"

#include <cmath>

#include "parkrl/reeds_shepp.hpp"
#include "parkrl/rng.hpp"

using namespace parkrl;

namespace {

// Independent endpoint oracle: advance around the instantaneous center of
// rotation, segment by segment.
Pose2D oracle_endpoint(const RSPath& path, Pose2D p, double r) {
  for (const auto& seg : path.segments) {
    const double d = seg.gear == Gear::FORWARD ? 1.0 : -1.0;
    if (seg.steer == Steer::STRAIGHT) {
      p.x += d * seg.length * std::cos(p.theta);
      p.y += d * seg.length * std::sin(p.theta);
    } else {
      const double side = seg.steer == Steer::LEFT ? 1.0 : -1.0;
      // center of rotation sits r to the side of the heading
      const double cx = p.x - side * r * std::sin(p.theta);
      const double cy = p.y + side * r * std::cos(p.theta);
      const double sweep = d * side * seg.length / r;
      const double dx = p.x - cx, dy = p.y - cy;
      p = Pose2D(cx + dx * std::cos(sweep) - dy * std::sin(sweep),
                 cy + dx * std::sin(sweep) + dy * std::cos(sweep), p.theta + sweep);
    }
  }
  return p;
}

double pose_err(const Pose2D& a, const Pose2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y) +
         std::abs(normalize_angle(a.theta - b.theta));
}

}  // namespace

TEST_CASE("degenerate and collinear instances") {
  const auto all = enumerate_all({1, 2, 0.5}, {1, 2, 0.5}, 1.0);
  bool has_zero = false;
  for (const auto& p : all) has_zero |= p.total_length() < 1e-12;
  CHECK(has_zero);

  const RSPath fwd = solve({0, 0, 0}, {4, 0, 0}, 1.0);
  CHECK(fwd.total_length() == doctest::Approx(4.0).epsilon(1e-9));
  REQUIRE(fwd.segments.size() == 1);
  CHECK(fwd.segments[0].steer == Steer::STRAIGHT);
  CHECK(fwd.segments[0].gear == Gear::FORWARD);

  const RSPath back = solve({0, 0, 0}, {-3, 0, 0}, 1.0);
  CHECK(back.total_length() == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(back.segments[0].gear == Gear::BACKWARD);
}

TEST_CASE("random instances: endpoint exactness and optimality vs enumeration") {
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const Pose2D start(rng.uniform(-10, 10), rng.uniform(-10, 10),
                       rng.uniform(-M_PI, M_PI));
    const Pose2D goal(rng.uniform(-10, 10), rng.uniform(-10, 10),
                      rng.uniform(-M_PI, M_PI));
    const auto all = enumerate_all(start, goal, 1.0);
    REQUIRE(!all.empty());
    double min_len = 1e100;
    for (const auto& p : all) {
      CHECK(pose_err(oracle_endpoint(p, start, 1.0), goal) < 1e-6);
      min_len = std::min(min_len, p.total_length());
    }
    const RSPath best = solve(start, goal, 1.0);
    CHECK(best.total_length() == doctest::Approx(min_len).epsilon(1e-9));
  }
}

TEST_CASE("time-flip symmetry and scale equivariance") {
  Rng rng(22);
  for (int i = 0; i < 200; ++i) {
    const Pose2D a(rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-M_PI, M_PI));
    const Pose2D b(rng.uniform(-8, 8), rng.uniform(-8, 8), rng.uniform(-M_PI, M_PI));
    const double fwd = solve(a, b, 1.0).total_length();
    const double rev = solve(b, a, 1.0).total_length();
    CHECK(fwd == doctest::Approx(rev).epsilon(1e-9));

    const double k = 2.5;
    const Pose2D ak(k * a.x, k * a.y, a.theta);
    const Pose2D bk(k * b.x, k * b.y, b.theta);
    CHECK(solve(ak, bk, k).total_length() == doctest::Approx(k * fwd).epsilon(1e-9));
  }
}

TEST_CASE("tie-breaking prefers fewer gear shifts") {
  Rng rng(23);
  for (int i = 0; i < 300; ++i) {
    const Pose2D goal(rng.uniform(-6, 6), rng.uniform(-6, 6), rng.uniform(-M_PI, M_PI));
    const auto best = solve({0, 0, 0}, goal, 1.0);
    for (const auto& p : enumerate_all({0, 0, 0}, goal, 1.0))
      if (p.total_length() == best.total_length())
        CHECK(best.gear_shifts() <= p.gear_shifts());
  }
}

TEST_CASE("sample spacing and endpoints") {
  RSPath straight;
  straight.segments = {{Steer::STRAIGHT, Gear::FORWARD, 1.0}};
  const auto poses = sample(straight, {0, 0, 0}, 1.0, 0.5);
  REQUIRE(poses.size() == 3);
  CHECK(poses[1].x == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(poses[2].x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(poses[2].y == 0.0);

  RSPath half_circle;
  half_circle.segments = {{Steer::LEFT, Gear::FORWARD, M_PI}};
  const auto arc = sample(half_circle, {0, 0, 0}, 1.0, 0.1);
  const Pose2D& end = arc.back();
  CHECK(std::abs(end.x - 0.0) < 1e-6);
  CHECK(std::abs(end.y - 2.0) < 1e-6);
  CHECK(std::abs(normalize_angle(end.theta - M_PI)) < 1e-6);

  CHECK_THROWS(sample(straight, {0, 0, 0}, 1.0, 0.0));
}

TEST_CASE("sampled paths stay dense and consistent with the arc oracle") {
  Rng rng(24);
  const double ds = 0.2;
  for (int i = 0; i < 200; ++i) {
    const Pose2D start(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-M_PI, M_PI));
    const Pose2D goal(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-M_PI, M_PI));
    const RSPath path = solve(start, goal, 1.0);
    const auto poses = sample(path, start, 1.0, ds);
    CHECK(pose_err(poses.front(), start) == 0.0);
    CHECK(pose_err(poses.back(), goal) < 1e-6);
    for (size_t k = 0; k + 1 < poses.size(); ++k) {
      const double gap = std::hypot(poses[k + 1].x - poses[k].x,
                                    poses[k + 1].y - poses[k].y);
      CHECK(gap <= ds + 1e-9);
    }
    // prefix-truncated oracle agreement: every sampled pose lies on the path
    RSPath prefix;
    double remaining_check = 0.0;
    size_t idx = 0;
    for (const auto& seg : path.segments) {
      const int n = std::max(1, static_cast<int>(std::ceil(seg.length / ds)));
      for (int k = 1; k <= n; ++k) {
        RSPath partial = prefix;
        partial.segments.push_back({seg.steer, seg.gear, seg.length * k / n});
        ++idx;
        REQUIRE(idx < poses.size());
        CHECK(pose_err(oracle_endpoint(partial, start, 1.0), poses[idx]) < 1e-6);
      }
      prefix.segments.push_back(seg);
      remaining_check += seg.length;
    }
    (void)remaining_check;
  }
}

TEST_CASE("gear shift counting skips zero-length segments") {
  RSPath p;
  p.segments = {{Steer::LEFT, Gear::FORWARD, 1.0},
                {Steer::STRAIGHT, Gear::BACKWARD, 0.0},
                {Steer::RIGHT, Gear::FORWARD, 2.0}};
  CHECK(p.gear_shifts() == 0);
  p.segments[1].length = 0.5;
  CHECK(p.gear_shifts() == 2);
}
