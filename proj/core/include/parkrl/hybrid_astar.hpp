#pragma once

#include <vector>

#include "parkrl/collision.hpp"
#include "parkrl/reeds_shepp.hpp"
#include "parkrl/se2.hpp"

namespace parkrl {

struct HybridAStarConfig {
  double xy_res = 0.2;
  double theta_res = 5.0 * M_PI / 180.0;
  double arc_len = 0.5;     // primitive arc length, meters
  double w_rev = 1.5;       // reverse travel multiplier
  double w_shift = 2.0;     // per gear change
  size_t node_budget = 200000;
  double sample_step = 0.1; // collision sampling density along primitives

  void validate() const;
};

// One constant-steering piece of a plan. RS tail arcs map back to
// +-max_steer, straights to zero.
struct PlanSegment {
  double steering = 0.0;
  Gear gear = Gear::FORWARD;
  double length = 0.0;  // arc length, > 0
};

struct PlanResult {
  bool success = false;
  std::vector<PlanSegment> segments;
  std::vector<Pose2D> poses;  // sampled at <= sample_step, first == start
  double length = 0.0;
  int gear_shifts = 0;
  size_t expanded = 0;
};

// Lattice search over (x, y, theta) with forward/reverse arc primitives and
// a Reeds-Shepp analytic expansion that fires more often as the heuristic
// shrinks. The heuristic is the max of the RS distance and an
// obstacle-aware 2D Dijkstra field seeded at the goal. Deterministic for a
// fixed grid and query.
class HybridAStar {
 public:
  HybridAStar(const CollisionChecker& checker, const VehicleParams& vehicle,
              HybridAStarConfig cfg = HybridAStarConfig{});

  PlanResult plan(const Pose2D& start, const Pose2D& goal) const;

  double r_min() const { return r_min_; }

 private:
  std::vector<double> dijkstra_from(const Pose2D& goal) const;

  const CollisionChecker* checker_;
  VehicleParams vehicle_;
  HybridAStarConfig cfg_;
  double r_min_;
  int n_theta_bins_;
};

}  // namespace parkrl
