#pragma once

#include <span>
#include <vector>

#include "parkrl/ogm.hpp"
#include "parkrl/se2.hpp"

namespace parkrl {

struct CollisionConfig {
  double safety_margin = 0.1;  // footprint inflation, meters
  double sample_step = 0.1;    // path sampling density, meters

  void validate() const;
};

// Footprint and beam queries against one immutable grid. OCCUPIED and
// UNKNOWN cells are both lethal, as are cells outside the grid. The test is
// cell-center containment in the margin-inflated footprint rectangle; a
// precomputed clearance field short-circuits poses far from any obstacle.
class CollisionChecker {
 public:
  CollisionChecker(const OccupancyGrid& grid, const VehicleParams& vehicle,
                   const CollisionConfig& cfg, bool build_clearance_field = true);

  bool pose_collides(const Pose2D& pose) const;

  // True iff any pose collides. Throws if consecutive poses are spaced
  // further apart than cfg.sample_step.
  bool path_collides(std::span<const Pose2D> poses) const;

  // Beam i leaves at heading pose.theta + 2*pi*i/n_beams; returns distance
  // to the first lethal cell boundary, capped at max_range. Throws if the
  // pose is outside the grid.
  std::vector<double> cast_beams(const Pose2D& pose, int n_beams, double max_range) const;

  // Meters from a world point to the nearest lethal cell center (lower
  // bound; only available when the clearance field was built).
  double clearance(double x, double y) const;

  const OccupancyGrid& grid() const { return *grid_; }

 private:
  bool pose_collides_exact(const Pose2D& pose) const;

  const OccupancyGrid* grid_;
  VehicleParams vehicle_;
  CollisionConfig cfg_;
  double half_width_;   // inflated
  double x_rear_;       // inflated rear extent (negative direction)
  double x_front_;      // inflated front extent
  double circumradius_; // of the inflated rectangle
  std::vector<float> clearance_field_;  // empty when not built
};

// Convenience single-shot forms of the spec contract.
bool pose_collides(const OccupancyGrid& grid, const Pose2D& pose,
                   const VehicleParams& vehicle, const CollisionConfig& cfg);
bool path_collides(const OccupancyGrid& grid, std::span<const Pose2D> poses,
                   const VehicleParams& vehicle, const CollisionConfig& cfg);
std::vector<double> cast_beams(const OccupancyGrid& grid, const Pose2D& pose,
                               int n_beams, double max_range);

}  // namespace parkrl
