#pragma once

#include <vector>

#include "parkrl/collision.hpp"
#include "parkrl/se2.hpp"
#include "parkrl/simulator.hpp"

namespace parkrl {

struct ActionMaskConfig {
  int n_steer_bins = 21;   // uniform over [-max_steer, +max_steer]
  int n_speed_rungs = 16;  // ladder over (0, max_speed]
  int horizon = 5;         // constant-control lookahead, steps

  void validate() const;
};

// Per-steering-bin speed envelope: holding the bin's steering and any speed
// up to the bound for `horizon` steps is collision-free under the swept
// check the simulator applies.
struct ActionMask {
  std::vector<double> steer_bins;
  std::vector<double> max_forward;  // >= 0; 0 means the bin only admits a stop
  std::vector<double> max_reverse;  // magnitude, >= 0
};

// Safety is monotone in speed along a fixed-curvature arc, so each bound is
// found by bisecting the rung ladder.
ActionMask compute_mask(const CollisionChecker& checker, const Pose2D& pose,
                        const VehicleParams& vehicle, double dt,
                        const CollisionConfig& collision,
                        const ActionMaskConfig& cfg = ActionMaskConfig{});

// Clip the velocity to the envelope of the nearest steering bin. Steering
// passes through unchanged.
Action apply_mask(const ActionMask& mask, const Action& action);

}  // namespace parkrl
