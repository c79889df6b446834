#include "parkrl/action_mask.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace parkrl {

namespace {

Pose2D advance_arc(const Pose2D& p, double kappa, double s) {
  if (std::abs(kappa * s) < 1e-12) {
    return Pose2D(p.x + s * std::cos(p.theta), p.y + s * std::sin(p.theta), p.theta);
  }
  const double dtheta = kappa * s;
  const double r = 1.0 / kappa;
  return Pose2D(p.x + r * (std::sin(p.theta + dtheta) - std::sin(p.theta)),
                p.y - r * (std::cos(p.theta + dtheta) - std::cos(p.theta)),
                p.theta + dtheta);
}

// Replicates the simulator's swept check: per dt step, sub-poses spaced at
// most sample_step apart along the constant-control arc.
bool safe_speed(const CollisionChecker& checker, const Pose2D& pose, double kappa,
                double speed, double sgn, double dt, double sample_step, int horizon) {
  if (speed == 0.0) return true;
  const double ds = speed * dt;
  const int n = std::max(1, (int)std::ceil(ds / sample_step));
  for (int j = 0; j < horizon; ++j) {
    for (int k = 1; k <= n; ++k) {
      const double s = sgn * (j * ds + ds * k / n);
      if (checker.pose_collides(advance_arc(pose, kappa, s))) return false;
    }
  }
  return true;
}

}  // namespace

void ActionMaskConfig::validate() const {
  if (n_steer_bins < 2 || n_speed_rungs < 1 || horizon < 1) {
    throw std::invalid_argument("ActionMaskConfig: bad parameters");
  }
}

ActionMask compute_mask(const CollisionChecker& checker, const Pose2D& pose,
                        const VehicleParams& vehicle, double dt,
                        const CollisionConfig& collision, const ActionMaskConfig& cfg) {
  cfg.validate();
  ActionMask mask;
  mask.steer_bins.resize(cfg.n_steer_bins);
  mask.max_forward.resize(cfg.n_steer_bins);
  mask.max_reverse.resize(cfg.n_steer_bins);
  const double dv = vehicle.max_speed / cfg.n_speed_rungs;

  for (int i = 0; i < cfg.n_steer_bins; ++i) {
    const double steer =
        -vehicle.max_steer + 2.0 * vehicle.max_steer * i / (cfg.n_steer_bins - 1);
    mask.steer_bins[i] = steer;
    const double kappa = std::tan(steer) / vehicle.wheelbase;
    for (const double sgn : {1.0, -1.0}) {
      const auto safe = [&](int rung) {
        return safe_speed(checker, pose, kappa, rung * dv, sgn, dt,
                          collision.sample_step, cfg.horizon);
      };
      int lo = 0, hi = cfg.n_speed_rungs;  // safe(0) always holds
      if (safe(hi)) {
        lo = hi;
      } else {
        while (hi - lo > 1) {
          const int mid = (lo + hi) / 2;
          (safe(mid) ? lo : hi) = mid;
        }
      }
      (sgn > 0 ? mask.max_forward : mask.max_reverse)[i] = lo * dv;
    }
  }
  return mask;
}

Action apply_mask(const ActionMask& mask, const Action& action) {
  size_t best = 0;
  for (size_t i = 1; i < mask.steer_bins.size(); ++i) {
    if (std::abs(mask.steer_bins[i] - action.steering) <
        std::abs(mask.steer_bins[best] - action.steering)) {
      best = i;
    }
  }
  Action out = action;
  out.velocity = std::clamp(action.velocity, -mask.max_reverse[best],
                            mask.max_forward[best]);
  return out;
}

}  // namespace parkrl
