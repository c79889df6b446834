#include <cmath>
#include <stdexcept>

#include "parkrl/hybrid_astar.hpp"
#include "parkrl/rng.hpp"
#include "parkrl/simulator.hpp"

namespace parkrl {

namespace {

// Lot footprint shared by every scenario class: a walled 30 x 14 m yard
// with a slot row along the bottom wall and the aisle above it.
constexpr double kLotW = 30.0;
constexpr double kLotH = 14.0;
constexpr double kWall = 0.2;
constexpr double kSlotY0 = 0.4;  // slot row offset from the bottom wall

void paint_rect(OccupancyGrid& grid, double cx, double cy, double theta, double len,
                double wid, Cell value) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double r = 0.5 * std::hypot(len, wid);
  const auto [ix0, iy0] = grid.world_to_cell(cx - r, cy - r);
  const auto [ix1, iy1] = grid.world_to_cell(cx + r, cy + r);
  for (int iy = std::max(0, iy0); iy <= std::min(grid.height() - 1, iy1); ++iy) {
    for (int ix = std::max(0, ix0); ix <= std::min(grid.width() - 1, ix1); ++ix) {
      const Eigen::Vector2d p = grid.cell_center(ix, iy);
      const double dx = p.x() - cx, dy = p.y() - cy;
      const double u = c * dx + s * dy, v = -s * dx + c * dy;
      if (std::abs(u) <= 0.5 * len && std::abs(v) <= 0.5 * wid) grid.set(ix, iy, value);
    }
  }
}

OccupancyGrid empty_lot(double resolution) {
  const int w = (int)std::lround(kLotW / resolution);
  const int h = (int)std::lround(kLotH / resolution);
  OccupancyGrid grid(resolution, Pose2D(0.0, 0.0, 0.0), w, h, Cell::FREE);
  paint_rect(grid, kLotW / 2, kWall / 2, 0.0, kLotW, kWall, Cell::OCCUPIED);
  paint_rect(grid, kLotW / 2, kLotH - kWall / 2, 0.0, kLotW, kWall, Cell::OCCUPIED);
  paint_rect(grid, kWall / 2, kLotH / 2, 0.0, kWall, kLotH, Cell::OCCUPIED);
  paint_rect(grid, kLotW - kWall / 2, kLotH / 2, 0.0, kWall, kLotH, Cell::OCCUPIED);
  return grid;
}

struct DifficultyKnobs {
  double neighbor_prob;
  double jitter_xy;     // neighbor car placement noise
  double jitter_theta;
  int clutter;          // extra pillars in the aisle
  bool unknown_patches; // unobserved pockets near the walls
};

DifficultyKnobs knobs_for(Difficulty d) {
  switch (d) {
    case Difficulty::SIM_NORMAL: return {0.5, 0.05, 0.02, 0, false};
    case Difficulty::SIM_COMPLEX: return {0.85, 0.10, 0.05, 2, false};
    case Difficulty::REAL_WORLD_STYLE: return {0.85, 0.10, 0.06, 2, true};
  }
  throw std::logic_error("unreachable");
}

Scenario attempt_scenario(ScenarioKind kind, Difficulty difficulty, uint64_t seed,
                          Rng& rng, const SimConfig& cfg) {
  const DifficultyKnobs kb = knobs_for(difficulty);
  const VehicleParams& veh = cfg.vehicle;
  const double car_len = veh.rear_overhang + veh.wheelbase + veh.front_overhang;
  const double axle_to_center = 0.5 * (veh.wheelbase + veh.front_overhang - veh.rear_overhang);

  Scenario sc;
  sc.kind = kind;
  sc.difficulty = difficulty;
  sc.seed = seed;
  sc.grid = empty_lot(0.1);

  const bool perp = kind == ScenarioKind::PERPENDICULAR;
  const double slot_len = perp ? 5.3 : 6.5;
  const double slot_wid = perp ? 2.5 : 2.2;
  const double pitch = perp ? slot_wid : slot_len;
  const int n_slots = (int)((kLotW - 2.0) / pitch);
  const double row_x0 = 0.5 * (kLotW - n_slots * pitch);
  const int target_idx = 1 + rng.uniform_int(n_slots - 2);

  double slot_top;
  for (int i = 0; i < n_slots; ++i) {
    const double sx = row_x0 + (i + 0.5) * pitch;
    const double sy = kSlotY0 + 0.5 * slot_len * (perp ? 1.0 : 0.0) +
                      0.5 * slot_wid * (perp ? 0.0 : 1.0);
    if (i == target_idx) {
      if (perp) {
        sc.slot.target = Pose2D(sx, kSlotY0 + 0.5 * slot_len + axle_to_center, -M_PI_2);
      } else {
        sc.slot.target = Pose2D(sx - axle_to_center, sy, 0.0);
      }
      sc.slot.length = slot_len;
      sc.slot.width = slot_wid;
      continue;
    }
    if (rng.uniform() >= kb.neighbor_prob) continue;
    const double jx = rng.uniform(-kb.jitter_xy, kb.jitter_xy);
    const double jy = rng.uniform(-kb.jitter_xy, kb.jitter_xy);
    const double jt = rng.uniform(-kb.jitter_theta, kb.jitter_theta);
    if (perp) {
      paint_rect(sc.grid, sx + jx, kSlotY0 + 0.5 * slot_len + jy, -M_PI_2 + jt,
                 car_len, veh.width, Cell::OCCUPIED);
    } else {
      paint_rect(sc.grid, sx + jx, sy + jy, jt, car_len, veh.width, Cell::OCCUPIED);
    }
  }
  slot_top = kSlotY0 + (perp ? slot_len : slot_wid);

  for (int i = 0; i < kb.clutter; ++i) {
    const double px = rng.uniform(3.0, kLotW - 3.0);
    const double py = rng.uniform(kLotH - 3.5, kLotH - 1.0);
    const double side = rng.uniform(0.3, 0.6);
    paint_rect(sc.grid, px, py, rng.uniform(0.0, M_PI), side, side, Cell::OCCUPIED);
  }
  if (kb.unknown_patches) {
    const int n = 2 + rng.uniform_int(3);
    for (int i = 0; i < n; ++i) {
      const double px = rng.uniform(1.0, kLotW - 1.0);
      const double py = rng.uniform(kLotH - 2.5, kLotH - 0.5);
      paint_rect(sc.grid, px, py, rng.uniform(0.0, M_PI), rng.uniform(0.4, 1.2),
                 rng.uniform(0.3, 0.8), Cell::UNKNOWN);
    }
  }

  // Start in the aisle, roughly parallel to the slot row.
  const double y_lo = slot_top + 2.2, y_hi = kLotH - 2.5;
  const double sx = rng.uniform(5.0, kLotW - 5.0);
  const double sy = rng.uniform(y_lo, y_hi);
  const double base = rng.uniform() < 0.5 ? 0.0 : M_PI;
  sc.start = Pose2D(sx, sy, base + rng.uniform(-0.25, 0.25));
  return sc;
}

}  // namespace

Scenario generate_scenario(ScenarioKind kind, Difficulty difficulty, uint64_t seed,
                           const SimConfig& cfg) {
  HybridAStarConfig hcfg;
  hcfg.node_budget = 40000;  // certification only needs an easy witness
  hcfg.sample_step = cfg.collision.sample_step;
  for (uint64_t attempt = 0; attempt < 256; ++attempt) {
    Rng rng(Rng::mix(seed, attempt));
    Scenario sc = attempt_scenario(kind, difficulty, seed, rng, cfg);
    CollisionChecker checker(sc.grid, cfg.vehicle, cfg.collision);
    if (checker.pose_collides(sc.start) || checker.pose_collides(sc.slot.target)) {
      continue;
    }
    HybridAStar planner(checker, cfg.vehicle, hcfg);
    if (!planner.plan(sc.start, sc.slot.target).success) continue;
    return sc;
  }
  throw std::runtime_error("generate_scenario: no admissible scenario found");
}

}  // namespace parkrl
