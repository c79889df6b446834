#include <benchmark/benchmark.h>

#include "parkrl/action_mask.hpp"
#include "parkrl/collision.hpp"
#include "parkrl/hybrid_astar.hpp"
#include "parkrl/ogm.hpp"
#include "parkrl/reeds_shepp.hpp"
#include "parkrl/rng.hpp"
#include "parkrl/simulator.hpp"

using namespace parkrl;

namespace {

Scenario make_scenario() {
  return generate_scenario(ScenarioKind::PERPENDICULAR, Difficulty::SIM_NORMAL, 1);
}

void BM_ReedsSheppSolve(benchmark::State& state) {
  Rng rng(1);
  std::vector<std::pair<Pose2D, Pose2D>> pairs;
  for (int i = 0; i < 256; ++i) {
    pairs.emplace_back(Pose2D(rng.uniform(-10, 10), rng.uniform(-10, 10),
                              rng.uniform(-M_PI, M_PI)),
                       Pose2D(rng.uniform(-10, 10), rng.uniform(-10, 10),
                              rng.uniform(-M_PI, M_PI)));
  }
  size_t i = 0;
  for (auto _ : state) {
    const auto& [a, b] = pairs[i++ % pairs.size()];
    benchmark::DoNotOptimize(solve(a, b, 1.0));
  }
}
BENCHMARK(BM_ReedsSheppSolve);

void BM_FootprintCollision(benchmark::State& state) {
  const Scenario sc = make_scenario();
  const SimConfig sim;
  const CollisionChecker checker(sc.grid, sim.vehicle, sim.collision);
  Rng rng(2);
  std::vector<Pose2D> poses;
  for (int i = 0; i < 256; ++i) {
    poses.emplace_back(rng.uniform(2, 28), rng.uniform(2, 12),
                       rng.uniform(-M_PI, M_PI));
  }
  size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(checker.pose_collides(poses[i++ % poses.size()]));
  }
}
BENCHMARK(BM_FootprintCollision);

void BM_ActionMask(benchmark::State& state) {
  const Scenario sc = make_scenario();
  const SimConfig sim;
  const CollisionChecker checker(sc.grid, sim.vehicle, sim.collision);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        compute_mask(checker, sc.start, sim.vehicle, sim.dt, sim.collision));
  }
}
BENCHMARK(BM_ActionMask);

void BM_Rasterize(benchmark::State& state) {
  Rng rng(3);
  std::vector<Eigen::Vector3d> points;
  for (int i = 0; i < 20000; ++i) {
    points.emplace_back(rng.uniform(0, 30), rng.uniform(0, 14), rng.uniform(-1, 1));
  }
  const std::vector<Eigen::Vector2d> origins{{15.0, 7.0}};
  const OgmBuildConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rasterize(points, origins, cfg));
  }
}
BENCHMARK(BM_Rasterize);

void BM_HybridAStarPlan(benchmark::State& state) {
  const Scenario sc = make_scenario();
  const SimConfig sim;
  const CollisionChecker checker(sc.grid, sim.vehicle, sim.collision);
  const HybridAStar planner(checker, sim.vehicle);
  for (auto _ : state) {
    benchmark::DoNotOptimize(planner.plan(sc.start, sc.slot.target));
  }
}
BENCHMARK(BM_HybridAStarPlan);

}  // namespace

BENCHMARK_MAIN();
