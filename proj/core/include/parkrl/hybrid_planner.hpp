#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "parkrl/action_mask.hpp"
#include "parkrl/hybrid_astar.hpp"
#include "parkrl/reeds_shepp.hpp"
#include "parkrl/sac.hpp"
#include "parkrl/simulator.hpp"

namespace parkrl {

// Shortest Reeds-Shepp connection whose swept footprint stays clear, if any.
std::optional<RSPath> try_rs(const CollisionChecker& checker, const Pose2D& from,
                             const Pose2D& goal, double r_min, double sample_step);

// try_rs, falling back to an RS connection onto a back-out pose 1-3 m behind
// the goal along its heading followed by a straight drive-in, checked as one
// composite path.
std::optional<RSPath> try_rs_approach(const CollisionChecker& checker,
                                      const Pose2D& from, const Pose2D& goal,
                                      double r_min, double sample_step);

// Per-episode policy interface used by rollouts and the benchmark harness.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual void begin(ParkingEnv& env) {}
  virtual Action decide(ParkingEnv& env) = 0;
  // true when the last decide() came from the learned policy, i.e. the
  // transition is trainable
  virtual bool policy_in_control() const { return false; }
};

struct HybridPlannerConfig {
  int rs_check_period = 5;   // policy steps between RS feasibility queries
  double track_speed = 1.0;  // cruise speed along a committed RS path
  double max_deviation = 1e-6;  // tracking tolerance before re-planning
  ActionMaskConfig mask;
};

// Rule-based layer first: once a collision-free RS connection to the slot
// exists, commit to it and track it open loop (the dynamics are exact).
// Until then the SAC policy drives, clipped by the action mask.
class HybridRlController : public Controller {
 public:
  HybridRlController(SacAgent& agent, bool stochastic,
                     HybridPlannerConfig cfg = HybridPlannerConfig{});
  void begin(ParkingEnv& env) override;
  Action decide(ParkingEnv& env) override;
  bool policy_in_control() const override { return !tracking_; }
  bool tracking() const { return tracking_; }

 private:
  Action track(ParkingEnv& env);

  SacAgent* agent_;
  bool stochastic_;
  HybridPlannerConfig cfg_;
  bool tracking_ = false;
  RSPath path_;
  Pose2D path_start_;
  size_t seg_idx_ = 0;
  double seg_s_ = 0.0;
  int since_check_ = 0;
};

// The learned policy alone, unmasked.
class PureSacController : public Controller {
 public:
  PureSacController(SacAgent& agent, bool stochastic)
      : agent_(&agent), stochastic_(stochastic) {}
  Action decide(ParkingEnv& env) override;
  bool policy_in_control() const override { return true; }

 private:
  SacAgent* agent_;
  bool stochastic_;
};

// Plans once with hybrid A*, then tracks the plan open loop. Stands still
// if planning fails.
class HybridAStarController : public Controller {
 public:
  explicit HybridAStarController(HybridAStarConfig cfg = HybridAStarConfig{},
                                 double track_speed = 1.0)
      : cfg_(cfg), track_speed_(track_speed) {}
  void begin(ParkingEnv& env) override;
  Action decide(ParkingEnv& env) override;
  bool planned() const { return plan_.success; }

 private:
  HybridAStarConfig cfg_;
  double track_speed_;
  PlanResult plan_;
  size_t seg_idx_ = 0;
  double seg_s_ = 0.0;
};

struct EpisodeRecord {
  Outcome outcome = Outcome::TIMEOUT;
  int steps = 0;
  int gear_shifts = 0;
  double path_length = 0.0;
  double duration = 0.0;  // seconds, steps * dt
  double total_reward = 0.0;
};

// Runs one episode to completion. When `log` is given, writes one
// `t x y theta v delta reward outcome` row per step plus a summary footer.
EpisodeRecord run_episode(ParkingEnv& env, Controller& controller,
                          std::ostream* log = nullptr);

struct CurveRow {
  int step = 0;
  double episode_return = 0.0;
  double eval_psr = 0.0;
};

struct TrainConfig {
  uint64_t seed = 0;
  int total_steps = 100000;
  int eval_every = 5000;
  int eval_episodes = 20;
  bool use_planner = true;  // hybrid when true, pure SAC otherwise
  Difficulty difficulty = Difficulty::SIM_NORMAL;
  std::string out_dir;      // curve.csv + checkpoints; empty writes nothing
  int checkpoint_every = 25000;

  void validate() const;
};

struct TrainResult {
  double final_eval_psr = 0.0;
  std::vector<CurveRow> curve;
  std::string checkpoint_path;  // empty when out_dir was empty
};

// Full training run over generated scenarios (perpendicular and parallel
// alternate episode by episode). Deterministic for a fixed config.
TrainResult train_policy(SacAgent& agent, const TrainConfig& cfg,
                         const SimConfig& sim);

// Success rate of the deterministic policy over freshly generated
// scenarios; the eval half of the learning curve.
double evaluate_psr(SacAgent& agent, bool use_planner, Difficulty difficulty,
                    uint64_t seed, int episodes, const SimConfig& sim);

void write_curve_csv(const std::vector<CurveRow>& rows, const std::string& path);

}  // namespace parkrl
