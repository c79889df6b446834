#pragma once

#include <memory>
#include <string>
#include <vector>

#include "parkrl/collision.hpp"
#include "parkrl/ogm.hpp"
#include "parkrl/se2.hpp"

namespace parkrl {

struct VehicleState {
  Pose2D pose;
  double velocity = 0.0;  // signed, negative = reverse
  double steering = 0.0;
};

struct Action {
  double velocity = 0.0;
  double steering = 0.0;
};

enum class Outcome { RUNNING, SUCCESS, COLLISION, TIMEOUT };

// Fixed-length sensor+goal encoding: n_beams distances, the slot pose in the
// ego frame, and the ego motion state.
struct Observation {
  std::vector<double> beams;
  double target_dx = 0.0, target_dy = 0.0;
  double target_sin = 0.0, target_cos = 1.0;
  double ego_velocity = 0.0, ego_steering = 0.0;

  size_t size() const { return beams.size() + 6; }
  // Flat vector with beams normalized by max_range (network input).
  std::vector<double> encode(double max_range) const;
};

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  Outcome outcome = Outcome::RUNNING;
};

// Target slot: rear-axle goal pose plus the slot rectangle, which is
// centered on the vehicle footprint center at the goal pose.
struct SlotSpec {
  Pose2D target;
  double length = 5.3;  // along the slot heading
  double width = 2.5;
};

enum class ScenarioKind { PARALLEL, PERPENDICULAR };
enum class Difficulty { SIM_NORMAL, SIM_COMPLEX, REAL_WORLD_STYLE };

struct Scenario {
  OccupancyGrid grid;
  Pose2D start;
  SlotSpec slot;
  ScenarioKind kind = ScenarioKind::PERPENDICULAR;
  Difficulty difficulty = Difficulty::SIM_NORMAL;
  uint64_t seed = 0;
};

struct SimConfig {
  VehicleParams vehicle;
  CollisionConfig collision;
  double dt = 0.1;
  int max_steps = 500;
  double pos_tol = 0.3;
  double ang_tol = 10.0 * M_PI / 180.0;
  int n_beams = 72;
  double max_range = 10.0;
  // reward shaping
  double w_progress_pos = 1.0;   // per meter
  double w_progress_ang = 0.5;   // per radian
  double step_penalty = 0.01;
  double shift_penalty = 0.05;
  double collision_penalty = 5.0;
  double success_bonus = 10.0;
};

// Constant-(v, steering) bicycle-model step with exact arc integration.
// Throws if the action exceeds the vehicle bounds.
VehicleState kinematic_step(const VehicleState& state, const Action& action, double dt,
                            const VehicleParams& vehicle);

// Corner points of the slot rectangle (counter-clockwise).
std::array<Eigen::Vector2d, 4> slot_polygon(const SlotSpec& slot, const VehicleParams& v);

// Gym-style single-agent environment. One instance is single-threaded.
class ParkingEnv {
 public:
  ParkingEnv(Scenario scenario, SimConfig cfg);

  Observation reset();
  StepResult step(const Action& action);

  Observation observe() const;

  const Scenario& scenario() const { return scenario_; }
  const SimConfig& config() const { return cfg_; }
  const VehicleState& state() const { return state_; }
  const CollisionChecker& checker() const { return *checker_; }
  Outcome outcome() const { return outcome_; }
  int steps() const { return steps_; }
  int gear_shifts() const { return gear_shifts_; }
  double path_length() const { return path_length_; }
  const std::vector<Pose2D>& trace() const { return trace_; }

  bool success_at(const Pose2D& pose) const;

  // BEV raster of the current episode (PPM image).
  void render_frame(const std::string& path) const;

 private:
  double target_distance(const Pose2D& pose) const;

  Scenario scenario_;
  SimConfig cfg_;
  std::unique_ptr<CollisionChecker> checker_;
  VehicleState state_;
  Outcome outcome_ = Outcome::RUNNING;
  bool active_ = false;
  int steps_ = 0;
  int gear_shifts_ = 0;
  double path_length_ = 0.0;
  double last_v_sign_ = 0.0;
  std::vector<Pose2D> trace_;
};

// Deterministic scenario synthesis; resamples internally until the start and
// target are admissible and Hybrid A* certifies a solution.
Scenario generate_scenario(ScenarioKind kind, Difficulty difficulty, uint64_t seed,
                           const SimConfig& cfg = SimConfig{});

// Scenario file: key-value text next to a grid file pair.
void save_scenario(const Scenario& s, const std::string& path);
Scenario load_scenario(const std::string& path);

}  // namespace parkrl
