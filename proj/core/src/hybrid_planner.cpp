#include "parkrl/hybrid_planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <stdexcept>

namespace parkrl {

namespace {

const char* outcome_str(Outcome o) {
  switch (o) {
    case Outcome::RUNNING: return "RUNNING";
    case Outcome::SUCCESS: return "SUCCESS";
    case Outcome::COLLISION: return "COLLISION";
    case Outcome::TIMEOUT: return "TIMEOUT";
  }
  return "?";
}

double steer_for(const RSSegment& seg, double max_steer) {
  switch (seg.steer) {
    case Steer::LEFT: return max_steer;
    case Steer::RIGHT: return -max_steer;
    case Steer::STRAIGHT: return 0.0;
  }
  return 0.0;
}

Action scaled_action(const Eigen::Vector2d& a, const VehicleParams& veh) {
  return Action{a(0) * veh.max_speed, a(1) * veh.max_steer};
}

}  // namespace

std::optional<RSPath> try_rs(const CollisionChecker& checker, const Pose2D& from,
                             const Pose2D& goal, double r_min, double sample_step) {
  std::vector<RSPath> cands = enumerate_all(from, goal, r_min);
  std::sort(cands.begin(), cands.end(), [](const RSPath& a, const RSPath& b) {
    const double la = a.total_length(), lb = b.total_length();
    if (la != lb) return la < lb;
    if (a.gear_shifts() != b.gear_shifts()) return a.gear_shifts() < b.gear_shifts();
    return a.word < b.word;
  });
  for (RSPath& c : cands) {
    if (!checker.path_collides(sample(c, from, r_min, sample_step))) {
      return std::move(c);
    }
  }
  return std::nullopt;
}

std::optional<RSPath> try_rs_approach(const CollisionChecker& checker,
                                      const Pose2D& from, const Pose2D& goal,
                                      double r_min, double sample_step) {
  if (auto direct = try_rs(checker, from, goal, r_min, sample_step)) return direct;
  // back-out poses along the slot axis; RS there plus a straight drive-in is
  // itself a valid bounded-curvature path
  for (const double d : {1.0, 2.0, 3.0}) {
    const Pose2D apt(goal.x - d * std::cos(goal.theta),
                     goal.y - d * std::sin(goal.theta), goal.theta);
    std::vector<RSPath> cands = enumerate_all(from, apt, r_min);
    std::sort(cands.begin(), cands.end(), [](const RSPath& a, const RSPath& b) {
      const double la = a.total_length(), lb = b.total_length();
      if (la != lb) return la < lb;
      if (a.gear_shifts() != b.gear_shifts()) return a.gear_shifts() < b.gear_shifts();
      return a.word < b.word;
    });
    for (RSPath& c : cands) {
      RSPath full = c;
      full.segments.push_back(RSSegment{Steer::STRAIGHT, Gear::FORWARD, d});
      full.word += "S+";
      if (!checker.path_collides(sample(full, from, r_min, sample_step))) {
        return std::move(full);
      }
    }
  }
  return std::nullopt;
}

HybridRlController::HybridRlController(SacAgent& agent, bool stochastic,
                                       HybridPlannerConfig cfg)
    : agent_(&agent), stochastic_(stochastic), cfg_(cfg) {}

void HybridRlController::begin(ParkingEnv& env) {
  tracking_ = false;
  seg_idx_ = 0;
  seg_s_ = 0.0;
  since_check_ = cfg_.rs_check_period;  // query on the very first step
  (void)env;
}

Action HybridRlController::track(ParkingEnv& env) {
  const SimConfig& sim = env.config();
  while (seg_idx_ < path_.segments.size() &&
         path_.segments[seg_idx_].length - seg_s_ < 1e-9) {
    ++seg_idx_;
    seg_s_ = 0.0;
  }
  if (seg_idx_ >= path_.segments.size()) return Action{0.0, 0.0};
  const RSSegment& seg = path_.segments[seg_idx_];
  const double remaining = seg.length - seg_s_;
  const double v_mag = std::min({cfg_.track_speed, sim.vehicle.max_speed,
                                 remaining / sim.dt});
  seg_s_ += v_mag * sim.dt;
  const double sgn = seg.gear == Gear::FORWARD ? 1.0 : -1.0;
  Action a{sgn * v_mag, steer_for(seg, sim.vehicle.max_steer)};
  path_start_ = kinematic_step(VehicleState{path_start_, 0, 0}, a, sim.dt,
                               sim.vehicle)
                    .pose;  // expected pose after this action
  return a;
}

Action HybridRlController::decide(ParkingEnv& env) {
  const SimConfig& sim = env.config();
  const Pose2D pose = env.state().pose;
  if (tracking_) {
    // open-loop tracking is exact; any drift means the commitment is stale
    if (std::hypot(pose.x - path_start_.x, pose.y - path_start_.y) >
            cfg_.max_deviation ||
        std::abs(normalize_angle(pose.theta - path_start_.theta)) >
            cfg_.max_deviation) {
      tracking_ = false;
    }
  }
  if (!tracking_ && ++since_check_ >= cfg_.rs_check_period) {
    since_check_ = 0;
    const double r_min = sim.vehicle.wheelbase / std::tan(sim.vehicle.max_steer);
    if (auto rs = try_rs_approach(env.checker(), pose, env.scenario().slot.target,
                                  r_min, sim.collision.sample_step)) {
      tracking_ = true;
      path_ = std::move(*rs);
      path_start_ = pose;
      seg_idx_ = 0;
      seg_s_ = 0.0;
    }
  }
  if (tracking_) return track(env);

  const std::vector<double> enc = env.observe().encode(sim.max_range);
  const Eigen::VectorXd obs =
      Eigen::Map<const Eigen::VectorXd>(enc.data(), (long)enc.size());
  const Action raw = scaled_action(agent_->act(obs, stochastic_), sim.vehicle);
  const ActionMask mask = compute_mask(env.checker(), pose, sim.vehicle, sim.dt,
                                       sim.collision, cfg_.mask);
  return apply_mask(mask, raw);
}

Action PureSacController::decide(ParkingEnv& env) {
  const SimConfig& sim = env.config();
  const std::vector<double> enc = env.observe().encode(sim.max_range);
  const Eigen::VectorXd obs =
      Eigen::Map<const Eigen::VectorXd>(enc.data(), (long)enc.size());
  return scaled_action(agent_->act(obs, stochastic_), sim.vehicle);
}

void HybridAStarController::begin(ParkingEnv& env) {
  seg_idx_ = 0;
  seg_s_ = 0.0;
  cfg_.sample_step = env.config().collision.sample_step;
  HybridAStar planner(env.checker(), env.config().vehicle, cfg_);
  plan_ = planner.plan(env.state().pose, env.scenario().slot.target);
}

Action HybridAStarController::decide(ParkingEnv& env) {
  if (!plan_.success) return Action{0.0, 0.0};
  const SimConfig& sim = env.config();
  while (seg_idx_ < plan_.segments.size() &&
         plan_.segments[seg_idx_].length - seg_s_ < 1e-9) {
    ++seg_idx_;
    seg_s_ = 0.0;
  }
  if (seg_idx_ >= plan_.segments.size()) return Action{0.0, 0.0};
  const PlanSegment& seg = plan_.segments[seg_idx_];
  const double remaining = seg.length - seg_s_;
  const double v_mag =
      std::min({track_speed_, sim.vehicle.max_speed, remaining / sim.dt});
  seg_s_ += v_mag * sim.dt;
  const double sgn = seg.gear == Gear::FORWARD ? 1.0 : -1.0;
  return Action{sgn * v_mag, seg.steering};
}

EpisodeRecord run_episode(ParkingEnv& env, Controller& controller,
                          std::ostream* log) {
  env.reset();
  controller.begin(env);
  EpisodeRecord rec;
  char buf[160];
  StepResult r;
  do {
    const Action a = controller.decide(env);
    r = env.step(a);
    rec.total_reward += r.reward;
    if (log != nullptr) {
      const Pose2D& p = env.state().pose;
      std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f %.6f %.6f %.6f %.6f %s\n",
                    env.steps() * env.config().dt, p.x, p.y, p.theta, a.velocity,
                    a.steering, r.reward, outcome_str(r.outcome));
      *log << buf;
    }
  } while (!r.done);
  rec.outcome = env.outcome();
  rec.steps = env.steps();
  rec.gear_shifts = env.gear_shifts();
  rec.path_length = env.path_length();
  rec.duration = env.steps() * env.config().dt;
  if (log != nullptr) {
    char foot[200];
    std::snprintf(foot, sizeof foot,
                  "# outcome=%s steps=%d shifts=%d path_length=%.6f duration=%.6f "
                  "return=%.6f\n",
                  outcome_str(rec.outcome), rec.steps, rec.gear_shifts,
                  rec.path_length, rec.duration, rec.total_reward);
    *log << foot;
  }
  return rec;
}

void TrainConfig::validate() const {
  if (total_steps < 1 || eval_every < 1 || eval_episodes < 1 || checkpoint_every < 1) {
    throw std::invalid_argument("TrainConfig: bad parameters");
  }
}

double evaluate_psr(SacAgent& agent, bool use_planner, Difficulty difficulty,
                    uint64_t seed, int episodes, const SimConfig& sim) {
  int successes = 0;
  for (int i = 0; i < episodes; ++i) {
    const ScenarioKind kind =
        i % 2 == 0 ? ScenarioKind::PERPENDICULAR : ScenarioKind::PARALLEL;
    const Scenario sc = generate_scenario(kind, difficulty, Rng::mix(seed, i), sim);
    ParkingEnv env(sc, sim);
    std::unique_ptr<Controller> ctl;
    if (use_planner) {
      ctl = std::make_unique<HybridRlController>(agent, false);
    } else {
      ctl = std::make_unique<PureSacController>(agent, false);
    }
    if (run_episode(env, *ctl).outcome == Outcome::SUCCESS) ++successes;
  }
  return (double)successes / episodes;
}

void write_curve_csv(const std::vector<CurveRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_curve_csv: cannot open " + path);
  out << "step,episode_return,eval_psr\n";
  char buf[96];
  for (const CurveRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", r.step, r.episode_return,
                  r.eval_psr);
    out << buf;
  }
}

TrainResult train_policy(SacAgent& agent, const TrainConfig& cfg,
                         const SimConfig& sim) {
  cfg.validate();
  TrainResult result;
  if (!cfg.out_dir.empty()) std::filesystem::create_directories(cfg.out_dir);

  int step_count = 0;
  long episode = 0;
  double last_return = 0.0;
  int next_eval = cfg.eval_every;
  int next_ckpt = cfg.checkpoint_every;

  while (step_count < cfg.total_steps) {
    const ScenarioKind kind =
        episode % 2 == 0 ? ScenarioKind::PERPENDICULAR : ScenarioKind::PARALLEL;
    const Scenario sc =
        generate_scenario(kind, cfg.difficulty, Rng::mix(cfg.seed, 0x100000 + episode),
                          sim);
    ParkingEnv env(sc, sim);
    std::unique_ptr<Controller> ctl;
    if (cfg.use_planner) {
      ctl = std::make_unique<HybridRlController>(agent, true);
    } else {
      ctl = std::make_unique<PureSacController>(agent, true);
    }
    env.reset();
    ctl->begin(env);
    double ep_return = 0.0;
    bool done = false;
    while (!done && step_count < cfg.total_steps) {
      const std::vector<double> enc = env.observe().encode(sim.max_range);
      const Eigen::VectorXd obs =
          Eigen::Map<const Eigen::VectorXd>(enc.data(), (long)enc.size());
      Action a = ctl->decide(env);
      const bool trainable = ctl->policy_in_control();
      if (trainable && (int)agent.buffer_size() < agent.config().start_steps) {
        // uniform warmup in place of an untrained policy
        Action rnd{agent.rng().uniform(-1.0, 1.0) * sim.vehicle.max_speed,
                   agent.rng().uniform(-1.0, 1.0) * sim.vehicle.max_steer};
        if (cfg.use_planner) {
          const ActionMask mask = compute_mask(env.checker(), env.state().pose,
                                               sim.vehicle, sim.dt, sim.collision);
          rnd = apply_mask(mask, rnd);
        }
        a = rnd;
      }
      const StepResult r = env.step(a);
      ep_return += r.reward;
      ++step_count;
      if (trainable) {
        Transition t;
        t.obs = obs;
        const std::vector<double> enc2 = r.observation.encode(sim.max_range);
        t.next_obs = Eigen::Map<const Eigen::VectorXd>(enc2.data(), (long)enc2.size());
        t.action = Eigen::Vector2d(a.velocity / sim.vehicle.max_speed,
                                   a.steering / sim.vehicle.max_steer);
        t.reward = r.reward;
        t.terminal = r.outcome == Outcome::SUCCESS || r.outcome == Outcome::COLLISION;
        agent.push(std::move(t));
      }
      agent.update();
      done = r.done;

      if (step_count >= next_eval || step_count == cfg.total_steps) {
        const double psr =
            evaluate_psr(agent, cfg.use_planner, cfg.difficulty,
                         Rng::mix(cfg.seed, 0xEA10000ull + step_count),
                         cfg.eval_episodes, sim);
        result.curve.push_back(CurveRow{step_count, last_return, psr});
        result.final_eval_psr = psr;
        while (next_eval <= step_count) next_eval += cfg.eval_every;
      }
      if (!cfg.out_dir.empty() && step_count >= next_ckpt) {
        std::ofstream ck(cfg.out_dir + "/checkpoint_" + std::to_string(step_count) +
                             ".txt",
                         std::ios::binary);
        agent.save(ck);
        while (next_ckpt <= step_count) next_ckpt += cfg.checkpoint_every;
      }
    }
    last_return = ep_return;
    ++episode;
  }

  if (!cfg.out_dir.empty()) {
    result.checkpoint_path = cfg.out_dir + "/checkpoint_final.txt";
    std::ofstream ck(result.checkpoint_path, std::ios::binary);
    agent.save(ck);
    write_curve_csv(result.curve, cfg.out_dir + "/curve.csv");
  }
  return result;
}

}  // namespace parkrl
