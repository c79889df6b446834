#include "parkrl/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

namespace parkrl {

std::vector<double> Observation::encode(double max_range) const {
  std::vector<double> out;
  out.reserve(size());
  for (const double b : beams) out.push_back(b / max_range);
  out.push_back(target_dx);
  out.push_back(target_dy);
  out.push_back(target_sin);
  out.push_back(target_cos);
  out.push_back(ego_velocity);
  out.push_back(ego_steering);
  return out;
}

VehicleState kinematic_step(const VehicleState& state, const Action& action, double dt,
                            const VehicleParams& vehicle) {
  if (std::abs(action.velocity) > vehicle.max_speed + 1e-9 ||
      std::abs(action.steering) > vehicle.max_steer + 1e-9)
    throw std::invalid_argument("kinematic_step: action out of bounds");
  VehicleState next;
  next.velocity = action.velocity;
  next.steering = action.steering;
  const double ds = action.velocity * dt;  // signed arc displacement
  const Pose2D& p = state.pose;
  const double kappa = std::tan(action.steering) / vehicle.wheelbase;
  if (std::abs(kappa * ds) < 1e-12) {
    next.pose =
        Pose2D(p.x + ds * std::cos(p.theta), p.y + ds * std::sin(p.theta), p.theta);
    return next;
  }
  const double theta1 = p.theta + ds * kappa;
  next.pose = Pose2D(p.x + (std::sin(theta1) - std::sin(p.theta)) / kappa,
                     p.y - (std::cos(theta1) - std::cos(p.theta)) / kappa, theta1);
  return next;
}

std::array<Eigen::Vector2d, 4> slot_polygon(const SlotSpec& slot, const VehicleParams& v) {
  // slot rectangle centered on the footprint center at the target pose
  const double cx = 0.5 * (v.wheelbase + v.front_overhang - v.rear_overhang);
  const double hl = 0.5 * slot.length, hw = 0.5 * slot.width;
  std::array<Eigen::Vector2d, 4> out;
  const std::array<Eigen::Vector2d, 4> local = {
      Eigen::Vector2d{cx - hl, -hw}, {cx + hl, -hw}, {cx + hl, hw}, {cx - hl, hw}};
  for (int i = 0; i < 4; ++i) out[i] = se2_apply(slot.target, local[i]);
  return out;
}

namespace {

bool footprint_inside_slot(const Pose2D& pose, const SlotSpec& slot,
                           const VehicleParams& v) {
  const auto fp = footprint_polygon(pose, v);
  const double cx = 0.5 * (v.wheelbase + v.front_overhang - v.rear_overhang);
  const double hl = 0.5 * slot.length, hw = 0.5 * slot.width;
  const Pose2D inv = se2_inverse(slot.target);
  for (const auto& corner : fp) {
    const Eigen::Vector2d local = se2_apply(inv, corner);
    if (local.x() < cx - hl - 1e-9 || local.x() > cx + hl + 1e-9 ||
        std::abs(local.y()) > hw + 1e-9)
      return false;
  }
  return true;
}

}  // namespace

ParkingEnv::ParkingEnv(Scenario scenario, SimConfig cfg)
    : scenario_(std::move(scenario)), cfg_(cfg) {
  cfg_.vehicle.validate();
  cfg_.collision.validate();
  checker_ = std::make_unique<CollisionChecker>(scenario_.grid, cfg_.vehicle,
                                                cfg_.collision);
  if (checker_->pose_collides(scenario_.start))
    throw std::invalid_argument("ParkingEnv: start pose collides");
  if (checker_->pose_collides(scenario_.slot.target))
    throw std::invalid_argument("ParkingEnv: target pose collides");
  if (!footprint_inside_slot(scenario_.slot.target, scenario_.slot, cfg_.vehicle))
    throw std::invalid_argument("ParkingEnv: footprint does not fit the slot");
}

double ParkingEnv::target_distance(const Pose2D& pose) const {
  const Pose2D& t = scenario_.slot.target;
  return cfg_.w_progress_pos * std::hypot(pose.x - t.x, pose.y - t.y) +
         cfg_.w_progress_ang * std::abs(normalize_angle(pose.theta - t.theta));
}

bool ParkingEnv::success_at(const Pose2D& pose) const {
  const Pose2D& t = scenario_.slot.target;
  return std::hypot(pose.x - t.x, pose.y - t.y) <= cfg_.pos_tol &&
         std::abs(normalize_angle(pose.theta - t.theta)) <= cfg_.ang_tol &&
         footprint_inside_slot(pose, scenario_.slot, cfg_.vehicle);
}

Observation ParkingEnv::observe() const {
  Observation obs;
  obs.beams = checker_->cast_beams(state_.pose, cfg_.n_beams, cfg_.max_range);
  const Eigen::Vector2d rel = se2_apply(se2_inverse(state_.pose),
                                        {scenario_.slot.target.x, scenario_.slot.target.y});
  obs.target_dx = rel.x();
  obs.target_dy = rel.y();
  const double dth = normalize_angle(scenario_.slot.target.theta - state_.pose.theta);
  obs.target_sin = std::sin(dth);
  obs.target_cos = std::cos(dth);
  obs.ego_velocity = state_.velocity;
  obs.ego_steering = state_.steering;
  return obs;
}

Observation ParkingEnv::reset() {
  state_ = VehicleState{scenario_.start, 0.0, 0.0};
  outcome_ = Outcome::RUNNING;
  active_ = true;
  steps_ = 0;
  gear_shifts_ = 0;
  path_length_ = 0.0;
  last_v_sign_ = 0.0;
  trace_.clear();
  return observe();
}

StepResult ParkingEnv::step(const Action& action) {
  if (!active_) throw std::logic_error("ParkingEnv::step before reset or after done");

  const double prev_dist = target_distance(state_.pose);
  const VehicleState next = kinematic_step(state_, action, cfg_.dt, cfg_.vehicle);

  // swept-path collision check, sub-sampled along the constant-control arc
  const double ds = std::abs(action.velocity) * cfg_.dt;
  const int n = std::max(1, static_cast<int>(std::ceil(ds / cfg_.collision.sample_step)));
  bool collided = false;
  VehicleState probe = state_;
  for (int k = 1; k <= n && !collided; ++k) {
    Action sub = action;
    probe = kinematic_step(state_, sub, cfg_.dt * k / n, cfg_.vehicle);
    collided = checker_->pose_collides(probe.pose);
  }

  StepResult result;
  double reward = -cfg_.step_penalty;

  const double v_sign = action.velocity > 0 ? 1.0 : (action.velocity < 0 ? -1.0 : 0.0);
  if (v_sign != 0.0 && last_v_sign_ != 0.0 && v_sign != last_v_sign_) {
    ++gear_shifts_;
    reward -= cfg_.shift_penalty;
  }
  if (v_sign != 0.0) last_v_sign_ = v_sign;

  ++steps_;
  if (collided) {
    outcome_ = Outcome::COLLISION;
    reward -= cfg_.collision_penalty;
  } else {
    path_length_ += ds;
    state_ = next;
    trace_.push_back(state_.pose);
    reward += prev_dist - target_distance(state_.pose);
    if (success_at(state_.pose)) {
      outcome_ = Outcome::SUCCESS;
      reward += cfg_.success_bonus;
    } else if (steps_ >= cfg_.max_steps) {
      outcome_ = Outcome::TIMEOUT;
    }
  }

  result.outcome = outcome_;
  result.done = outcome_ != Outcome::RUNNING;
  result.reward = reward;
  result.observation = observe();
  if (result.done) active_ = false;
  return result;
}

void ParkingEnv::render_frame(const std::string& path) const {
  const OccupancyGrid& g = scenario_.grid;
  const int w = g.width(), h = g.height();
  std::vector<uint8_t> rgb(static_cast<size_t>(w) * h * 3);
  const auto put = [&](int ix, int iy, uint8_t r, uint8_t gg, uint8_t b) {
    if (ix < 0 || ix >= w || iy < 0 || iy >= h) return;
    const size_t idx = (static_cast<size_t>(h - 1 - iy) * w + ix) * 3;
    rgb[idx] = r;
    rgb[idx + 1] = gg;
    rgb[idx + 2] = b;
  };
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix)
      switch (g.at(ix, iy)) {
        case Cell::FREE: put(ix, iy, 255, 255, 255); break;
        case Cell::OCCUPIED: put(ix, iy, 40, 40, 40); break;
        case Cell::UNKNOWN: put(ix, iy, 205, 205, 205); break;
      }
  const auto stamp_world = [&](double x, double y, uint8_t r, uint8_t gg, uint8_t b) {
    const auto [ix, iy] = g.world_to_cell(x, y);
    put(ix, iy, r, gg, b);
  };
  // target slot outline
  const auto slot = slot_polygon(scenario_.slot, cfg_.vehicle);
  for (int e = 0; e < 4; ++e) {
    const auto &a = slot[e], &b = slot[(e + 1) % 4];
    for (double s = 0.0; s <= 1.0; s += 0.01)
      stamp_world(a.x() + s * (b.x() - a.x()), a.y() + s * (b.y() - a.y()), 0, 150, 0);
  }
  // trajectory trace
  for (const auto& p : trace_) stamp_world(p.x, p.y, 0, 0, 220);
  // current footprint outline
  const auto fp = footprint_polygon(state_.pose, cfg_.vehicle);
  for (int e = 0; e < 4; ++e) {
    const auto &a = fp[e], &b = fp[(e + 1) % 4];
    for (double s = 0.0; s <= 1.0; s += 0.01)
      stamp_world(a.x() + s * (b.x() - a.x()), a.y() + s * (b.y() - a.y()), 220, 0, 0);
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("render_frame: cannot write " + path);
  out << "P6\n" << w << " " << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(rgb.data()), static_cast<std::streamsize>(rgb.size()));
  if (!out) throw std::runtime_error("render_frame: write failed: " + path);
}

void save_scenario(const Scenario& s, const std::string& path) {
  const std::string grid_path = path + ".grid.pgm";
  save_grid(s.grid, grid_path);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_scenario: cannot write " + path);
  char buf[512];
  const auto name_of = [](const std::string& p) {
    const auto slash = p.find_last_of('/');
    return slash == std::string::npos ? p : p.substr(slash + 1);
  };
  std::snprintf(buf, sizeof(buf),
                "grid: %s\nstart_x: %.17g\nstart_y: %.17g\nstart_theta: %.17g\n"
                "target_x: %.17g\ntarget_y: %.17g\ntarget_theta: %.17g\n"
                "slot_length: %.17g\nslot_width: %.17g\nkind: %s\ndifficulty: %s\nseed: %llu\n",
                name_of(grid_path).c_str(), s.start.x, s.start.y, s.start.theta,
                s.slot.target.x, s.slot.target.y, s.slot.target.theta, s.slot.length,
                s.slot.width,
                s.kind == ScenarioKind::PARALLEL ? "parallel" : "perpendicular",
                s.difficulty == Difficulty::SIM_NORMAL     ? "normal"
                : s.difficulty == Difficulty::SIM_COMPLEX ? "complex"
                                                          : "real_world",
                static_cast<unsigned long long>(s.seed));
  out << buf;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_scenario: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon != std::string::npos) kv[line.substr(0, colon)] = line.substr(colon + 2);
  }
  const auto need = [&](const std::string& k) {
    const auto it = kv.find(k);
    if (it == kv.end()) throw std::runtime_error("load_scenario: missing key " + k);
    return it->second;
  };
  Scenario s;
  const auto slash = path.find_last_of('/');
  const std::string dir = slash == std::string::npos ? "" : path.substr(0, slash + 1);
  s.grid = load_grid(dir + need("grid"));
  s.start = Pose2D(std::stod(need("start_x")), std::stod(need("start_y")),
                   std::stod(need("start_theta")));
  s.slot.target = Pose2D(std::stod(need("target_x")), std::stod(need("target_y")),
                         std::stod(need("target_theta")));
  s.slot.length = std::stod(need("slot_length"));
  s.slot.width = std::stod(need("slot_width"));
  s.kind = need("kind") == "parallel" ? ScenarioKind::PARALLEL : ScenarioKind::PERPENDICULAR;
  const std::string d = need("difficulty");
  s.difficulty = d == "normal"    ? Difficulty::SIM_NORMAL
                 : d == "complex" ? Difficulty::SIM_COMPLEX
                                  : Difficulty::REAL_WORLD_STYLE;
  s.seed = std::stoull(need("seed"));
  return s;
}

}  // namespace parkrl
