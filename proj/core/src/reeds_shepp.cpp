#include "parkrl/reeds_shepp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

// Base expression formulas follow Reeds & Shepp (1990) with the known
// errata, in the formulation popularized by OMPL: each family is evaluated
// under time-flip, reflection, and (where distinct) backwards transforms.

namespace parkrl {
namespace {

constexpr double kZero = 10.0 * std::numeric_limits<double>::epsilon();
constexpr double kClamp = 1e-12;   // tolerated overshoot of acos/asin args
constexpr double kEndpointTol = 1e-6;

double mod2pi(double x) {
  double v = std::fmod(x, 2.0 * M_PI);
  if (v < -M_PI) v += 2.0 * M_PI;
  else if (v > M_PI) v -= 2.0 * M_PI;
  return v;
}

void polar(double x, double y, double& r, double& theta) {
  r = std::hypot(x, y);
  theta = std::atan2(y, x);
}

double clamped_acos(double a) {
  if (a > 1.0 && a < 1.0 + kClamp) a = 1.0;
  if (a < -1.0 && a > -1.0 - kClamp) a = -1.0;
  return std::acos(a);
}

double clamped_asin(double a) {
  if (a > 1.0 && a < 1.0 + kClamp) a = 1.0;
  if (a < -1.0 && a > -1.0 - kClamp) a = -1.0;
  return std::asin(a);
}

void tau_omega(double u, double v, double xi, double eta, double phi, double& tau,
               double& omega) {
  const double delta = mod2pi(u - v);
  const double a = std::sin(u) - std::sin(delta);
  const double b = std::cos(u) - std::cos(delta) - 1.0;
  const double t1 = std::atan2(eta * a - xi * b, xi * a + eta * b);
  const double t2 = 2.0 * (std::cos(delta) - std::cos(v) - std::cos(u)) + 3.0;
  tau = (t2 < 0) ? mod2pi(t1 + M_PI) : mod2pi(t1);
  omega = mod2pi(tau - u + v - phi);
}

// formula 8.1: L+ S+ L+
bool LpSpLp(double x, double y, double phi, double& t, double& u, double& v) {
  polar(x - std::sin(phi), y - 1.0 + std::cos(phi), u, t);
  if (t >= -kZero) {
    v = mod2pi(phi - t);
    if (v >= -kZero) return true;
  }
  return false;
}

// formula 8.2: L+ S+ R+
bool LpSpRp(double x, double y, double phi, double& t, double& u, double& v) {
  double t1, u1;
  polar(x + std::sin(phi), y - 1.0 - std::cos(phi), u1, t1);
  u1 = u1 * u1;
  if (u1 >= 4.0) {
    u = std::sqrt(u1 - 4.0);
    const double theta = std::atan2(2.0, u);
    t = mod2pi(t1 + theta);
    v = mod2pi(t - phi);
    return t >= -kZero && v >= -kZero;
  }
  return false;
}

// formula 8.3/8.4 (errata applied): L+ R- L
bool LpRmL(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x - std::sin(phi), eta = y - 1.0 + std::cos(phi);
  double u1, theta;
  polar(xi, eta, u1, theta);
  if (u1 <= 4.0) {
    u = -2.0 * clamped_asin(0.25 * u1);
    t = mod2pi(theta + 0.5 * u + M_PI);
    v = mod2pi(phi - t + u);
    return t >= -kZero && u <= kZero;
  }
  return false;
}

// formula 8.7: L+ Ru+ Lu- R-
bool LpRupLumRm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi), eta = y - 1.0 - std::cos(phi);
  const double rho = 0.25 * (2.0 + std::hypot(xi, eta));
  if (rho <= 1.0 + kClamp) {
    u = clamped_acos(rho);
    tau_omega(u, -u, xi, eta, phi, t, v);
    return t >= -kZero && v <= kZero;
  }
  return false;
}

// formula 8.8: L+ Ru- Lu- R+
bool LpRumLumRp(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi), eta = y - 1.0 - std::cos(phi);
  const double rho = (20.0 - xi * xi - eta * eta) / 16.0;
  if (rho >= 0 && rho <= 1.0 + kClamp) {
    u = -clamped_acos(rho);
    if (u >= -0.5 * M_PI) {
      tau_omega(u, u, xi, eta, phi, t, v);
      return t >= -kZero && v >= -kZero;
    }
  }
  return false;
}

// formula 8.9: L+ R- S- L-
bool LpRmSmLm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x - std::sin(phi), eta = y - 1.0 + std::cos(phi);
  double rho, theta;
  polar(xi, eta, rho, theta);
  if (rho >= 2.0) {
    const double r = std::sqrt(rho * rho - 4.0);
    u = 2.0 - r;
    t = mod2pi(theta + std::atan2(r, -2.0));
    v = mod2pi(phi - 0.5 * M_PI - t);
    return t >= -kZero && u <= kZero && v <= kZero;
  }
  return false;
}

// formula 8.10: L+ R- S- R-
bool LpRmSmRm(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi), eta = y - 1.0 - std::cos(phi);
  double rho, theta;
  polar(-eta, xi, rho, theta);
  if (rho >= 2.0) {
    t = theta;
    u = 2.0 - rho;
    v = mod2pi(t + 0.5 * M_PI - phi);
    return t >= -kZero && u <= kZero && v <= kZero;
  }
  return false;
}

// formula 8.11 (errata applied): L+ R- S L- R+
bool LpRmSLmRp(double x, double y, double phi, double& t, double& u, double& v) {
  const double xi = x + std::sin(phi), eta = y - 1.0 - std::cos(phi);
  double rho, theta;
  polar(xi, eta, rho, theta);
  if (rho >= 2.0) {
    u = 4.0 - std::sqrt(rho * rho - 4.0);
    if (u <= kZero) {
      t = mod2pi(std::atan2((4.0 - u) * xi - 2.0 * eta, -2.0 * xi + (u - 4.0) * eta));
      v = mod2pi(t - phi);
      return t >= -kZero && v >= -kZero;
    }
  }
  return false;
}

constexpr Steer L = Steer::LEFT;
constexpr Steer S = Steer::STRAIGHT;
constexpr Steer R = Steer::RIGHT;

struct Candidate {
  Steer pattern[5];
  double len[5];  // signed, unit-radius space; 0 marks an unused slot
  int count;
};

Steer mirror(Steer s) { return s == L ? R : (s == R ? L : S); }

class Collector {
 public:
  Collector(double x, double y, double phi) : x_(x), y_(y), phi_(phi) {
    xb_ = x * std::cos(phi) + y * std::sin(phi);
    yb_ = x * std::sin(phi) - y * std::cos(phi);
  }

  using Formula = bool (*)(double, double, double, double&, double&, double&);

  // Evaluates a 3-piece family under all four sign transforms.
  void family3(Formula f, Steer a, Steer b, Steer c, bool backwards = false) {
    double t, u, v;
    const double x = backwards ? xb_ : x_;
    const double y = backwards ? yb_ : y_;
    if (f(x, y, phi_, t, u, v)) push3(a, b, c, t, u, v, backwards);
    if (f(-x, y, -phi_, t, u, v)) push3(a, b, c, -t, -u, -v, backwards);
    if (f(x, -y, -phi_, t, u, v)) push3(mirror(a), mirror(b), mirror(c), t, u, v, backwards);
    if (f(-x, -y, phi_, t, u, v))
      push3(mirror(a), mirror(b), mirror(c), -t, -u, -v, backwards);
  }

  // CCCC families: lengths (t, u, su*u, v) with pattern L R L R.
  void family4(Formula f, double su) {
    double t, u, v;
    if (f(x_, y_, phi_, t, u, v)) push({{L, R, L, R}, {t, u, su * u, v}, 4});
    if (f(-x_, y_, -phi_, t, u, v)) push({{L, R, L, R}, {-t, -u, -su * u, -v}, 4});
    if (f(x_, -y_, -phi_, t, u, v)) push({{R, L, R, L}, {t, u, su * u, v}, 4});
    if (f(-x_, -y_, phi_, t, u, v)) push({{R, L, R, L}, {-t, -u, -su * u, -v}, 4});
  }

  // CCSC families: a fixed -pi/2 arc follows the first turn.
  void ccsc(Formula f, Steer last) {
    double t, u, v;
    if (f(x_, y_, phi_, t, u, v)) push({{L, R, S, last}, {t, -0.5 * M_PI, u, v}, 4});
    if (f(-x_, y_, -phi_, t, u, v)) push({{L, R, S, last}, {-t, 0.5 * M_PI, -u, -v}, 4});
    if (f(x_, -y_, -phi_, t, u, v))
      push({{R, L, S, mirror(last)}, {t, -0.5 * M_PI, u, v}, 4});
    if (f(-x_, -y_, phi_, t, u, v))
      push({{R, L, S, mirror(last)}, {-t, 0.5 * M_PI, -u, -v}, 4});
    // backwards: reversed piece order
    if (f(xb_, yb_, phi_, t, u, v)) push({{last, S, R, L}, {v, u, -0.5 * M_PI, t}, 4});
    if (f(-xb_, yb_, -phi_, t, u, v)) push({{last, S, R, L}, {-v, -u, 0.5 * M_PI, -t}, 4});
    if (f(xb_, -yb_, -phi_, t, u, v))
      push({{mirror(last), S, L, R}, {v, u, -0.5 * M_PI, t}, 4});
    if (f(-xb_, -yb_, phi_, t, u, v))
      push({{mirror(last), S, L, R}, {-v, -u, 0.5 * M_PI, -t}, 4});
  }

  void ccscc() {
    double t, u, v;
    if (LpRmSLmRp(x_, y_, phi_, t, u, v))
      push({{L, R, S, L, R}, {t, -0.5 * M_PI, u, -0.5 * M_PI, v}, 5});
    if (LpRmSLmRp(-x_, y_, -phi_, t, u, v))
      push({{L, R, S, L, R}, {-t, 0.5 * M_PI, -u, 0.5 * M_PI, -v}, 5});
    if (LpRmSLmRp(x_, -y_, -phi_, t, u, v))
      push({{R, L, S, R, L}, {t, -0.5 * M_PI, u, -0.5 * M_PI, v}, 5});
    if (LpRmSLmRp(-x_, -y_, phi_, t, u, v))
      push({{R, L, S, R, L}, {-t, 0.5 * M_PI, -u, 0.5 * M_PI, -v}, 5});
  }

  std::vector<Candidate> out;

 private:
  void push3(Steer a, Steer b, Steer c, double t, double u, double v, bool backwards) {
    if (backwards) push({{c, b, a}, {v, u, t}, 3});
    else push({{a, b, c}, {t, u, v}, 3});
  }
  void push(Candidate c) { out.push_back(c); }

  double x_, y_, phi_, xb_, yb_;
};

RSPath to_path(const Candidate& c, double r_min) {
  RSPath p;
  for (int i = 0; i < c.count; ++i) {
    const double l = c.len[i];
    if (std::abs(l) < kZero) continue;
    RSSegment seg;
    seg.steer = c.pattern[i];
    seg.gear = l > 0 ? Gear::FORWARD : Gear::BACKWARD;
    seg.length = std::abs(l) * r_min;
    p.segments.push_back(seg);
  }
  if (p.segments.empty())
    p.segments.push_back({Steer::STRAIGHT, Gear::FORWARD, 0.0});
  for (const auto& s : p.segments) {
    p.word += (s.steer == L ? 'L' : s.steer == R ? 'R' : 'S');
    p.word += (s.gear == Gear::FORWARD ? '+' : '-');
  }
  return p;
}

// Advances a pose along one segment by arc distance s (0 <= s <= length).
Pose2D advance(const Pose2D& p, const RSSegment& seg, double s, double r_min) {
  const double d = seg.gear == Gear::FORWARD ? 1.0 : -1.0;
  if (seg.steer == Steer::STRAIGHT)
    return {p.x + d * s * std::cos(p.theta), p.y + d * s * std::sin(p.theta), p.theta};
  const double kappa = (seg.steer == Steer::LEFT ? 1.0 : -1.0) / r_min;
  const double theta1 = p.theta + d * s * kappa;
  return {p.x + (std::sin(theta1) - std::sin(p.theta)) / kappa,
          p.y - (std::cos(theta1) - std::cos(p.theta)) / kappa, theta1};
}

}  // namespace

double RSPath::total_length() const {
  double l = 0;
  for (const auto& s : segments) l += s.length;
  return l;
}

int RSPath::gear_shifts() const {
  int shifts = 0;
  for (size_t i = 0; i + 1 < segments.size(); ++i)
    if (segments[i].length > 0 && segments[i + 1].length > 0 &&
        segments[i].gear != segments[i + 1].gear)
      ++shifts;
  return shifts;
}

Pose2D path_endpoint(const RSPath& path, const Pose2D& start, double r_min) {
  Pose2D p = start;
  for (const auto& seg : path.segments) p = advance(p, seg, seg.length, r_min);
  return p;
}

std::vector<RSPath> enumerate_all(const Pose2D& start, const Pose2D& goal, double r_min) {
  if (r_min <= 0) throw std::invalid_argument("enumerate_all: r_min <= 0");
  // Normalize: goal expressed in the start frame, scaled to unit radius.
  const double dx = goal.x - start.x, dy = goal.y - start.y;
  const double c = std::cos(start.theta), s = std::sin(start.theta);
  const double x = (c * dx + s * dy) / r_min;
  const double y = (-s * dx + c * dy) / r_min;
  const double phi = mod2pi(goal.theta - start.theta);

  Collector col(x, y, phi);
  col.family3(LpSpLp, L, S, L);
  col.family3(LpSpRp, L, S, R);
  col.family3(LpRmL, L, R, L);
  col.family3(LpRmL, L, R, L, /*backwards=*/true);
  col.family4(LpRupLumRm, -1.0);
  col.family4(LpRumLumRp, 1.0);
  col.ccsc(LpRmSmLm, L);
  col.ccsc(LpRmSmRm, R);
  col.ccscc();

  std::vector<RSPath> paths;
  paths.reserve(col.out.size());
  for (const auto& cand : col.out) {
    RSPath p = to_path(cand, r_min);
    const Pose2D end = path_endpoint(p, start, r_min);
    const double pos_err = std::hypot(end.x - goal.x, end.y - goal.y);
    const double ang_err = std::abs(mod2pi(end.theta - goal.theta));
    if (pos_err < kEndpointTol * std::max(1.0, r_min) && ang_err < kEndpointTol)
      paths.push_back(std::move(p));
  }
  return paths;
}

RSPath solve(const Pose2D& start, const Pose2D& goal, double r_min) {
  auto all = enumerate_all(start, goal, r_min);
  if (all.empty()) throw std::runtime_error("solve: no feasible Reeds-Shepp candidate");
  const auto better = [](const RSPath& a, const RSPath& b) {
    const double la = a.total_length(), lb = b.total_length();
    if (la != lb) return la < lb;
    if (a.gear_shifts() != b.gear_shifts()) return a.gear_shifts() < b.gear_shifts();
    return a.word < b.word;
  };
  return *std::min_element(all.begin(), all.end(), better);
}

std::vector<Pose2D> sample(const RSPath& path, const Pose2D& start, double r_min,
                           double ds) {
  if (ds <= 0) throw std::invalid_argument("sample: ds <= 0");
  std::vector<Pose2D> poses;
  poses.push_back(start);
  Pose2D seg_start = start;
  for (const auto& seg : path.segments) {
    if (seg.length <= 0) continue;
    const int n = std::max(1, static_cast<int>(std::ceil(seg.length / ds)));
    for (int k = 1; k <= n; ++k)
      poses.push_back(advance(seg_start, seg, seg.length * k / n, r_min));
    seg_start = poses.back();
  }
  return poses;
}

}  // namespace parkrl
