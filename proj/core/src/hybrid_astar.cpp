#include "parkrl/hybrid_astar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

namespace parkrl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

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

struct Node {
  Pose2D pose;
  double g = 0.0;
  int parent = -1;
  double steering = 0.0;  // primitive that produced this node
  Gear gear = Gear::FORWARD;
};

struct OpenEntry {
  double f;
  uint64_t seq;
  int node;
};

struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    return a.seq > b.seq;
  }
};

}  // namespace

void HybridAStarConfig::validate() const {
  if (!(xy_res > 0.0) || !(theta_res > 0.0) || !(arc_len > 0.0) ||
      !(sample_step > 0.0) || w_rev < 1.0 || w_shift < 0.0 || node_budget == 0) {
    throw std::invalid_argument("HybridAStarConfig: bad parameters");
  }
}

HybridAStar::HybridAStar(const CollisionChecker& checker, const VehicleParams& vehicle,
                         HybridAStarConfig cfg)
    : checker_(&checker), vehicle_(vehicle), cfg_(cfg) {
  vehicle_.validate();
  cfg_.validate();
  r_min_ = vehicle_.wheelbase / std::tan(vehicle_.max_steer);
  n_theta_bins_ = std::max(1, (int)std::lround(2.0 * M_PI / cfg_.theta_res));
}

// Point-robot shortest distance to the goal cell over free cells,
// 8-connected. A lower bound on any drivable path length.
std::vector<double> HybridAStar::dijkstra_from(const Pose2D& goal) const {
  const OccupancyGrid& grid = checker_->grid();
  const int w = grid.width(), h = grid.height();
  std::vector<double> dist((size_t)w * h, kInf);
  const auto [gx, gy] = grid.world_to_cell(goal.x, goal.y);
  if (!grid.in_bounds(gx, gy) || grid.at(gx, gy) != Cell::FREE) return dist;

  using QE = std::pair<double, int>;
  std::priority_queue<QE, std::vector<QE>, std::greater<QE>> q;
  dist[(size_t)gy * w + gx] = 0.0;
  q.push({0.0, gy * w + gx});
  const double res = grid.resolution();
  const double diag = res * std::sqrt(2.0);
  while (!q.empty()) {
    auto [d, idx] = q.top();
    q.pop();
    if (d > dist[idx]) continue;
    const int cx = idx % w, cy = idx / w;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = cx + dx, ny = cy + dy;
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        const size_t nidx = (size_t)ny * w + nx;
        if (grid.at(nx, ny) != Cell::FREE) continue;
        const double nd = d + ((dx != 0 && dy != 0) ? diag : res);
        if (nd < dist[nidx]) {
          dist[nidx] = nd;
          q.push({nd, (int)nidx});
        }
      }
    }
  }
  return dist;
}

PlanResult HybridAStar::plan(const Pose2D& start, const Pose2D& goal) const {
  PlanResult out;
  if (checker_->pose_collides(start) || checker_->pose_collides(goal)) return out;

  const OccupancyGrid& grid = checker_->grid();
  const std::vector<double> d2d = dijkstra_from(goal);
  const auto h2d = [&](const Pose2D& p) -> double {
    const auto [cx, cy] = grid.world_to_cell(p.x, p.y);
    if (!grid.in_bounds(cx, cy)) return kInf;
    return d2d[(size_t)cy * grid.width() + cx];
  };
  const auto heuristic = [&](const Pose2D& p) -> double {
    const double hd = h2d(p);
    if (hd == kInf) return kInf;
    return std::max(hd, solve(p, goal, r_min_).total_length());
  };

  const auto key_of = [&](const Pose2D& p) -> uint64_t {
    const Eigen::Vector2d gp = grid.to_grid_frame(p.x, p.y);
    const int64_t ix = (int64_t)std::floor(gp.x() / cfg_.xy_res);
    const int64_t iy = (int64_t)std::floor(gp.y() / cfg_.xy_res);
    double a = p.theta;
    while (a < 0.0) a += 2.0 * M_PI;
    const int64_t it = (int64_t)(a / cfg_.theta_res) % n_theta_bins_;
    return ((uint64_t)(ix & 0xffffff) << 40) | ((uint64_t)(iy & 0xffffff) << 16) |
           (uint64_t)(it & 0xffff);
  };

  // Shortest collision-free RS connection, or empty path on failure.
  const auto rs_shot = [&](const Pose2D& from, RSPath& hit) -> bool {
    std::vector<RSPath> cands = enumerate_all(from, goal, r_min_);
    std::sort(cands.begin(), cands.end(), [](const RSPath& a, const RSPath& b) {
      const double la = a.total_length(), lb = b.total_length();
      if (la != lb) return la < lb;
      if (a.gear_shifts() != b.gear_shifts()) return a.gear_shifts() < b.gear_shifts();
      return a.word < b.word;
    });
    for (const RSPath& c : cands) {
      const std::vector<Pose2D> pts = sample(c, from, r_min_, cfg_.sample_step);
      if (!checker_->path_collides(pts)) {
        hit = c;
        return true;
      }
    }
    return false;
  };

  std::vector<Node> nodes;
  nodes.reserve(4096);
  std::unordered_map<uint64_t, int> best;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
  uint64_t seq = 0;

  const double h0 = heuristic(start);
  if (h0 == kInf) return out;
  nodes.push_back(Node{start, 0.0, -1, 0.0, Gear::FORWARD});
  best[key_of(start)] = 0;
  open.push({h0, seq++, 0});

  const double steers[5] = {-vehicle_.max_steer, -0.5 * vehicle_.max_steer, 0.0,
                            0.5 * vehicle_.max_steer, vehicle_.max_steer};
  const int n_sub = std::max(1, (int)std::ceil(cfg_.arc_len / cfg_.sample_step));

  int goal_node = -1;
  RSPath tail;
  size_t popped = 0;
  std::vector<Pose2D> sweep(n_sub);

  while (!open.empty() && popped < cfg_.node_budget) {
    const OpenEntry top = open.top();
    open.pop();
    const Node cur = nodes[top.node];
    const auto it = best.find(key_of(cur.pose));
    if (it != best.end() && it->second != top.node) continue;  // stale entry
    ++popped;

    // Analytic expansion: always near the goal, sparsely far from it.
    const double hd = h2d(cur.pose);
    const size_t period = 1 + std::min<size_t>(20, (size_t)(hd / (2.0 * cfg_.arc_len)));
    if ((popped == 1 || popped % period == 0) && rs_shot(cur.pose, tail)) {
      goal_node = top.node;
      break;
    }

    for (int gi = 0; gi < 2; ++gi) {
      const Gear gear = gi == 0 ? Gear::FORWARD : Gear::BACKWARD;
      const double sgn = gear == Gear::FORWARD ? 1.0 : -1.0;
      for (const double steer : steers) {
        const double kappa = std::tan(steer) / vehicle_.wheelbase;
        bool blocked = false;
        for (int k = 1; k <= n_sub; ++k) {
          sweep[k - 1] = advance_arc(cur.pose, kappa, sgn * cfg_.arc_len * k / n_sub);
          if (checker_->pose_collides(sweep[k - 1])) {
            blocked = true;
            break;
          }
        }
        if (blocked) continue;
        const Pose2D np = sweep[n_sub - 1];
        double g = cur.g + cfg_.arc_len * (gear == Gear::BACKWARD ? cfg_.w_rev : 1.0);
        if (cur.parent >= 0 && cur.gear != gear) g += cfg_.w_shift;
        const uint64_t k = key_of(np);
        const auto bit = best.find(k);
        if (bit != best.end() && nodes[bit->second].g <= g + 1e-12) continue;
        const double h = heuristic(np);
        if (h == kInf) continue;
        nodes.push_back(Node{np, g, top.node, steer, gear});
        best[k] = (int)nodes.size() - 1;
        open.push({g + h, seq++, (int)nodes.size() - 1});
      }
    }
  }

  out.expanded = popped;
  if (goal_node < 0) return out;

  // Lattice primitives root->goal_node, then the RS tail.
  std::vector<PlanSegment> segs;
  for (int i = goal_node; nodes[i].parent >= 0; i = nodes[i].parent) {
    segs.push_back(PlanSegment{nodes[i].steering, nodes[i].gear, cfg_.arc_len});
  }
  std::reverse(segs.begin(), segs.end());
  for (const RSSegment& s : tail.segments) {
    double steer = 0.0;
    if (s.steer == Steer::LEFT) steer = vehicle_.max_steer;
    if (s.steer == Steer::RIGHT) steer = -vehicle_.max_steer;
    segs.push_back(PlanSegment{steer, s.gear, s.length});
  }

  out.success = true;
  out.segments = std::move(segs);
  out.poses.push_back(start);
  Pose2D p = start;
  for (const PlanSegment& s : out.segments) {
    out.length += s.length;
    const double kappa = std::tan(s.steering) / vehicle_.wheelbase;
    const double sgn = s.gear == Gear::FORWARD ? 1.0 : -1.0;
    const int n = std::max(1, (int)std::ceil(s.length / cfg_.sample_step));
    for (int k = 1; k <= n; ++k) {
      out.poses.push_back(advance_arc(p, kappa, sgn * s.length * k / n));
    }
    p = out.poses.back();
  }
  for (size_t i = 1; i < out.segments.size(); ++i) {
    if (out.segments[i].gear != out.segments[i - 1].gear) ++out.gear_shifts;
  }
  return out;
}

}  // namespace parkrl
