#include "parkrl/collision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace parkrl {

void CollisionConfig::validate() const {
  if (safety_margin < 0) throw std::invalid_argument("CollisionConfig: safety_margin < 0");
  if (sample_step <= 0) throw std::invalid_argument("CollisionConfig: sample_step <= 0");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// finite seed keeps the parabola intersections well-defined
constexpr double kFar = 1e18;

// Felzenszwalb 1D squared distance transform.
void dt_1d(const std::vector<double>& f, std::vector<double>& d, int n) {
  static thread_local std::vector<int> v;
  static thread_local std::vector<double> z;
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    while (s <= z[k]) {
      --k;
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    d[q] = (q - v[k]) * (q - v[k]) + f[v[k]];
  }
}

std::vector<float> build_clearance(const OccupancyGrid& g) {
  const int w = g.width(), h = g.height();
  std::vector<double> col(static_cast<size_t>(w) * h);
  for (int iy = 0; iy < h; ++iy)
    for (int ix = 0; ix < w; ++ix)
      col[static_cast<size_t>(iy) * w + ix] =
          g.at(ix, iy) == Cell::FREE ? kFar : 0.0;
  std::vector<double> f(std::max(w, h)), d(std::max(w, h));
  for (int ix = 0; ix < w; ++ix) {
    for (int iy = 0; iy < h; ++iy) f[iy] = col[static_cast<size_t>(iy) * w + ix];
    dt_1d(f, d, h);
    for (int iy = 0; iy < h; ++iy) col[static_cast<size_t>(iy) * w + ix] = d[iy];
  }
  std::vector<float> out(static_cast<size_t>(w) * h);
  for (int iy = 0; iy < h; ++iy) {
    for (int ix = 0; ix < w; ++ix) f[ix] = col[static_cast<size_t>(iy) * w + ix];
    dt_1d(f, d, w);
    for (int ix = 0; ix < w; ++ix)
      out[static_cast<size_t>(iy) * w + ix] =
          static_cast<float>(std::sqrt(d[ix]) * g.resolution());
  }
  return out;
}

}  // namespace

CollisionChecker::CollisionChecker(const OccupancyGrid& grid, const VehicleParams& vehicle,
                                   const CollisionConfig& cfg, bool build_clearance_field)
    : grid_(&grid), vehicle_(vehicle), cfg_(cfg) {
  cfg.validate();
  half_width_ = 0.5 * vehicle.width + cfg.safety_margin;
  x_rear_ = -vehicle.rear_overhang - cfg.safety_margin;
  x_front_ = vehicle.wheelbase + vehicle.front_overhang + cfg.safety_margin;
  circumradius_ = std::hypot(0.5 * (x_front_ - x_rear_), half_width_);
  if (build_clearance_field) clearance_field_ = build_clearance(grid);
}

double CollisionChecker::clearance(double x, double y) const {
  const auto [ix, iy] = grid_->world_to_cell(x, y);
  const Eigen::Vector2d g = grid_->to_grid_frame(x, y);
  // distance to the grid boundary (outside cells are lethal)
  const double edge = std::min(
      std::min(g.x(), grid_->width() * grid_->resolution() - g.x()),
      std::min(g.y(), grid_->height() * grid_->resolution() - g.y()));
  if (!grid_->in_bounds(ix, iy) || clearance_field_.empty()) return std::max(0.0, edge);
  // field distance is center-to-center; subtract the in-cell offset bound
  const double field =
      clearance_field_[static_cast<size_t>(iy) * grid_->width() + ix] -
      grid_->resolution() * M_SQRT1_2;
  return std::max(0.0, std::min(field, edge));
}

bool CollisionChecker::pose_collides(const Pose2D& pose) const {
  if (!clearance_field_.empty()) {
    // center of the inflated rectangle
    const Eigen::Vector2d c = se2_apply(pose, {0.5 * (x_rear_ + x_front_), 0.0});
    if (clearance(c.x(), c.y()) > circumradius_) return false;
  }
  return pose_collides_exact(pose);
}

bool CollisionChecker::pose_collides_exact(const Pose2D& pose) const {
  // AABB of the inflated rectangle in the grid frame
  const std::array<Eigen::Vector2d, 4> corners = {
      se2_apply(pose, {x_rear_, -half_width_}), se2_apply(pose, {x_front_, -half_width_}),
      se2_apply(pose, {x_front_, half_width_}), se2_apply(pose, {x_rear_, half_width_})};
  double min_gx = kInf, min_gy = kInf, max_gx = -kInf, max_gy = -kInf;
  for (const auto& w : corners) {
    const Eigen::Vector2d g = grid_->to_grid_frame(w.x(), w.y());
    min_gx = std::min(min_gx, g.x());
    max_gx = std::max(max_gx, g.x());
    min_gy = std::min(min_gy, g.y());
    max_gy = std::max(max_gy, g.y());
  }
  const double res = grid_->resolution();
  const int ix0 = static_cast<int>(std::floor(min_gx / res));
  const int ix1 = static_cast<int>(std::floor(max_gx / res));
  const int iy0 = static_cast<int>(std::floor(min_gy / res));
  const int iy1 = static_cast<int>(std::floor(max_gy / res));

  const double cth = std::cos(pose.theta), sth = std::sin(pose.theta);
  for (int iy = iy0; iy <= iy1; ++iy)
    for (int ix = ix0; ix <= ix1; ++ix) {
      const bool lethal =
          !grid_->in_bounds(ix, iy) || grid_->at(ix, iy) != Cell::FREE;
      if (!lethal) continue;
      const Eigen::Vector2d center = grid_->from_grid_frame((ix + 0.5) * res, (iy + 0.5) * res);
      const double dx = center.x() - pose.x, dy = center.y() - pose.y;
      const double lx = cth * dx + sth * dy;
      const double ly = -sth * dx + cth * dy;
      if (lx >= x_rear_ && lx <= x_front_ && std::abs(ly) <= half_width_) return true;
    }
  return false;
}

bool CollisionChecker::path_collides(std::span<const Pose2D> poses) const {
  for (size_t i = 0; i + 1 < poses.size(); ++i) {
    const double gap = std::hypot(poses[i + 1].x - poses[i].x, poses[i + 1].y - poses[i].y);
    if (gap > cfg_.sample_step + 1e-9)
      throw std::invalid_argument("path_collides: pose spacing exceeds sample_step");
  }
  for (const auto& p : poses)
    if (pose_collides(p)) return true;
  return false;
}

std::vector<double> CollisionChecker::cast_beams(const Pose2D& pose, int n_beams,
                                                 double max_range) const {
  if (n_beams < 1) throw std::invalid_argument("cast_beams: n_beams < 1");
  const auto [sx, sy] = grid_->world_to_cell(pose.x, pose.y);
  if (!grid_->in_bounds(sx, sy))
    throw std::invalid_argument("cast_beams: pose outside grid");

  const double res = grid_->resolution();
  std::vector<double> out(n_beams, max_range);
  for (int i = 0; i < n_beams; ++i) {
    const double heading = pose.theta + 2.0 * M_PI * i / n_beams;
    // direction in the grid frame
    const double a = heading - grid_->origin().theta;
    const double dx = std::cos(a), dy = std::sin(a);
    const Eigen::Vector2d g0 = grid_->to_grid_frame(pose.x, pose.y);

    int ix = sx, iy = sy;
    if (grid_->at(ix, iy) != Cell::FREE) {
      out[i] = 0.0;
      continue;
    }
    const int step_x = dx > 0 ? 1 : -1, step_y = dy > 0 ? 1 : -1;
    double t_max_x = dx != 0
        ? ((dx > 0 ? (ix + 1) * res - g0.x() : g0.x() - ix * res) / std::abs(dx))
        : kInf;
    double t_max_y = dy != 0
        ? ((dy > 0 ? (iy + 1) * res - g0.y() : g0.y() - iy * res) / std::abs(dy))
        : kInf;
    const double t_dx = dx != 0 ? res / std::abs(dx) : kInf;
    const double t_dy = dy != 0 ? res / std::abs(dy) : kInf;

    double dist = max_range;
    while (true) {
      double t;
      if (t_max_x < t_max_y) {
        t = t_max_x;
        t_max_x += t_dx;
        ix += step_x;
      } else {
        t = t_max_y;
        t_max_y += t_dy;
        iy += step_y;
      }
      if (t >= max_range) break;
      if (!grid_->in_bounds(ix, iy) || grid_->at(ix, iy) != Cell::FREE) {
        dist = t;
        break;
      }
    }
    out[i] = std::min(dist, max_range);
  }
  return out;
}

bool pose_collides(const OccupancyGrid& grid, const Pose2D& pose,
                   const VehicleParams& vehicle, const CollisionConfig& cfg) {
  return CollisionChecker(grid, vehicle, cfg, false).pose_collides(pose);
}

bool path_collides(const OccupancyGrid& grid, std::span<const Pose2D> poses,
                   const VehicleParams& vehicle, const CollisionConfig& cfg) {
  return CollisionChecker(grid, vehicle, cfg, false).path_collides(poses);
}

std::vector<double> cast_beams(const OccupancyGrid& grid, const Pose2D& pose,
                               int n_beams, double max_range) {
  return CollisionChecker(grid, VehicleParams{}, CollisionConfig{}, false)
      .cast_beams(pose, n_beams, max_range);
}

}  // namespace parkrl
