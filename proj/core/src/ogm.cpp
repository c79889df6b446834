#include "parkrl/ogm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace parkrl {

OccupancyGrid::OccupancyGrid(double resolution, Pose2D origin, int width, int height,
                             Cell fill)
    : resolution_(resolution), origin_(origin), width_(width), height_(height),
      cells_(static_cast<size_t>(width) * height, fill) {
  if (resolution <= 0) throw std::invalid_argument("OccupancyGrid: resolution <= 0");
  if (width <= 0 || height <= 0) throw std::invalid_argument("OccupancyGrid: empty extent");
}

Eigen::Vector2d OccupancyGrid::to_grid_frame(double x, double y) const {
  const double c = std::cos(origin_.theta), s = std::sin(origin_.theta);
  const double dx = x - origin_.x, dy = y - origin_.y;
  return {c * dx + s * dy, -s * dx + c * dy};
}

Eigen::Vector2d OccupancyGrid::from_grid_frame(double gx, double gy) const {
  const double c = std::cos(origin_.theta), s = std::sin(origin_.theta);
  return {origin_.x + c * gx - s * gy, origin_.y + s * gx + c * gy};
}

std::pair<int, int> OccupancyGrid::world_to_cell(double x, double y) const {
  const Eigen::Vector2d g = to_grid_frame(x, y);
  return {static_cast<int>(std::floor(g.x() / resolution_)),
          static_cast<int>(std::floor(g.y() / resolution_))};
}

Eigen::Vector2d OccupancyGrid::cell_center(int ix, int iy) const {
  return from_grid_frame((ix + 0.5) * resolution_, (iy + 0.5) * resolution_);
}

Cell OccupancyGrid::at_world(double x, double y) const {
  const auto [ix, iy] = world_to_cell(x, y);
  if (!in_bounds(ix, iy)) return Cell::UNKNOWN;
  return at(ix, iy);
}

void OgmBuildConfig::validate() const {
  if (!(z_min < z_max)) throw std::invalid_argument("OgmBuildConfig: z_min >= z_max");
  if (hit_threshold < 1) throw std::invalid_argument("OgmBuildConfig: hit_threshold < 1");
  if (resolution <= 0) throw std::invalid_argument("OgmBuildConfig: resolution <= 0");
  if (keyframe_window < 1) throw std::invalid_argument("OgmBuildConfig: keyframe_window < 1");
}

PointCloudFrame filter_heights(const PointCloudFrame& frame, const OgmBuildConfig& cfg) {
  cfg.validate();
  PointCloudFrame out;
  out.timestamp = frame.timestamp;
  out.points.reserve(frame.points.size());
  for (const auto& p : frame.points)
    if (p.z() >= cfg.z_min && p.z() <= cfg.z_max) out.points.push_back(p);
  return out;
}

std::vector<Eigen::Vector3d> accumulate_global(const std::vector<PointCloudFrame>& frames,
                                               const std::vector<TrajectorySample>& traj) {
  if (frames.size() != traj.size())
    throw std::invalid_argument("accumulate_global: frame/trajectory length mismatch");
  std::vector<Eigen::Vector3d> out;
  size_t total = 0;
  for (const auto& f : frames) total += f.points.size();
  out.reserve(total);
  for (size_t t = 0; t < frames.size(); ++t)
    for (const auto& p : frames[t].points) out.push_back(traj[t].pose * p);
  return out;
}

std::vector<Eigen::Vector3d> accumulate_local(const std::vector<PointCloudFrame>& frames,
                                              const std::vector<TrajectorySample>& traj,
                                              int keyframe_index, const OgmBuildConfig& cfg) {
  cfg.validate();
  if (frames.size() != traj.size())
    throw std::invalid_argument("accumulate_local: frame/trajectory length mismatch");
  if (keyframe_index < 0 || keyframe_index >= static_cast<int>(frames.size()))
    throw std::invalid_argument("accumulate_local: keyframe_index out of range");
  const int first = std::max(0, keyframe_index - cfg.keyframe_window + 1);
  const Transform3D key_inv = invert(traj[keyframe_index].pose);
  std::vector<Eigen::Vector3d> out;
  for (int t = first; t <= keyframe_index; ++t) {
    const Transform3D to_key = compose(key_inv, traj[t].pose);
    for (const auto& p : frames[t].points) out.push_back(to_key * p);
  }
  if (out.empty() && frames[keyframe_index].points.empty() && first > keyframe_index)
    throw std::invalid_argument("accumulate_local: empty window");
  return out;
}

namespace {

// Bresenham over cell indices, excluding the final cell.
template <typename F>
void walk_ray(int x0, int y0, int x1, int y1, F&& visit) {
  int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
  int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
  int err = dx + dy;
  while (x0 != x1 || y0 != y1) {
    visit(x0, y0);
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x0 += sx; }
    if (e2 <= dx) { err += dx; y0 += sy; }
  }
}

}  // namespace

OccupancyGrid rasterize(const std::vector<Eigen::Vector3d>& points,
                        const std::vector<Eigen::Vector2d>& sensor_origins,
                        const OgmBuildConfig& cfg,
                        std::optional<GridBounds> bounds) {
  cfg.validate();
  if (points.empty() && !bounds)
    throw std::invalid_argument("rasterize: empty point set and no explicit bounds");

  GridBounds b;
  if (bounds) {
    b = *bounds;
  } else {
    b.min_x = b.min_y = std::numeric_limits<double>::infinity();
    b.max_x = b.max_y = -std::numeric_limits<double>::infinity();
    for (const auto& p : points) {
      b.min_x = std::min(b.min_x, p.x());
      b.max_x = std::max(b.max_x, p.x());
      b.min_y = std::min(b.min_y, p.y());
      b.max_y = std::max(b.max_y, p.y());
    }
    for (const auto& o : sensor_origins) {
      b.min_x = std::min(b.min_x, o.x());
      b.max_x = std::max(b.max_x, o.x());
      b.min_y = std::min(b.min_y, o.y());
      b.max_y = std::max(b.max_y, o.y());
    }
    // half-cell pad so border points land strictly inside
    b.min_x -= 0.5 * cfg.resolution;
    b.min_y -= 0.5 * cfg.resolution;
  }
  const int width = std::max(1, static_cast<int>(std::ceil((b.max_x - b.min_x) / cfg.resolution)) + 1);
  const int height = std::max(1, static_cast<int>(std::ceil((b.max_y - b.min_y) / cfg.resolution)) + 1);

  OccupancyGrid grid(cfg.resolution, Pose2D(b.min_x, b.min_y, 0.0), width, height,
                     cfg.carve_free_space ? Cell::UNKNOWN : Cell::FREE);

  std::vector<int> hits(static_cast<size_t>(width) * height, 0);
  for (const auto& p : points) {
    const auto [ix, iy] = grid.world_to_cell(p.x(), p.y());
    if (grid.in_bounds(ix, iy)) ++hits[static_cast<size_t>(iy) * width + ix];
  }
  struct Hit { int ix, iy; };
  std::vector<Hit> occupied;
  for (int iy = 0; iy < height; ++iy)
    for (int ix = 0; ix < width; ++ix)
      if (hits[static_cast<size_t>(iy) * width + ix] >= cfg.hit_threshold) {
        grid.set(ix, iy, Cell::OCCUPIED);
        occupied.push_back({ix, iy});
      }

  if (cfg.carve_free_space && !sensor_origins.empty()) {
    std::vector<std::pair<int, int>> origin_cells;
    origin_cells.reserve(sensor_origins.size());
    for (const auto& o : sensor_origins) origin_cells.push_back(grid.world_to_cell(o.x(), o.y()));
    for (const auto& h : occupied) {
      const Eigen::Vector2d hc = grid.cell_center(h.ix, h.iy);
      size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < sensor_origins.size(); ++i) {
        const double d = (sensor_origins[i] - hc).squaredNorm();
        if (d < best_d) { best_d = d; best = i; }
      }
      const auto [ox, oy] = origin_cells[best];
      walk_ray(ox, oy, h.ix, h.iy, [&](int cx, int cy) {
        if (grid.in_bounds(cx, cy) && hits[static_cast<size_t>(cy) * width + cx] == 0)
          grid.set(cx, cy, Cell::FREE);
      });
    }
  }
  return grid;
}

namespace {

constexpr uint8_t kByteOccupied = 0;
constexpr uint8_t kByteFree = 254;
constexpr uint8_t kByteUnknown = 205;

std::string sidecar_path(const std::string& pgm_path) { return pgm_path + ".info"; }

}  // namespace

void save_grid(const OccupancyGrid& grid, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_grid: cannot write " + path);
  out << "P5\n" << grid.width() << " " << grid.height() << "\n255\n";
  for (int iy = grid.height() - 1; iy >= 0; --iy)
    for (int ix = 0; ix < grid.width(); ++ix) {
      uint8_t b = kByteUnknown;
      switch (grid.at(ix, iy)) {
        case Cell::OCCUPIED: b = kByteOccupied; break;
        case Cell::FREE: b = kByteFree; break;
        case Cell::UNKNOWN: b = kByteUnknown; break;
      }
      out.put(static_cast<char>(b));
    }
  std::ofstream meta(sidecar_path(path));
  if (!meta) throw std::runtime_error("save_grid: cannot write " + sidecar_path(path));
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "resolution: %.17g\norigin_x: %.17g\norigin_y: %.17g\norigin_theta: %.17g\n",
                grid.resolution(), grid.origin().x, grid.origin().y, grid.origin().theta);
  meta << buf;
}

OccupancyGrid load_grid(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_grid: cannot open " + path);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw std::runtime_error("load_grid: not a binary PGM: " + path);
  int width = 0, height = 0, maxval = 0;
  in >> width >> height >> maxval;
  if (!in || width <= 0 || height <= 0 || maxval != 255)
    throw std::runtime_error("load_grid: malformed PGM header: " + path);
  in.get();  // single whitespace after header

  std::ifstream meta(sidecar_path(path));
  if (!meta) throw std::runtime_error("load_grid: missing sidecar " + sidecar_path(path));
  double resolution = 0, ox = 0, oy = 0, otheta = 0;
  std::string line;
  while (std::getline(meta, line)) {
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    double v;
    if (!(ls >> v)) throw std::runtime_error("load_grid: malformed sidecar line: " + line);
    if (key == "resolution:") resolution = v;
    else if (key == "origin_x:") ox = v;
    else if (key == "origin_y:") oy = v;
    else if (key == "origin_theta:") otheta = v;
  }
  if (resolution <= 0) throw std::runtime_error("load_grid: sidecar missing resolution");

  OccupancyGrid grid(resolution, Pose2D(ox, oy, otheta), width, height);
  std::vector<char> row(static_cast<size_t>(width));
  for (int iy = height - 1; iy >= 0; --iy) {
    in.read(row.data(), width);
    if (in.gcount() != width) throw std::runtime_error("load_grid: truncated pixel data");
    for (int ix = 0; ix < width; ++ix) {
      const uint8_t b = static_cast<uint8_t>(row[ix]);
      Cell c;
      if (b == kByteOccupied) c = Cell::OCCUPIED;
      else if (b == kByteFree) c = Cell::FREE;
      else if (b == kByteUnknown) c = Cell::UNKNOWN;
      else throw std::runtime_error("load_grid: unknown cell byte " + std::to_string(b));
      grid.set(ix, iy, c);
    }
  }
  return grid;
}

PointCloudFrame load_frame(const std::string& path, double timestamp) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_frame: cannot open " + path);
  PointCloudFrame f;
  f.timestamp = timestamp;
  double x, y, z;
  while (in >> x >> y >> z) f.points.emplace_back(x, y, z);
  return f;
}

void save_frame(const PointCloudFrame& frame, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_frame: cannot write " + path);
  char buf[128];
  for (const auto& p : frame.points) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out << buf;
  }
}

std::vector<TrajectorySample> load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_trajectory: cannot open " + path);
  std::vector<TrajectorySample> traj;
  double ts, tx, ty, tz, qx, qy, qz, qw;
  while (in >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw) {
    if (!traj.empty() && ts <= traj.back().timestamp)
      throw std::runtime_error("load_trajectory: timestamps not strictly increasing");
    traj.push_back({ts, Transform3D::from_quaternion(qx, qy, qz, qw, {tx, ty, tz})});
  }
  return traj;
}

void save_trajectory(const std::vector<TrajectorySample>& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_trajectory: cannot write " + path);
  char buf[256];
  for (const auto& s : traj) {
    // rotation back to quaternion (w >= 0 branch is enough for saved data)
    const Eigen::Matrix3d& r = s.pose.rotation();
    const double qw = 0.5 * std::sqrt(std::max(0.0, 1.0 + r(0, 0) + r(1, 1) + r(2, 2)));
    double qx, qy, qz;
    if (qw > 1e-9) {
      qx = (r(2, 1) - r(1, 2)) / (4 * qw);
      qy = (r(0, 2) - r(2, 0)) / (4 * qw);
      qz = (r(1, 0) - r(0, 1)) / (4 * qw);
    } else {
      qx = std::sqrt(std::max(0.0, 0.5 * (1 + r(0, 0))));
      qy = std::sqrt(std::max(0.0, 0.5 * (1 + r(1, 1)))) * (r(0, 1) < 0 ? -1 : 1);
      qz = std::sqrt(std::max(0.0, 0.5 * (1 + r(2, 2)))) * (r(0, 2) < 0 ? -1 : 1);
    }
    const auto& t = s.pose.translation();
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                  s.timestamp, t.x(), t.y(), t.z(), qx, qy, qz, qw);
    out << buf;
  }
}

}  // namespace parkrl
