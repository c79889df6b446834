#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "parkrl/se2.hpp"

namespace parkrl {

enum class Cell : uint8_t { FREE = 0, OCCUPIED = 1, UNKNOWN = 2 };

// One LiDAR sweep in the sensor frame.
struct PointCloudFrame {
  double timestamp = 0.0;
  std::vector<Eigen::Vector3d> points;
};

// Externally estimated sensor-to-global pose for one frame.
struct TrajectorySample {
  double timestamp = 0.0;
  Transform3D pose;
};

// 2D cell lattice; the observation currency of the whole stack.
// origin is the pose of the corner of cell (0,0).
class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(double resolution, Pose2D origin, int width, int height,
                Cell fill = Cell::UNKNOWN);

  double resolution() const { return resolution_; }
  const Pose2D& origin() const { return origin_; }
  int width() const { return width_; }
  int height() const { return height_; }

  bool in_bounds(int ix, int iy) const {
    return ix >= 0 && ix < width_ && iy >= 0 && iy < height_;
  }
  Cell at(int ix, int iy) const { return cells_[static_cast<size_t>(iy) * width_ + ix]; }
  void set(int ix, int iy, Cell c) { cells_[static_cast<size_t>(iy) * width_ + ix] = c; }

  // Out-of-bounds queries report UNKNOWN.
  Cell at_world(double x, double y) const;

  // World point -> cell index (floor). May land out of bounds.
  std::pair<int, int> world_to_cell(double x, double y) const;
  // Center of a cell in world coordinates.
  Eigen::Vector2d cell_center(int ix, int iy) const;
  // World point expressed in the grid frame (origin corner, axes along cells).
  Eigen::Vector2d to_grid_frame(double x, double y) const;
  Eigen::Vector2d from_grid_frame(double gx, double gy) const;

  const std::vector<Cell>& cells() const { return cells_; }

  bool operator==(const OccupancyGrid& o) const = default;

 private:
  double resolution_ = 0.1;
  Pose2D origin_;
  int width_ = 0;
  int height_ = 0;
  std::vector<Cell> cells_;
};

struct OgmBuildConfig {
  double z_min = -1.2;           // height band relative to the sensor
  double z_max = 0.8;
  int hit_threshold = 2;         // min projected points for OCCUPIED
  double resolution = 0.1;
  bool carve_free_space = true;  // ray-carve FREE cells toward each hit
  int keyframe_window = 5;       // frames fused into a local map

  void validate() const;
};

// Explicit rasterization bounds (world coordinates); computed from the point
// set when absent.
struct GridBounds {
  double min_x, min_y, max_x, max_y;
};

// Keeps exactly the points with z in [z_min, z_max], order preserved.
PointCloudFrame filter_heights(const PointCloudFrame& frame, const OgmBuildConfig& cfg);

// Global map: union over frames of pose-transformed points.
std::vector<Eigen::Vector3d> accumulate_global(const std::vector<PointCloudFrame>& frames,
                                               const std::vector<TrajectorySample>& traj);

// Local map in the keyframe sensor frame, over the keyframe_window most
// recent frames ending at keyframe_index.
std::vector<Eigen::Vector3d> accumulate_local(const std::vector<PointCloudFrame>& frames,
                                              const std::vector<TrajectorySample>& traj,
                                              int keyframe_index, const OgmBuildConfig& cfg);

// Projects points to the plane and thresholds hits per cell. With carving on,
// cells on the ray from the nearest sensor origin to each occupied hit that
// received no hits become FREE; the rest stay UNKNOWN. With carving off all
// non-occupied cells are FREE.
OccupancyGrid rasterize(const std::vector<Eigen::Vector3d>& points,
                        const std::vector<Eigen::Vector2d>& sensor_origins,
                        const OgmBuildConfig& cfg,
                        std::optional<GridBounds> bounds = std::nullopt);

// Grid file pair: binary PGM (P5) + sidecar `key: value` metadata.
// Cell bytes follow the map-server convention: 0 occupied, 254 free,
// 205 unknown. Row 0 of the image is the top (max y) row of the grid.
void save_grid(const OccupancyGrid& grid, const std::string& path);
OccupancyGrid load_grid(const std::string& path);

// Text recordings: `x y z` per point, one file per frame; trajectory lines
// `timestamp tx ty tz qx qy qz qw`.
PointCloudFrame load_frame(const std::string& path, double timestamp);
std::vector<TrajectorySample> load_trajectory(const std::string& path);
void save_frame(const PointCloudFrame& frame, const std::string& path);
void save_trajectory(const std::vector<TrajectorySample>& traj, const std::string& path);

}  // namespace parkrl
