#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "parkrl/ogm.hpp"
#include "parkrl/rng.hpp"

using namespace parkrl;

namespace {

Transform3D random_pose(Rng& rng) {
  double q[4];
  for (auto& v : q) v = rng.normal();
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  return Transform3D::from_quaternion(q[0] / n, q[1] / n, q[2] / n, q[3] / n,
                                      {rng.uniform(-10, 10), rng.uniform(-10, 10),
                                       rng.uniform(-2, 2)});
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("filter_heights keeps the band, preserves order") {
  OgmBuildConfig cfg;
  cfg.z_min = -1.2;
  cfg.z_max = 0.8;
  PointCloudFrame f;
  f.points = {{0, 0, -2.0}, {1, 1, 0.0}, {2, 2, 2.5}};
  const auto out = filter_heights(f, cfg);
  REQUIRE(out.points.size() == 1);
  CHECK(out.points[0].z() == 0.0);

  const auto empty = filter_heights(PointCloudFrame{}, cfg);
  CHECK(empty.points.empty());

  // idempotent
  const auto twice = filter_heights(out, cfg);
  CHECK(twice.points == out.points);
}

TEST_CASE("filter_heights survivor fraction on uniform z") {
  OgmBuildConfig cfg;
  cfg.z_min = -1.0;
  cfg.z_max = 1.0;  // 40% of [-2.5, 2.5]
  Rng rng(7);
  PointCloudFrame f;
  int expected = 0;
  for (int i = 0; i < 10000; ++i) {
    const double z = rng.uniform(-2.5, 2.5);
    if (z >= cfg.z_min && z <= cfg.z_max) ++expected;
    f.points.emplace_back(0, 0, z);
  }
  const auto out = filter_heights(f, cfg);
  CHECK(static_cast<int>(out.points.size()) == expected);
  CHECK(std::abs(out.points.size() / 10000.0 - 0.4) < 0.02);
}

TEST_CASE("accumulate_global basic and per-point oracle") {
  PointCloudFrame f;
  f.points = {{1, 0, 0}, {2, 1, 0.5}};
  const auto identity_map = accumulate_global({f}, {{0.0, Transform3D::identity()}});
  CHECK(identity_map.size() == 2);
  CHECK((identity_map[0] - f.points[0]).norm() == 0.0);

  PointCloudFrame single;
  single.points = {{1, 0, 0}};
  const Transform3D shift(Eigen::Matrix3d::Identity(), {0, 5, 0});
  const auto shifted = accumulate_global({single}, {{0.0, shift}});
  CHECK((shifted[0] - Eigen::Vector3d(1, 5, 0)).norm() < 1e-12);

  Rng rng(8);
  std::vector<PointCloudFrame> frames(3);
  std::vector<TrajectorySample> traj;
  for (int t = 0; t < 3; ++t) {
    for (int i = 0; i < 20; ++i)
      frames[t].points.emplace_back(rng.uniform(-5, 5), rng.uniform(-5, 5),
                                    rng.uniform(-1, 1));
    traj.push_back({static_cast<double>(t), random_pose(rng)});
  }
  const auto global = accumulate_global(frames, traj);
  size_t idx = 0;
  for (int t = 0; t < 3; ++t)
    for (const auto& p : frames[t].points) {
      const Eigen::Vector3d expect = traj[t].pose.rotation() * p + traj[t].pose.translation();
      CHECK((global[idx++] - expect).cwiseAbs().maxCoeff() < 1e-9);
    }

  CHECK_THROWS(accumulate_global(frames, {traj[0]}));
}

TEST_CASE("accumulate_local degenerate and consistency with the global map") {
  OgmBuildConfig cfg;
  cfg.keyframe_window = 1;
  PointCloudFrame f;
  f.points = {{1, 2, 0}, {3, 4, 0.5}};
  Rng rng(9);
  const auto pose = random_pose(rng);
  const auto local = accumulate_local({f}, {{0.0, pose}}, 0, cfg);
  REQUIRE(local.size() == 2);
  for (size_t i = 0; i < 2; ++i)
    CHECK((local[i] - f.points[i]).cwiseAbs().maxCoeff() < 1e-9);

  // identical poses: plain union
  cfg.keyframe_window = 2;
  const auto both = accumulate_local({f, f}, {{0.0, pose}, {1.0, pose}}, 1, cfg);
  REQUIRE(both.size() == 4);
  CHECK((both[0] - f.points[0]).cwiseAbs().maxCoeff() < 1e-9);

  // random window: keyframe pose maps local points back onto global ones
  std::vector<PointCloudFrame> frames(4);
  std::vector<TrajectorySample> traj;
  for (int t = 0; t < 4; ++t) {
    for (int i = 0; i < 15; ++i)
      frames[t].points.emplace_back(rng.uniform(-5, 5), rng.uniform(-5, 5),
                                    rng.uniform(-1, 1));
    traj.push_back({static_cast<double>(t), random_pose(rng)});
  }
  cfg.keyframe_window = 3;
  const int kf = 3;
  const auto local2 = accumulate_local(frames, traj, kf, cfg);
  const auto global = accumulate_global(frames, traj);
  // window covers frames 1..3 -> last 45 global points
  REQUIRE(local2.size() == 45);
  for (size_t i = 0; i < local2.size(); ++i) {
    const Eigen::Vector3d back = traj[kf].pose * local2[i];
    CHECK((back - global[global.size() - 45 + i]).cwiseAbs().maxCoeff() < 1e-9);
  }

  CHECK_THROWS(accumulate_local(frames, traj, 99, cfg));
}

TEST_CASE("rasterize index arithmetic and carving") {
  OgmBuildConfig cfg;
  cfg.resolution = 0.1;
  cfg.hit_threshold = 1;
  cfg.carve_free_space = false;

  const GridBounds b{0, 0, 2, 1};
  const auto grid = rasterize({{1.05, 0.0, 0.0}}, {}, cfg, b);
  const auto [ix, iy] = grid.world_to_cell(1.05, 0.0);
  CHECK(ix == 10);
  CHECK(iy == 0);
  CHECK(grid.at(10, 0) == Cell::OCCUPIED);
  CHECK(grid.at(5, 0) == Cell::FREE);

  const auto empty = rasterize({}, {}, cfg, b);
  for (const auto c : empty.cells()) CHECK(c == Cell::FREE);
  CHECK_THROWS(rasterize({}, {}, cfg));

  // wall at x=2 seen from the origin: carving frees the ray, keeps behind unknown
  cfg.carve_free_space = true;
  std::vector<Eigen::Vector3d> wall;
  for (int i = 0; i < 5; ++i) wall.emplace_back(2.0, 0.05, 0.0);
  const auto carved = rasterize(wall, {{0.05, 0.05}}, cfg, GridBounds{0, 0, 4, 0.5});
  const auto [wx, wy] = carved.world_to_cell(2.0, 0.05);
  CHECK(carved.at(wx, wy) == Cell::OCCUPIED);
  for (int x = 1; x < wx; ++x) CHECK(carved.at(x, wy) == Cell::FREE);
  for (int x = wx + 1; x < carved.width(); ++x) CHECK(carved.at(x, wy) == Cell::UNKNOWN);
}

TEST_CASE("rasterize is deterministic and monotone in added points") {
  Rng rng(11);
  OgmBuildConfig cfg;
  cfg.hit_threshold = 2;
  cfg.carve_free_space = true;
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 500; ++i)
    pts.emplace_back(rng.uniform(0, 10), rng.uniform(0, 10), 0.0);
  const std::vector<Eigen::Vector2d> origins = {{5, 5}};
  const GridBounds b{0, 0, 10, 10};

  const auto g1 = rasterize(pts, origins, cfg, b);
  const auto g2 = rasterize(pts, origins, cfg, b);
  CHECK(g1 == g2);

  auto more = pts;
  for (int i = 0; i < 100; ++i)
    more.emplace_back(rng.uniform(0, 10), rng.uniform(0, 10), 0.0);
  const auto g3 = rasterize(more, origins, cfg, b);
  for (int iy = 0; iy < g1.height(); ++iy)
    for (int ix = 0; ix < g1.width(); ++ix)
      if (g1.at(ix, iy) == Cell::OCCUPIED) CHECK(g3.at(ix, iy) != Cell::FREE);
}

TEST_CASE("grid files round-trip") {
  const std::string path = temp_path("parkrl_test_grid.pgm");

  OccupancyGrid small(0.5, Pose2D(1, 2, 0.25), 3, 3, Cell::FREE);
  save_grid(small, path);
  CHECK(load_grid(path) == small);

  small.set(1, 1, Cell::OCCUPIED);
  small.set(2, 0, Cell::UNKNOWN);
  save_grid(small, path);
  CHECK(load_grid(path) == small);

  Rng rng(12);
  OccupancyGrid big(0.1, Pose2D(0, 0, 0), 1024, 1024);
  for (int iy = 0; iy < 1024; ++iy)
    for (int ix = 0; ix < 1024; ++ix)
      big.set(ix, iy, static_cast<Cell>(rng.uniform_int(3)));
  save_grid(big, path);
  const std::string bytes1 = read_file(path);
  const auto loaded = load_grid(path);
  CHECK(loaded == big);
  save_grid(loaded, path);
  CHECK(read_file(path) == bytes1);

  std::remove(path.c_str());
  std::remove((path + ".info").c_str());
}

TEST_CASE("load_grid rejects malformed files") {
  const std::string path = temp_path("parkrl_bad_grid.pgm");
  {
    std::ofstream out(path, std::ios::binary);
    out << "P6\n2 2\n255\n";
  }
  CHECK_THROWS(load_grid(path));
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n2 2\n255\n";
    out.put(7);  // unknown cell byte, and truncated
  }
  {
    std::ofstream meta(path + ".info");
    meta << "resolution: 0.1\norigin_x: 0\norigin_y: 0\norigin_theta: 0\n";
  }
  CHECK_THROWS(load_grid(path));
  std::remove(path.c_str());
  std::remove((path + ".info").c_str());
}

TEST_CASE("frame and trajectory text round-trip") {
  const std::string fpath = temp_path("parkrl_frame.txt");
  const std::string tpath = temp_path("parkrl_traj.txt");
  PointCloudFrame f;
  f.points = {{0.25, -1.5, 0.125}, {3, 4, 5}};
  save_frame(f, fpath);
  const auto back = load_frame(fpath, 0.0);
  REQUIRE(back.points.size() == 2);
  CHECK((back.points[1] - f.points[1]).norm() == 0.0);

  Rng rng(13);
  std::vector<TrajectorySample> traj;
  for (int t = 0; t < 5; ++t) traj.push_back({t * 0.1, random_pose(rng)});
  save_trajectory(traj, tpath);
  const auto traj2 = load_trajectory(tpath);
  REQUIRE(traj2.size() == 5);
  for (size_t i = 0; i < 5; ++i) {
    CHECK((traj2[i].pose.rotation() - traj[i].pose.rotation()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((traj2[i].pose.translation() - traj[i].pose.translation()).cwiseAbs().maxCoeff() < 1e-9);
  }
  std::remove(fpath.c_str());
  std::remove(tpath.c_str());
}
