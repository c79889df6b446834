#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "parkrl/bench.hpp"
#include "parkrl/config.hpp"
#include "parkrl/hybrid_planner.hpp"
#include "parkrl/ogm.hpp"
#include "parkrl/sac.hpp"
#include "parkrl/simulator.hpp"

namespace fs = std::filesystem;
using namespace parkrl;

namespace {

KeyValueFile load_config(const std::string& path) {
  if (path.empty()) return KeyValueFile{};
  return KeyValueFile::load(path);
}

SimConfig sim_from_config(const KeyValueFile& kv) {
  SimConfig c;
  c.dt = kv.get_double("dt", c.dt);
  c.max_steps = (int)kv.get_int("max_steps", c.max_steps);
  c.pos_tol = kv.get_double("pos_tol", c.pos_tol);
  c.ang_tol = kv.get_double("ang_tol", c.ang_tol);
  c.n_beams = (int)kv.get_int("n_beams", c.n_beams);
  c.max_range = kv.get_double("max_range", c.max_range);
  c.vehicle.wheelbase = kv.get_double("wheelbase", c.vehicle.wheelbase);
  c.vehicle.width = kv.get_double("width", c.vehicle.width);
  c.vehicle.front_overhang = kv.get_double("front_overhang", c.vehicle.front_overhang);
  c.vehicle.rear_overhang = kv.get_double("rear_overhang", c.vehicle.rear_overhang);
  c.vehicle.max_steer = kv.get_double("max_steer", c.vehicle.max_steer);
  c.vehicle.max_speed = kv.get_double("max_speed", c.vehicle.max_speed);
  c.vehicle.min_turn_radius =
      c.vehicle.wheelbase / std::tan(c.vehicle.max_steer);
  c.collision.safety_margin = kv.get_double("safety_margin", c.collision.safety_margin);
  c.collision.sample_step = kv.get_double("sample_step", c.collision.sample_step);
  c.w_progress_pos = kv.get_double("w_progress_pos", c.w_progress_pos);
  c.w_progress_ang = kv.get_double("w_progress_ang", c.w_progress_ang);
  c.step_penalty = kv.get_double("step_penalty", c.step_penalty);
  c.shift_penalty = kv.get_double("shift_penalty", c.shift_penalty);
  c.collision_penalty = kv.get_double("collision_penalty", c.collision_penalty);
  c.success_bonus = kv.get_double("success_bonus", c.success_bonus);
  return c;
}

SacConfig sac_from_config(const KeyValueFile& kv) {
  SacConfig c;
  c.gamma = kv.get_double("gamma", c.gamma);
  c.tau = kv.get_double("tau", c.tau);
  c.lr = kv.get_double("lr", c.lr);
  c.batch_size = (int)kv.get_int("batch_size", c.batch_size);
  c.buffer_capacity = (int)kv.get_int("buffer_capacity", c.buffer_capacity);
  c.hidden = (int)kv.get_int("hidden", c.hidden);
  c.target_entropy = kv.get_double("target_entropy", c.target_entropy);
  c.start_steps = (int)kv.get_int("start_steps", c.start_steps);
  c.update_after = (int)kv.get_int("update_after", c.update_after);
  return c;
}

OgmBuildConfig ogm_from_config(const KeyValueFile& kv) {
  OgmBuildConfig c;
  c.z_min = kv.get_double("z_min", c.z_min);
  c.z_max = kv.get_double("z_max", c.z_max);
  c.hit_threshold = (int)kv.get_int("hit_threshold", c.hit_threshold);
  c.resolution = kv.get_double("resolution", c.resolution);
  c.carve_free_space = kv.get_int("carve_free_space", c.carve_free_space ? 1 : 0) != 0;
  c.keyframe_window = (int)kv.get_int("keyframe_window", c.keyframe_window);
  return c;
}

SacAgent load_agent(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  return SacAgent::load(in);
}

int cmd_build_map(const std::string& recording, const std::string& config,
                  const std::string& out_dir) {
  const KeyValueFile kv = load_config(config);
  const OgmBuildConfig cfg = ogm_from_config(kv);
  cfg.validate();

  const std::vector<TrajectorySample> traj =
      load_trajectory(recording + "/trajectory.txt");
  std::vector<std::string> frame_files;
  for (const auto& e : fs::directory_iterator(recording + "/frames")) {
    if (e.path().extension() == ".txt") frame_files.push_back(e.path().string());
  }
  std::sort(frame_files.begin(), frame_files.end());
  if (frame_files.size() != traj.size()) {
    throw std::runtime_error("frame count does not match trajectory length");
  }
  std::vector<PointCloudFrame> frames;
  for (size_t i = 0; i < frame_files.size(); ++i) {
    frames.push_back(
        filter_heights(load_frame(frame_files[i], traj[i].timestamp), cfg));
  }
  const std::vector<Eigen::Vector3d> points = accumulate_global(frames, traj);
  std::vector<Eigen::Vector2d> origins;
  origins.reserve(traj.size());
  for (const TrajectorySample& s : traj) {
    origins.emplace_back(s.pose.translation().x(), s.pose.translation().y());
  }
  const OccupancyGrid grid = rasterize(points, origins, cfg);
  fs::create_directories(out_dir);
  save_grid(grid, out_dir + "/global_map.pgm");
  std::cout << "wrote " << out_dir << "/global_map.pgm (" << grid.width() << "x"
            << grid.height() << " cells)\n";
  return 0;
}

int cmd_gen_suite(const std::string& kind, int n, const std::string& difficulty,
                  uint64_t seed, const std::string& config,
                  const std::string& out_dir) {
  SuiteSpec spec;
  spec.difficulty = parse_difficulty(difficulty);
  spec.seed = seed;
  if (kind == "perpendicular") {
    spec.n_perpendicular = n;
    spec.n_parallel = 0;
  } else if (kind == "parallel") {
    spec.n_perpendicular = 0;
    spec.n_parallel = n;
  } else if (kind == "mixed") {
    // paper-shaped 50 + 20 split, scaled to n
    spec.n_perpendicular = (n * 5 + 3) / 7;
    spec.n_parallel = n - spec.n_perpendicular;
  } else {
    throw CLI::ValidationError("--kind", "must be perpendicular, parallel or mixed");
  }
  const SimConfig sim = sim_from_config(load_config(config));
  const std::string manifest = gen_suite(spec, out_dir, sim);
  std::cout << "wrote " << manifest << " ("
            << spec.n_perpendicular + spec.n_parallel << " scenarios)\n";
  return 0;
}

int cmd_train(const std::string& mode, int steps, uint64_t seed,
              const std::string& config, const std::string& out_dir, int eval_every,
              int eval_episodes, const std::string& difficulty) {
  const KeyValueFile kv = load_config(config);
  const SimConfig sim = sim_from_config(kv);
  const SacConfig sac = sac_from_config(kv);
  SacAgent agent(sim.n_beams + 6, sac, seed);
  TrainConfig tcfg;
  tcfg.seed = seed;
  tcfg.total_steps = steps;
  tcfg.eval_every = eval_every;
  tcfg.eval_episodes = eval_episodes;
  tcfg.use_planner = mode == "hybrid";
  if (!tcfg.use_planner && mode != "pure") {
    throw CLI::ValidationError("--mode", "must be hybrid or pure");
  }
  tcfg.difficulty = parse_difficulty(difficulty);
  tcfg.out_dir = out_dir;
  const TrainResult result = train_policy(agent, tcfg, sim);
  std::cout << "final eval PSR " << result.final_eval_psr * 100.0 << "% over "
            << result.curve.size() << " eval points; checkpoint at "
            << result.checkpoint_path << "\n";
  return 0;
}

int cmd_eval(const std::string& method_str, const std::string& suite_path,
             const std::string& checkpoint, const std::string& config,
             const std::string& out_dir) {
  const Method method = parse_method(method_str);
  const SimConfig sim = sim_from_config(load_config(config));
  const Suite suite = load_suite(suite_path);
  std::unique_ptr<SacAgent> agent;
  if (method != Method::HYBRID_ASTAR) {
    if (checkpoint.empty())
      throw CLI::ValidationError("--checkpoint", "required for learned methods");
    agent = std::make_unique<SacAgent>(load_agent(checkpoint));
  }
  fs::create_directories(out_dir);
  const MetricsRow row =
      run_suite(method, suite, agent.get(), sim, out_dir + "/episodes");
  append_results_csv(out_dir + "/results.csv", {row});
  std::cout << markdown_table({row});
  return 0;
}

int cmd_bench(const std::string& suite_path, const std::string& checkpoint,
              const std::string& pure_checkpoint, const std::string& config,
              const std::string& out_dir) {
  const SimConfig sim = sim_from_config(load_config(config));
  const Suite suite = load_suite(suite_path);
  SacAgent hybrid_agent = load_agent(checkpoint);
  SacAgent pure_agent =
      pure_checkpoint.empty() ? load_agent(checkpoint) : load_agent(pure_checkpoint);
  fs::create_directories(out_dir);
  std::vector<MetricsRow> rows;
  rows.push_back(run_suite(Method::HYBRID_RL, suite, &hybrid_agent, sim,
                           out_dir + "/episodes"));
  rows.push_back(
      run_suite(Method::PURE_SAC, suite, &pure_agent, sim, out_dir + "/episodes"));
  rows.push_back(
      run_suite(Method::HYBRID_ASTAR, suite, nullptr, sim, out_dir + "/episodes"));
  append_results_csv(out_dir + "/results.csv", rows);
  const std::string table = markdown_table(rows);
  std::ofstream md(out_dir + "/results.md", std::ios::binary);
  md << table;
  std::cout << table;
  return 0;
}

int cmd_render(const std::string& scenario_path, const std::string& method_str,
               const std::string& checkpoint, const std::string& config,
               const std::string& out_dir) {
  const SimConfig sim = sim_from_config(load_config(config));
  const Scenario sc = load_scenario(scenario_path);
  ParkingEnv env(sc, sim);
  env.reset();
  if (!method_str.empty()) {
    const Method method = parse_method(method_str);
    std::unique_ptr<SacAgent> agent;
    std::unique_ptr<Controller> ctl;
    if (method == Method::HYBRID_ASTAR) {
      ctl = std::make_unique<HybridAStarController>();
    } else {
      if (checkpoint.empty())
        throw CLI::ValidationError("--checkpoint", "required for learned methods");
      agent = std::make_unique<SacAgent>(load_agent(checkpoint));
      if (method == Method::HYBRID_RL) {
        ctl = std::make_unique<HybridRlController>(*agent, false);
      } else {
        ctl = std::make_unique<PureSacController>(*agent, false);
      }
    }
    run_episode(env, *ctl);
  }
  fs::create_directories(out_dir);
  const std::string img = out_dir + "/render.ppm";
  env.render_frame(img);
  std::cout << "wrote " << img << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parkrl: occupancy-grid parking stack (mapping, planning, training, "
               "benchmarks)"};
  app.require_subcommand(1);

  std::string config, out_dir = ".";
  uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "flat key: value config file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed");
  };

  // build-map
  std::string recording;
  CLI::App* build = app.add_subcommand("build-map",
                                       "fuse a point-cloud recording into a global "
                                       "occupancy grid");
  build->add_option("--recording", recording,
                    "directory with trajectory.txt and frames/*.txt")
      ->required();
  add_common(build);

  // gen-suite
  std::string kind = "mixed", difficulty = "normal";
  int n = 70;
  CLI::App* gen = app.add_subcommand("gen-suite", "generate a scenario suite");
  gen->add_option("--kind", kind, "perpendicular, parallel or mixed");
  gen->add_option("--n", n, "number of scenarios");
  gen->add_option("--difficulty", difficulty, "normal, complex or real-world");
  add_common(gen);

  // train
  std::string mode = "hybrid";
  int steps = 100000, eval_every = 5000, eval_episodes = 20;
  CLI::App* train = app.add_subcommand("train", "train the SAC policy");
  train->add_option("--mode", mode, "hybrid or pure");
  train->add_option("--steps", steps, "environment steps");
  train->add_option("--eval-every", eval_every, "steps between evaluations");
  train->add_option("--eval-episodes", eval_episodes, "episodes per evaluation");
  train->add_option("--difficulty", difficulty, "normal, complex or real-world");
  add_common(train);

  // eval
  std::string method_str, suite_path, checkpoint, pure_checkpoint;
  CLI::App* eval = app.add_subcommand("eval", "evaluate one method on a suite");
  eval->add_option("--method", method_str, "HYBRID_RL, PURE_SAC or HYBRID_ASTAR")
      ->required();
  eval->add_option("--suite", suite_path, "suite manifest")->required();
  eval->add_option("--checkpoint", checkpoint, "agent checkpoint");
  add_common(eval);

  // bench
  CLI::App* bench = app.add_subcommand("bench", "run all three methods on a suite");
  bench->add_option("--suite", suite_path, "suite manifest")->required();
  bench->add_option("--checkpoint", checkpoint, "hybrid agent checkpoint")->required();
  bench->add_option("--pure-checkpoint", pure_checkpoint,
                    "separate checkpoint for PURE_SAC");
  add_common(bench);

  // render
  std::string scenario_path;
  CLI::App* render = app.add_subcommand("render", "render a scenario to an image");
  render->add_option("--scenario", scenario_path, "scenario file")->required();
  render->add_option("--method", method_str, "roll out this method before rendering");
  render->add_option("--checkpoint", checkpoint, "agent checkpoint");
  add_common(render);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    if (build->parsed()) return cmd_build_map(recording, config, out_dir);
    if (gen->parsed()) return cmd_gen_suite(kind, n, difficulty, seed, config, out_dir);
    if (train->parsed())
      return cmd_train(mode, steps, seed, config, out_dir, eval_every, eval_episodes,
                       difficulty);
    if (eval->parsed())
      return cmd_eval(method_str, suite_path, checkpoint, config, out_dir);
    if (bench->parsed())
      return cmd_bench(suite_path, checkpoint, pure_checkpoint, config, out_dir);
    if (render->parsed())
      return cmd_render(scenario_path, method_str, checkpoint, config, out_dir);
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
