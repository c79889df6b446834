#include "parkrl/bench.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace parkrl {

namespace {

namespace fs = std::filesystem;

double round6(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return std::atof(buf);
}

Outcome parse_outcome(const std::string& s) {
  if (s == "SUCCESS") return Outcome::SUCCESS;
  if (s == "COLLISION") return Outcome::COLLISION;
  if (s == "TIMEOUT") return Outcome::TIMEOUT;
  if (s == "RUNNING") return Outcome::RUNNING;
  throw std::runtime_error("unknown outcome: " + s);
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::HYBRID_RL: return "HYBRID_RL";
    case Method::PURE_SAC: return "PURE_SAC";
    case Method::HYBRID_ASTAR: return "HYBRID_ASTAR";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "HYBRID_RL" || name == "hybrid-rl") return Method::HYBRID_RL;
  if (name == "PURE_SAC" || name == "pure-sac") return Method::PURE_SAC;
  if (name == "HYBRID_ASTAR" || name == "hybrid-astar") return Method::HYBRID_ASTAR;
  throw std::invalid_argument("unknown method: " + name);
}

std::string difficulty_class(Difficulty d) {
  switch (d) {
    case Difficulty::SIM_NORMAL: return "sim-normal";
    case Difficulty::SIM_COMPLEX: return "sim-complex";
    case Difficulty::REAL_WORLD_STYLE: return "real-world-style";
  }
  return "?";
}

Difficulty parse_difficulty(const std::string& name) {
  if (name == "sim-normal" || name == "normal") return Difficulty::SIM_NORMAL;
  if (name == "sim-complex" || name == "complex") return Difficulty::SIM_COMPLEX;
  if (name == "real-world-style" || name == "real-world")
    return Difficulty::REAL_WORLD_STYLE;
  throw std::invalid_argument("unknown difficulty: " + name);
}

MetricsRow compute_metrics(Method method, const std::string& scenario_class,
                           const std::vector<EpisodeRecord>& records) {
  if (records.empty()) throw std::invalid_argument("compute_metrics: no episodes");
  MetricsRow row;
  row.method = method;
  row.scenario_class = scenario_class;
  row.episodes = (int)records.size();
  int successes = 0;
  double shifts = 0.0, pl = 0.0, aot = 0.0;
  for (const EpisodeRecord& r : records) {
    shifts += r.gear_shifts;
    if (r.outcome == Outcome::SUCCESS) {
      ++successes;
      pl += round6(r.path_length);
      aot += round6(r.duration);
    }
  }
  row.psr = round6(100.0 * successes / records.size());
  row.angs = round6(shifts / records.size());
  row.pl = successes > 0 ? round6(pl / successes) : 0.0;
  row.aot = successes > 0 ? round6(aot / successes) : 0.0;
  return row;
}

EpisodeRecord read_episode_footer(const std::string& log_path) {
  std::ifstream in(log_path);
  if (!in) throw std::runtime_error("cannot open episode log: " + log_path);
  std::string line, footer;
  while (std::getline(in, line)) {
    if (line.rfind("# outcome=", 0) == 0) footer = line;
  }
  if (footer.empty())
    throw std::runtime_error("episode log has no footer: " + log_path);
  EpisodeRecord rec;
  char outcome[32];
  if (std::sscanf(footer.c_str(),
                  "# outcome=%31s steps=%d shifts=%d path_length=%lf duration=%lf "
                  "return=%lf",
                  outcome, &rec.steps, &rec.gear_shifts, &rec.path_length,
                  &rec.duration, &rec.total_reward) != 6) {
    throw std::runtime_error("malformed episode footer: " + log_path);
  }
  rec.outcome = parse_outcome(outcome);
  return rec;
}

std::string gen_suite(const SuiteSpec& spec, const std::string& out_dir,
                      const SimConfig& sim) {
  if (spec.n_perpendicular < 0 || spec.n_parallel < 0 ||
      spec.n_perpendicular + spec.n_parallel < 1) {
    throw std::invalid_argument("gen_suite: need at least one scenario");
  }
  fs::create_directories(out_dir);
  std::vector<std::string> names;
  int idx = 0;
  const auto emit = [&](ScenarioKind kind, int count, uint64_t stream) {
    for (int i = 0; i < count; ++i, ++idx) {
      const Scenario sc =
          generate_scenario(kind, spec.difficulty, Rng::mix(spec.seed, stream + i), sim);
      char name[32];
      std::snprintf(name, sizeof name, "ep_%04d.txt", idx);
      save_scenario(sc, out_dir + "/" + name);
      names.emplace_back(name);
    }
  };
  emit(ScenarioKind::PERPENDICULAR, spec.n_perpendicular, 0x9e70000);
  emit(ScenarioKind::PARALLEL, spec.n_parallel, 0x9a70000);

  const std::string manifest = out_dir + "/manifest.txt";
  std::ofstream out(manifest, std::ios::binary);
  if (!out) throw std::runtime_error("gen_suite: cannot write " + manifest);
  out << "parkrl-suite v1\n";
  out << "class: " << difficulty_class(spec.difficulty) << "\n";
  out << "seed: " << spec.seed << "\n";
  for (const std::string& n : names) out << n << "\n";
  return manifest;
}

Suite load_suite(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("cannot open manifest: " + manifest_path);
  std::string line;
  if (!std::getline(in, line) || line != "parkrl-suite v1")
    throw std::runtime_error("bad suite manifest header: " + manifest_path);
  Suite suite;
  const fs::path dir = fs::path(manifest_path).parent_path();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("class: ", 0) == 0) {
      suite.scenario_class = line.substr(7);
    } else if (line.rfind("seed: ", 0) == 0) {
      suite.seed = std::stoull(line.substr(6));
    } else {
      suite.scenario_paths.push_back((dir / line).string());
    }
  }
  if (suite.scenario_paths.empty())
    throw std::runtime_error("suite manifest lists no scenarios: " + manifest_path);
  return suite;
}

MetricsRow run_suite(Method method, const Suite& suite, SacAgent* agent,
                     const SimConfig& sim, const std::string& log_dir) {
  if (method != Method::HYBRID_ASTAR && agent == nullptr)
    throw std::invalid_argument("run_suite: learned method needs a checkpoint");
  if (!log_dir.empty()) fs::create_directories(log_dir);
  std::vector<EpisodeRecord> records;
  for (size_t i = 0; i < suite.scenario_paths.size(); ++i) {
    const Scenario sc = load_scenario(suite.scenario_paths[i]);
    ParkingEnv env(sc, sim);
    std::unique_ptr<Controller> ctl;
    switch (method) {
      case Method::HYBRID_RL:
        ctl = std::make_unique<HybridRlController>(*agent, false);
        break;
      case Method::PURE_SAC:
        ctl = std::make_unique<PureSacController>(*agent, false);
        break;
      case Method::HYBRID_ASTAR:
        ctl = std::make_unique<HybridAStarController>();
        break;
    }
    if (!log_dir.empty()) {
      char name[48];
      std::snprintf(name, sizeof name, "%s_ep_%04zu.log", method_name(method).c_str(),
                    i);
      std::ofstream log(log_dir + "/" + name, std::ios::binary);
      records.push_back(run_episode(env, *ctl, &log));
    } else {
      records.push_back(run_episode(env, *ctl));
    }
  }
  return compute_metrics(method, suite.scenario_class, records);
}

void append_results_csv(const std::string& path,
                        const std::vector<MetricsRow>& rows) {
  const bool fresh = !fs::exists(path);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cannot open results csv: " + path);
  if (fresh) out << "method,scenario_class,episodes,psr,angs,pl,aot\n";
  char buf[160];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%.6f,%.6f,%.6f,%.6f\n",
                  method_name(r.method).c_str(), r.scenario_class.c_str(), r.episodes,
                  r.psr, r.angs, r.pl, r.aot);
    out << buf;
  }
}

std::string markdown_table(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "| Method | Class | Episodes | PSR (%) | ANGS | PL (m) | AOT (s) |\n";
  out << "|---|---|---|---|---|---|---|\n";
  char buf[160];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof buf, "| %s | %s | %d | %.2f | %.2f | %.2f | %.2f |\n",
                  method_name(r.method).c_str(), r.scenario_class.c_str(), r.episodes,
                  r.psr, r.angs, r.pl, r.aot);
    out << buf;
  }
  return out.str();
}

}  // namespace parkrl
