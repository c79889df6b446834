#pragma once

#include <string>
#include <vector>

#include "parkrl/hybrid_planner.hpp"
#include "parkrl/sac.hpp"
#include "parkrl/simulator.hpp"

namespace parkrl {

enum class Method { HYBRID_RL, PURE_SAC, HYBRID_ASTAR };

std::string method_name(Method m);
Method parse_method(const std::string& name);

std::string difficulty_class(Difficulty d);  // e.g. "sim-normal"
Difficulty parse_difficulty(const std::string& name);

struct MetricsRow {
  Method method = Method::HYBRID_RL;
  std::string scenario_class;
  int episodes = 0;
  double psr = 0.0;   // percent of successful episodes
  double angs = 0.0;  // mean gear shifts, all episodes
  double pl = 0.0;    // mean path length, successes only (0 when none)
  double aot = 0.0;   // mean simulated seconds, successes only (0 when none)
};

// Pure aggregation over episode records; values are rounded to 1e-6 so a
// row recomputed from persisted logs matches exactly.
MetricsRow compute_metrics(Method method, const std::string& scenario_class,
                           const std::vector<EpisodeRecord>& records);

// Parses the `# outcome=...` footer written by run_episode.
EpisodeRecord read_episode_footer(const std::string& log_path);

struct SuiteSpec {
  int n_perpendicular = 50;  // paper-shaped default: 50 + 20
  int n_parallel = 20;
  Difficulty difficulty = Difficulty::SIM_NORMAL;
  uint64_t seed = 0;
};

// Writes scenario files plus manifest.txt into out_dir; returns the
// manifest path. Deterministic in the spec.
std::string gen_suite(const SuiteSpec& spec, const std::string& out_dir,
                      const SimConfig& sim = SimConfig{});

struct Suite {
  std::string scenario_class;
  uint64_t seed = 0;
  std::vector<std::string> scenario_paths;  // absolute or manifest-relative
};

Suite load_suite(const std::string& manifest_path);

// Evaluates one method over every scenario in the suite. `agent` may be
// null only for HYBRID_ASTAR. Episode logs land in log_dir when non-empty.
MetricsRow run_suite(Method method, const Suite& suite, SacAgent* agent,
                     const SimConfig& sim, const std::string& log_dir = "");

// `method,scenario_class,episodes,psr,angs,pl,aot`; header written when the
// file does not exist yet.
void append_results_csv(const std::string& path, const std::vector<MetricsRow>& rows);

std::string markdown_table(const std::vector<MetricsRow>& rows);

}  // namespace parkrl
