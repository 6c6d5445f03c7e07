#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dwmpc/metrics.hpp"
#include "dwmpc/scenario.hpp"

namespace dwmpc {

/// The three experiment grids: controller sweep on the center vehicle,
/// controller sweep on the bottom vehicle, and the tight vertically aligned
/// stack flown by the best and the nominal controller.
enum class Experiment { kCenter, kBottom, kTight };
Experiment parse_experiment(const std::string& name);
const char* experiment_name(Experiment e);

struct SweepRun {
  std::string name;   // unique, used as the log file stem
  std::string group;  // aggregation key (formation config + variant under test)
  Scenario scenario;
  std::uint64_t seed{1};
  int vehicle_under_test{0};
};

/// Builds the full run list for one experiment. `weights_path` backs every
/// KNODE-variant vehicle and must exist.
std::vector<SweepRun> build_experiment_runs(Experiment experiment,
                                            const std::string& weights_path, int num_seeds);

struct SweepRunOutcome {
  std::string name;
  std::string group;
  std::uint64_t seed{0};
  std::string config_hash;
  std::string outcome;
  std::vector<std::string> roles;
  std::vector<std::string> variants;
  std::vector<Metrics> vehicle_metrics;
  std::vector<bool> metrics_valid;
  int vehicle_under_test{0};
};

struct SweepResult {
  std::vector<SweepRunOutcome> runs;
  std::vector<RunSummary> summaries;  // vehicle under test only
  std::vector<GroupStats> stats;
  int failures{0};
};

/// Executes runs (optionally across threads; each run stays single-threaded
/// and seeded) and writes one log per run into out_dir. Results are ordered
/// like the input regardless of scheduling.
SweepResult execute_runs(const std::vector<SweepRun>& runs,
                         const std::filesystem::path& out_dir, int parallelism);

/// Writes summary.json (per-group stats plus one entry per run).
void write_summary_json(const SweepResult& result, Experiment experiment,
                        const std::filesystem::path& path);

/// Rebuilds report tables from the run logs in `in_dir`: per-run metrics
/// (recomputed from the series), per-group aggregates keyed by config hash
/// and vehicle, and one z/thrust time-history CSV per run. Returns the number
/// of logs processed.
int write_report(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir);

}  // namespace dwmpc
