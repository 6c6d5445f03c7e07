// Command line front end: closed-loop simulation runs, residual-model
// training, the three experiment sweeps and report generation.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dwmpc/knode_data.hpp"
#include "dwmpc/run_log.hpp"
#include "dwmpc/scenario.hpp"
#include "dwmpc/sweep.hpp"
#include "dwmpc/version.hpp"

namespace fs = std::filesystem;
using namespace dwmpc;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

fs::path default_out_dir(const std::string& flag_value, const char* fallback) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("DWMPC_OUT_DIR")) return env;
  return fallback;
}

int cmd_simulate(const std::string& config_path, const std::vector<std::uint64_t>& seed_override,
                 const std::string& out_flag) {
  Scenario scenario;
  try {
    scenario = parse_scenario_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  }

  const fs::path out_dir = default_out_dir(out_flag, "runs");
  fs::create_directories(out_dir);

  const std::vector<std::uint64_t> seeds = seed_override.empty() ? scenario.seeds : seed_override;
  const std::string stem = fs::path(config_path).stem().string();

  bool any_failed = false;
  for (const std::uint64_t seed : seeds) {
    RunRecord record;
    try {
      record = run_scenario(scenario, seed);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 1;
    }
    const std::string name = stem + "_seed" + std::to_string(seed);
    write_run_log(record, out_dir / (name + ".log"));
    std::cout << name << ": " << outcome_name(record.outcome);
    if (record.outcome != RunOutcome::kCompleted) {
      any_failed = true;
      std::cout << " at t=" << fmt(record.failure_time) << " (vehicle "
                << record.failure_vehicle << ")";
    } else {
      for (std::size_t i = 0; i < record.vehicles.size(); ++i) {
        const auto& v = record.vehicles[i];
        std::cout << " | " << v.role << " rmse=" << fmt(v.metrics.rmse)
                  << " z_max=" << fmt(v.metrics.z_max);
      }
    }
    std::cout << "\n";
  }
  return any_failed ? 2 : 0;
}

int cmd_train(const std::string& scenario_name, const std::vector<std::uint64_t>& seeds,
              int epochs, double learning_rate, int stride, const std::string& out_path,
              const std::string& loss_csv_path) {
  TrainingDataOptions options;
  options.source = parse_training_scenario(scenario_name);
  options.stride = stride;

  const std::vector<std::uint64_t> use_seeds = seeds.empty() ? std::vector<std::uint64_t>{1} : seeds;
  std::cout << "generating training data (" << scenario_name << ", " << use_seeds.size()
            << " seed(s))...\n";
  const TrainingData data = generate_training_data(options, use_seeds);
  for (const auto& note : data.dropped) std::cerr << "dropped: " << note << "\n";
  const auto [train_set, held_set] = split_training_set(data.set, 5);
  std::cout << "windows: " << train_set.segments.size() << " train / "
            << held_set.segments.size() << " held out\n";

  Rng init_rng(use_seeds.front());
  const Mlp init = Mlp::random_init({kDwFeatureSize, 32, 32, 3}, init_rng);

  TrainConfig tc;
  tc.epochs = epochs;
  tc.learning_rate = learning_rate;
  const TrainResult result = train_knode(train_set, init, options.controller_dw, options.quad, tc);

  result.mlp.save(out_path);
  if (!loss_csv_path.empty()) {
    std::ofstream csv(loss_csv_path);
    csv << "epoch,loss\n";
    for (std::size_t i = 0; i < result.loss_history.size(); ++i)
      csv << i << "," << fmt(result.loss_history[i]) << "\n";
  }

  const double train_loss = result.loss_history.back();
  const double held_dw = multistep_velocity_rmse(held_set, nullptr, options.controller_dw,
                                                 options.quad, tc.horizon);
  const double held_knode = multistep_velocity_rmse(held_set, &result.mlp, options.controller_dw,
                                                    options.quad, tc.horizon);
  std::cout << "final train loss: " << fmt(train_loss) << "\n";
  std::cout << "held-out " << tc.horizon << "-step velocity RMSE: physics-only " << fmt(held_dw)
            << ", with residual " << fmt(held_knode) << "\n";
  std::cout << "weights written to " << out_path << "\n";

  if (result.status == TrainStatus::kDiverged) {
    std::cerr << "training diverged; last finite checkpoint saved\n";
    return 3;
  }
  return 0;
}

int cmd_sweep(const std::string& experiment_name_str, const std::string& weights,
              const std::string& out_flag, int num_seeds, int jobs) {
  if (weights.empty() || !fs::exists(weights)) {
    std::cerr << "error: trained weights required (--weights), not found: '" << weights << "'\n";
    return 1;
  }
  Experiment experiment;
  try {
    experiment = parse_experiment(experiment_name_str);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  const fs::path out_dir = default_out_dir(out_flag, "sweep");
  const auto runs = build_experiment_runs(experiment, weights, num_seeds);
  std::cout << "experiment '" << experiment_name_str << "': " << runs.size() << " runs\n";
  const SweepResult result = execute_runs(runs, out_dir, jobs);
  write_summary_json(result, experiment, out_dir / "summary.json");

  for (const auto& g : result.stats) {
    std::cout << g.group << ": rmse " << fmt(g.rmse_mean) << " +- " << fmt(g.rmse_std)
              << ", z_max " << fmt(g.zmax_mean) << " +- " << fmt(g.zmax_std) << " ("
              << g.completed << " ok";
    if (g.failed > 0) std::cout << ", " << g.failed << " failed";
    std::cout << ")\n";
  }
  std::cout << "logs and summary.json in " << out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out_flag) {
  const fs::path out_dir = default_out_dir(out_flag, (fs::path(in_dir) / "report").c_str());
  int count = 0;
  try {
    count = write_report(in_dir, out_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  if (count == 0) {
    std::cerr << "error: no runs found in " << in_dir << "\n";
    return 1;
  }
  std::cout << "report over " << count << " runs written to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-quadrotor formation MPC testbed"};
  app.set_version_flag("--version", std::string(kProjectVersion));
  app.require_subcommand(1);

  // simulate
  std::string sim_config, sim_out;
  std::vector<std::uint64_t> sim_seeds;
  auto* sim = app.add_subcommand("simulate", "Run a scenario config for each seed");
  sim->add_option("config", sim_config, "Scenario config file (JSON)")->required();
  sim->add_option("--seed", sim_seeds, "Override the config seed list");
  sim->add_option("--out", sim_out, "Output directory (default: runs/ or $DWMPC_OUT_DIR)");

  // train
  std::string train_scenario = "both", train_out = "knode_weights.txt", train_loss_csv = "";
  std::vector<std::uint64_t> train_seeds;
  int train_epochs = 2000, train_stride = 5;
  double train_lr = 1.0;
  auto* train = app.add_subcommand("train", "Generate two-vehicle data and train the residual");
  train->add_option("--scenario", train_scenario, "static_top, stacked or both");
  train->add_option("--seeds", train_seeds, "Data-generation seeds (default: 1)");
  train->add_option("--epochs", train_epochs, "Training epochs");
  train->add_option("--lr", train_lr, "Learning rate");
  train->add_option("--stride", train_stride, "Window stride in samples");
  train->add_option("--out", train_out, "Weights output path");
  train->add_option("--loss-csv", train_loss_csv, "Loss history CSV path");

  // sweep
  std::string sweep_experiment, sweep_weights, sweep_out;
  int sweep_seeds = 5, sweep_jobs = 0;
  auto* sweep = app.add_subcommand("sweep", "Run one of the experiment grids");
  sweep->add_option("--experiment", sweep_experiment, "center, bottom or tight")->required();
  sweep->add_option("--weights", sweep_weights, "Trained weights file")->required();
  sweep->add_option("--out", sweep_out, "Output directory (default: sweep/ or $DWMPC_OUT_DIR)");
  sweep->add_option("--seeds", sweep_seeds, "Seeds per configuration (default 5)");
  sweep->add_option("--jobs", sweep_jobs, "Parallel runs (default: hardware)");

  // report
  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "Rebuild metric tables and time histories from logs");
  report->add_option("--in", report_in, "Directory containing .log files")->required();
  report->add_option("--out", report_out, "Report output directory (default: <in>/report)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_seeds, sim_out);
    if (train->parsed())
      return cmd_train(train_scenario, train_seeds, train_epochs, train_lr, train_stride,
                       train_out, train_loss_csv);
    if (sweep->parsed())
      return cmd_sweep(sweep_experiment, sweep_weights, sweep_out, sweep_seeds, sweep_jobs);
    if (report->parsed()) return cmd_report(report_in, report_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
