#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dwmpc/knode.hpp"
#include "dwmpc/simulate.hpp"

namespace dwmpc {

/// Two-vehicle data collection scenarios: a source vehicle hovering above the
/// midpoint of the ego's straight pass (static top), and both vehicles flying
/// the same line vertically aligned (stacked).
enum class TrainingScenario { kStaticTop, kStacked, kBoth };
TrainingScenario parse_training_scenario(const std::string& name);

struct TrainingDataOptions {
  TrainingScenario source{TrainingScenario::kBoth};
  QuadParams quad;
  PlantInteractionParams plant;   // truth model generating the mismatch
  DwParams controller_dw;         // model the residual trains against
  OcpConfig solver;
  double rate_hz{200.0};          // both vehicles, so streams stay aligned
  double plant_rate_hz{2000.0};
  double separation{0.2};         // m, vertical gap
  int horizon{5};
  int stride{5};                  // window stride in samples
};

struct TrainingData {
  TrainingSet set;
  std::vector<std::string> dropped;  // aborted runs, one note each
};

/// Simulates the selected scenarios under DW-MPC, logs synchronized
/// state/input/neighbor series at the control rate and cuts them into
/// horizon+1 windows. Deterministic per seed; diverged runs are dropped and
/// reported in `dropped`.
TrainingData generate_training_data(const TrainingDataOptions& options,
                                    const std::vector<std::uint64_t>& seeds);

/// Splits off every keep_every-th window as a held-out set (deterministic).
std::pair<TrainingSet, TrainingSet> split_training_set(const TrainingSet& all, int keep_every);

}  // namespace dwmpc
