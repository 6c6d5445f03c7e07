#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dwmpc/downwash.hpp"
#include "dwmpc/l1_adaptive.hpp"
#include "dwmpc/metrics.hpp"
#include "dwmpc/mlp.hpp"
#include "dwmpc/ocp.hpp"
#include "dwmpc/trajectory.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

enum class ControllerVariant { kMpc, kDwMpc, kKnodeDwMpc, kL1Mpc, kL1DwMpc, kL1KnodeDwMpc };

bool variant_has_l1(ControllerVariant v);
bool variant_has_knode(ControllerVariant v);
ModelVariant variant_model(ControllerVariant v);
const char* variant_name(ControllerVariant v);
ControllerVariant parse_variant(const std::string& name);  // throws ConfigError

/// One vehicle in a closed-loop run.
struct VehicleSetup {
  std::string role{"bottom"};
  Vec3 offset{Vec3::Zero()};          // constant offset from its trajectory
  TrajectorySpec trajectory;
  ControllerVariant variant{ControllerVariant::kMpc};
  double rate_hz{200.0};
  L1Config l1;
  DwParams dw;
  const Mlp* mlp{nullptr};            // required by the KNODE variants
};

struct SimSetup {
  std::vector<VehicleSetup> vehicles;
  QuadParams quad;
  PlantInteractionParams plant;
  OcpConfig solver;
  double plant_rate_hz{2000.0};
  double duration{0.0};               // <= 0: longest vehicle trajectory
  double measurement_noise_std{0.0};  // m, optional position noise

  double effective_duration() const;
  void validate() const;
};

enum class RunOutcome { kCompleted, kCrash, kCollision, kDiverged };
const char* outcome_name(RunOutcome o);

/// One logged control tick of one vehicle.
struct TickLog {
  double t{0.0};
  Vec10 state{Vec10::Zero()};
  Vec3 p_ref{Vec3::Zero()};
  Vec3 v_ref{Vec3::Zero()};
  Vec4 input{Vec4::Zero()};
  Vec3 sigma_hat{Vec3::Zero()};
  Vec3 u_sigma{Vec3::Zero()};
  Vec3 plant_force{Vec3::Zero()};
  double kkt{0.0};
  int qp_iterations{0};
  int active_set{0};
  int degraded{0};
  int l1_reset{0};
};

struct VehicleSeries {
  std::string role;
  std::string variant;
  double rate_hz{0.0};
  std::vector<TickLog> ticks;
  Metrics metrics;
  bool metrics_valid{false};
};

struct RunRecord {
  std::uint64_t seed{0};
  std::string config_hash;
  RunOutcome outcome{RunOutcome::kCompleted};
  double failure_time{-1.0};
  int failure_vehicle{-1};
  std::string failure_what;
  double window_begin{0.0};
  double window_end{0.0};
  std::vector<VehicleSeries> vehicles;
};

/// Runs the closed loop at the plant rate with each controller firing at its
/// own rate on its latest measurements. Deterministic per seed: one master
/// stream feeds the per-step OU noise (vehicles in index order, 3 draws each)
/// and an independent child stream per vehicle feeds measurement noise.
/// Crashes (altitude < 0), pairwise distances below one body diameter and
/// non-finite states mark the run failed and stop it at that time.
RunRecord run_simulation(const SimSetup& setup, std::uint64_t seed,
                         const std::string& config_hash = "");

}  // namespace dwmpc
