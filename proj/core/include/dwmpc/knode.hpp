#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dwmpc/downwash.hpp"
#include "dwmpc/mlp.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

/// Input features of the learned force residual, built per (ego, above) pair:
/// relative position (3), relative velocity (3), ego vertical speed (1),
/// source thrust normalized by hover (1). When the source is not strictly
/// above the ego the features are gated and the residual is exactly zero.
struct DwFeatures {
  Eigen::Matrix<double, 8, 1> values{Eigen::Matrix<double, 8, 1>::Zero()};
  bool gated{true};
};

constexpr int kDwFeatureSize = 8;

DwFeatures make_dw_features(const QuadState& ego, const QuadState& source, double source_thrust,
                            const QuadParams& params);

/// Learned force residual [N]. Exactly zero for gated features.
Vec3 knode_residual(const DwFeatures& features, const Mlp& mlp);

/// Combined interaction force [N] of the controller-side hybrid model:
/// pairwise jet force plus (when an mlp is given) the learned residual,
/// summed over sources strictly above the ego and within range.
Vec3 hybrid_interaction_force(const QuadState& ego,
                              const std::vector<std::pair<QuadState, double>>& sources,
                              const DwParams& dw, const Mlp* mlp, const QuadParams& params);

/// One time-uniform trajectory window used for training: logged ego states,
/// applied inputs and the neighbor snapshots active during each interval.
struct TrajectorySegment {
  double dt{0.005};
  std::vector<Vec10> states;                                        // n+1 samples
  std::vector<Vec4> inputs;                                         // n
  std::vector<std::vector<std::pair<QuadState, double>>> neighbors;  // n
};

struct TrainingSet {
  std::vector<TrajectorySegment> segments;
};

/// Throws DimensionError / InvalidStateError when a segment is shorter than
/// horizon+1 samples, inconsistent, non-uniform or contains non-finite data.
void validate_training_set(const TrainingSet& data, int horizon);

struct TrainConfig {
  int horizon{5};
  double learning_rate{1.0};  // full-batch loss scale is tiny; see ledger
  double momentum{0.9};
  int epochs{2000};
};

enum class TrainStatus { kCompleted, kDiverged };

struct TrainResult {
  Mlp mlp;
  std::vector<double> loss_history;  // one entry per epoch plus the initial loss
  TrainStatus status{TrainStatus::kCompleted};
};

/// Mean squared H-step prediction error (position + velocity rows) of the
/// hybrid model unrolled with RK4, with exact reverse-mode gradients through
/// the integrator when `grad` is non-null (+= accumulation into `grad`).
double knode_loss(const TrainingSet& data, const Mlp& mlp, const DwParams& dw,
                  const QuadParams& params, int horizon, Mlp* grad = nullptr);

/// Full-batch gradient descent with momentum on knode_loss. On divergence the
/// last finite parameters are returned with TrainStatus::kDiverged.
TrainResult train_knode(const TrainingSet& data, const Mlp& init, const DwParams& dw,
                        const QuadParams& params, const TrainConfig& config);

/// H-step velocity prediction RMSE of the hybrid model; pass mlp = nullptr
/// for the physics-only baseline.
double multistep_velocity_rmse(const TrainingSet& data, const Mlp* mlp, const DwParams& dw,
                               const QuadParams& params, int horizon);

}  // namespace dwmpc
