#pragma once

#include <utility>
#include <vector>

#include "dwmpc/downwash.hpp"
#include "dwmpc/knode.hpp"
#include "dwmpc/mlp.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

enum class ModelVariant { kNominal, kDw, kKnodeDw };

/// Prediction model used inside the MPC and the L1 predictor. Neighbor
/// states, their thrusts and the compensation term are snapshots taken at the
/// solve instant; across the horizon the snapshot positions coast at their
/// snapshot velocities so formation co-motion does not read as a fading wake.
struct PredictionModel {
  ModelVariant variant{ModelVariant::kNominal};
  DwParams dw{};
  const Mlp* mlp{nullptr};
  std::vector<std::pair<QuadState, double>> neighbors;
  Vec10 f_sigma{Vec10::Zero()};

  /// Throws ConfigError when the variant/weights combination is inconsistent.
  void validate() const;

  /// Snapshot coasted forward by `tau` seconds (positions only).
  std::vector<std::pair<QuadState, double>> neighbors_at(double tau) const;

  /// Interaction force [N] the model attributes to the snapshot neighbors,
  /// coasted to `tau` seconds past the snapshot.
  Vec3 model_force(const QuadState& x, const QuadParams& params, double tau = 0.0) const;

  /// Full state derivative: nominal dynamics, plus the interaction force in
  /// the velocity rows, plus the compensation term. `tau` positions the
  /// neighbor snapshot in horizon time.
  Vec10 deriv(const QuadState& x, const ControlInput& u, const QuadParams& params,
              double tau = 0.0) const;
};

}  // namespace dwmpc
