#include "dwmpc/prediction_model.hpp"

#include "dwmpc/errors.hpp"
#include "dwmpc/rigid_body.hpp"

namespace dwmpc {

void PredictionModel::validate() const {
  if (variant == ModelVariant::kKnodeDw && mlp == nullptr)
    throw ConfigError("prediction model: KNODE-DW variant requires loaded weights");
  if (variant != ModelVariant::kNominal) dw.validate();
}

std::vector<std::pair<QuadState, double>> PredictionModel::neighbors_at(double tau) const {
  if (tau == 0.0) return neighbors;
  auto coasted = neighbors;
  for (auto& [state, thrust] : coasted) state.p += tau * state.v;
  return coasted;
}

Vec3 PredictionModel::model_force(const QuadState& x, const QuadParams& params, double tau) const {
  if (variant == ModelVariant::kNominal) return Vec3::Zero();
  const Mlp* residual = variant == ModelVariant::kKnodeDw ? mlp : nullptr;
  if (tau == 0.0) return hybrid_interaction_force(x, neighbors, dw, residual, params);
  return hybrid_interaction_force(x, neighbors_at(tau), dw, residual, params);
}

Vec10 PredictionModel::deriv(const QuadState& x, const ControlInput& u, const QuadParams& params,
                             double tau) const {
  Vec10 dx = f_nom(x, u, params);
  if (variant != ModelVariant::kNominal) {
    const Vec3 force = model_force(x, params, tau);
    if (force != Vec3::Zero()) dx.segment<3>(3) += force / params.mass;
  }
  if (f_sigma != Vec10::Zero()) dx += f_sigma;
  return dx;
}

}  // namespace dwmpc
