#include "dwmpc/knode.hpp"

#include <algorithm>
#include <cmath>

namespace dwmpc {

DwFeatures make_dw_features(const QuadState& ego, const QuadState& source, double source_thrust,
                            const QuadParams& params) {
  DwFeatures f;
  if (!(source.p.z() > ego.p.z())) return f;  // gated
  f.gated = false;
  f.values.segment<3>(0) = source.p - ego.p;
  f.values.segment<3>(3) = source.v - ego.v;
  f.values(6) = ego.v.z();
  f.values(7) = source_thrust / params.hover_thrust();
  // Saturate to the envelope the two-vehicle training scenarios cover; the
  // learned residual has no support beyond it and tanh extrapolation would
  // otherwise inject noise in larger formations (deeper stacks push the
  // source-thrust ratio well past anything seen in training).
  for (int i = 0; i < 6; ++i) f.values(i) = std::clamp(f.values(i), -2.0, 2.0);
  f.values(6) = std::clamp(f.values(6), -3.0, 3.0);
  f.values(7) = std::clamp(f.values(7), 0.0, 1.35);
  return f;
}

Vec3 knode_residual(const DwFeatures& features, const Mlp& mlp) {
  if (features.gated) return Vec3::Zero();
  if (mlp.input_size() != kDwFeatureSize || mlp.output_size() != 3)
    throw DimensionError("knode_residual: mlp must map 8 features to 3 force components");
  return mlp.forward(features.values);
}

Vec3 hybrid_interaction_force(const QuadState& ego,
                              const std::vector<std::pair<QuadState, double>>& sources,
                              const DwParams& dw, const Mlp* mlp, const QuadParams& params) {
  Vec3 total = Vec3::Zero();
  for (const auto& [source, thrust] : sources) {
    if (!(source.p.z() > ego.p.z())) continue;
    if ((source.p - ego.p).norm() > dw.neighbor_range) continue;
    total += pairwise_dw_force(ego, source, thrust, dw);
    if (mlp != nullptr)
      total += knode_residual(make_dw_features(ego, source, thrust, params), *mlp);
  }
  return total;
}

}  // namespace dwmpc
