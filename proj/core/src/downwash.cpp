#include "dwmpc/downwash.hpp"

#include <cmath>

namespace dwmpc {

void DwParams::validate() const {
  if (!(jet_strength > 0.0) || !(z_clamp > 0.0) || !(core_width > 0.0) ||
      !(spread_rate > 0.0) || !(neighbor_range > 0.0))
    throw ConfigError("downwash params: all parameters must be positive");
  if (!(neighbor_range >= 2.0 * z_clamp))
    throw ConfigError("downwash params: neighbor_range must be at least twice z_clamp");
}

void PlantInteractionParams::validate() const {
  dw.validate();
  if (!(noise_tau > 0.0)) throw ConfigError("plant params: noise_tau must be positive");
  if (below_gain < 0.0) throw ConfigError("plant params: below_gain must be non-negative");
  if (noise_sigma < 0.0) throw ConfigError("plant params: noise_sigma must be non-negative");
}

NeighborSet neighbors_in_range(int ego_id, const QuadState& ego,
                               const std::vector<std::pair<int, QuadState>>& all, double range) {
  NeighborSet out;
  for (const auto& [id, state] : all) {
    if (id == ego_id) continue;
    if ((state.p - ego.p).norm() <= range) out.entries.push_back({id, state});
  }
  return out;
}

double dw_kernel(double dz, double rho_sq, double source_thrust, const DwParams& p) {
  const double dzc = std::max(dz, p.z_clamp);
  const double axial = p.z_clamp / dzc;
  const double width = p.core_width + p.spread_rate * dzc;
  return -p.jet_strength * source_thrust * axial * axial *
         std::exp(-0.5 * rho_sq / (width * width));
}

Vec3 pairwise_dw_force(const QuadState& ego, const QuadState& above, double above_thrust,
                       const DwParams& p) {
  const double dz = above.p.z() - ego.p.z();
  if (!(dz > 0.0))
    throw InvalidStateError("pairwise_dw_force: source vehicle is not strictly above the ego");
  const double rho_sq = (above.p.head<2>() - ego.p.head<2>()).squaredNorm();
  return Vec3{0.0, 0.0, dw_kernel(dz, rho_sq, above_thrust, p)};
}

Vec3 aggregate_downwash(const QuadState& ego, const NeighborSet& neighbors,
                        const ThrustMap& neighbor_thrusts, const DwParams& p,
                        double fallback_thrust) {
  Vec3 total = Vec3::Zero();
  for (const auto& entry : neighbors.entries) {
    if (!(entry.state.p.z() > ego.p.z())) continue;
    const auto it = neighbor_thrusts.find(entry.id);
    const double thrust = it != neighbor_thrusts.end() ? it->second : fallback_thrust;
    total += pairwise_dw_force(ego, entry.state, thrust, p);
  }
  return total;
}

PlantForceResult plant_interaction_force(const QuadState& ego,
                                         const std::vector<std::pair<QuadState, double>>& others,
                                         const OuState& noise, const PlantInteractionParams& p,
                                         double dt, Rng& rng) {
  if (!(dt > 0.0)) throw ConfigError("plant_interaction_force: dt must be positive");

  PlantForceResult out;
  for (const auto& [other, thrust] : others) {
    const Vec3 rel = other.p - ego.p;
    if (rel.norm() > p.dw.neighbor_range) continue;
    const double dz = rel.z();
    if (dz > 0.0) {
      // Wake center is advected opposite to the source's relative motion.
      const Eigen::Vector2d offset =
          (ego.p.head<2>() - other.p.head<2>()) +
          p.vel_skew * (other.v.head<2>() - ego.v.head<2>());
      out.force.z() += dw_kernel(dz, offset.squaredNorm(), thrust, p.dw);
    } else if (dz < 0.0) {
      // Vehicles underneath push the ego up with a fraction of the
      // swapped-geometry jet force.
      const double rho_sq = rel.head<2>().squaredNorm();
      out.force.z() += p.below_gain * (-dw_kernel(-dz, rho_sq, thrust, p.dw));
    }
  }

  // Exact OU discretization; stationary per-axis variance is noise_sigma^2.
  const double decay = std::exp(-dt / p.noise_tau);
  const double scale = p.noise_sigma * std::sqrt(1.0 - decay * decay);
  for (int i = 0; i < 3; ++i)
    out.noise.value(i) = noise.value(i) * decay + scale * rng.normal();
  out.force += out.noise.value;
  return out;
}

}  // namespace dwmpc
