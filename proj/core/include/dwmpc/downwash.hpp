#pragma once

#include <map>
#include <utility>
#include <vector>

#include "dwmpc/errors.hpp"
#include "dwmpc/rng.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

/// Parameters of the momentum-jet downwash surrogate: quadratic axial decay
/// below an axial clamp, Gaussian radial profile with linearly spreading
/// width.
struct DwParams {
  double jet_strength{0.8};    // c0, force at the clamp distance as a fraction of source thrust
  double z_clamp{0.15};        // m, axial distance below which the jet no longer strengthens
  double core_width{0.10};     // m, radial Gaussian width at the source
  double spread_rate{0.15};    // width growth per meter of axial distance
  double neighbor_range{1.0};  // m, interactions beyond this distance are ignored

  void validate() const;
};

/// Plant-truth interaction parameters. The DW fields are intentionally offset
/// from the controller-side DwParams so every controller model carries a
/// mismatch; the extra terms only exist in the plant.
struct PlantInteractionParams {
  DwParams dw{1.0, 0.15, 0.10, 0.195, 1.0};
  double below_gain{0.1};   // upward push from vehicles underneath, fraction of the swapped-pair force
  double noise_sigma{0.005};  // N, Ornstein-Uhlenbeck stationary std per axis
  double noise_tau{0.2};     // s, noise correlation time
  double vel_skew{0.05};     // s, lateral wake advection per unit relative velocity

  void validate() const;
};

/// Neighbors of one vehicle within the interaction range. The ego vehicle is
/// never a member of its own set.
struct NeighborSet {
  struct Entry {
    int id;
    QuadState state;
  };
  std::vector<Entry> entries;
};

using ThrustMap = std::map<int, double>;

/// Collects all vehicles within `range` of the ego position, excluding the ego id.
NeighborSet neighbors_in_range(int ego_id, const QuadState& ego,
                               const std::vector<std::pair<int, QuadState>>& all, double range);

/// Axial force [N] (<= 0) of the jet kernel at axial distance dz (> 0) and
/// squared radial offset rho_sq.
double dw_kernel(double dz, double rho_sq, double source_thrust, const DwParams& p);

/// Force on `ego` from a single vehicle strictly above it. Vertical-only.
/// Raises InvalidStateError when `above` is not strictly higher than `ego`.
Vec3 pairwise_dw_force(const QuadState& ego, const QuadState& above, double above_thrust,
                       const DwParams& p);

/// Total downwash on the ego: pairwise sum over neighbors strictly above it.
/// Neighbors at or below the ego altitude contribute nothing. Thrusts are
/// looked up by id; `fallback_thrust` covers ids missing from the map.
Vec3 aggregate_downwash(const QuadState& ego, const NeighborSet& neighbors,
                        const ThrustMap& neighbor_thrusts, const DwParams& p,
                        double fallback_thrust);

/// Ornstein-Uhlenbeck force noise state, one per vehicle.
struct OuState {
  Vec3 value{Vec3::Zero()};
};

struct PlantForceResult {
  Vec3 force{Vec3::Zero()};
  OuState noise;
};

/// Plant-truth interaction force: downwash from vehicles above (with lateral
/// wake advection), an upward term from vehicles below, and OU noise updated
/// with its exact discretization (3 normal draws per call, x/y/z order).
PlantForceResult plant_interaction_force(const QuadState& ego,
                                         const std::vector<std::pair<QuadState, double>>& others,
                                         const OuState& noise, const PlantInteractionParams& p,
                                         double dt, Rng& rng);

}  // namespace dwmpc
