#include "dwmpc/formation.hpp"

namespace dwmpc {

void Formation::validate() const {
  if (!(z1 > 0.0) || !(z2 > 0.0))
    throw ConfigError("formation: vertical separations must be positive");
  if (r < 0.0) throw ConfigError("formation: horizontal stagger must be non-negative");
  if (kind == Kind::kIStack && r != 0.0)
    throw ConfigError("formation: vertically aligned stack requires r = 0");
}

std::array<Vec3, 3> formation_offsets(const Formation& f) {
  f.validate();
  const double half_r = f.kind == Formation::Kind::kVStack ? 0.5 * f.r : 0.0;
  return {Vec3{0.0, 0.0, 0.0},             // bottom
          Vec3{-half_r, 0.0, f.z2},        // center
          Vec3{half_r, 0.0, f.z2 + f.z1}};  // top
}

}  // namespace dwmpc
