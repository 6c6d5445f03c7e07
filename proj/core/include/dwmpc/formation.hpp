#pragma once

#include <array>

#include "dwmpc/errors.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

/// Three-vehicle stacked formation geometry. z1 separates top and center,
/// z2 separates center and bottom; r is the horizontal stagger of the
/// V-shaped variant (the vertically aligned variant forces r = 0).
struct Formation {
  enum class Kind { kVStack, kIStack };
  Kind kind{Kind::kIStack};
  double z1{0.2};  // m
  double z2{0.4};  // m
  double r{0.0};   // m, V-stack only

  void validate() const;
};

/// Position offsets of (bottom, center, top) relative to the bottom vehicle's
/// reference. The bottom sits at the center of the horizontal displacement.
std::array<Vec3, 3> formation_offsets(const Formation& f);

}  // namespace dwmpc
