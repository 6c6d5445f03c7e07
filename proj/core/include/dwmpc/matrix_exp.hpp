#pragma once

#include "dwmpc/types.hpp"

namespace dwmpc {

/// Matrix exponential of a 3x3 matrix by scaling-and-squaring with a [6/6]
/// Pade approximant. Accurate to ~1e-14 for norms of practical size.
Mat3 matrix_exp(const Mat3& a);

}  // namespace dwmpc
