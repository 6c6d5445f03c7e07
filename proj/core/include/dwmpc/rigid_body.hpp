#pragma once

#include <utility>

#include "dwmpc/errors.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

/// The 3x4 matrix G(q) mapping body rates to quaternion derivatives via
/// qdot = 0.5 * G(q)^T * omega. Linear in q; every row is orthogonal to q.
Mat3x4 g_matrix(const Vec4& q);

/// Body->world rotation matrix. The quaternion is normalized internally;
/// a near-zero quaternion raises InvalidStateError.
Mat3 quat_to_rotation(const Vec4& q);

/// Renormalizes to unit length and flips the sign so qw >= 0. The sign
/// convention keeps componentwise quaternion errors well defined.
Vec4 quat_normalized(const Vec4& q);

/// Nominal quadrotor dynamics:
///   pdot = v
///   vdot = -gravity + (thrust / mass) * R(q) e3
///   qdot = 0.5 * G(q)^T * omega
/// Raises InvalidStateError on non-finite state or input components.
Vec10 f_nom(const QuadState& x, const ControlInput& u, const QuadParams& params);

namespace detail {
void check_rk4_inputs(const QuadState& x, const ControlInput& u, double dt);
QuadState finish_rk4(const Vec10& x0, const Vec10& k1, const Vec10& k2, const Vec10& k3,
                     const Vec10& k4, double dt);
}  // namespace detail

/// One classical RK4 step with zero-order-hold input. The quaternion is
/// renormalized (and sign-fixed) after the step. `f` is any callable
/// (QuadState, ControlInput) -> Vec10. Raises IntegrationError when an
/// intermediate value goes non-finite.
template <typename F>
QuadState rk4_step(F&& f, const QuadState& x, const ControlInput& u, double dt) {
  detail::check_rk4_inputs(x, u, dt);
  const Vec10 x0 = x.to_vector();
  const Vec10 k1 = f(x, u);
  const Vec10 k2 = f(QuadState::from_vector(x0 + 0.5 * dt * k1), u);
  const Vec10 k3 = f(QuadState::from_vector(x0 + 0.5 * dt * k2), u);
  const Vec10 k4 = f(QuadState::from_vector(x0 + dt * k3), u);
  return detail::finish_rk4(x0, k1, k2, k3, k4, dt);
}

/// RK4 step of the nominal dynamics.
QuadState rk4_step_nominal(const QuadState& x, const ControlInput& u, const QuadParams& params,
                           double dt);

}  // namespace dwmpc
