#include "dwmpc/rigid_body.hpp"

#include <cmath>

namespace dwmpc {

void QuadParams::validate() const {
  if (!(mass > 0.0)) throw ConfigError("quad params: mass must be positive");
  if (!(diameter > 0.0)) throw ConfigError("quad params: diameter must be positive");
  if (!gravity.allFinite()) throw ConfigError("quad params: gravity must be finite");
  if (!(thrust_max > hover_thrust()))
    throw ConfigError("quad params: thrust_max must exceed hover thrust");
  if (!(rate_max > 0.0)) throw ConfigError("quad params: rate_max must be positive");
}

Mat3x4 g_matrix(const Vec4& q) {
  const double qx = q(0), qy = q(1), qz = q(2), qw = q(3);
  Mat3x4 g;
  g << qw, qz, -qy, -qx,
      -qz, qw, qx, -qy,
      qy, -qx, qw, -qz;
  return g;
}

Mat3 quat_to_rotation(const Vec4& q) {
  const double n = q.norm();
  if (!(n > 0.5) || !q.allFinite())
    throw InvalidStateError("quat_to_rotation: quaternion is near zero or non-finite");
  const Vec4 u = q / n;
  const double x = u(0), y = u(1), z = u(2), w = u(3);
  Mat3 r;
  r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w),
      2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w),
      2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y);
  return r;
}

Vec4 quat_normalized(const Vec4& q) {
  const double n = q.norm();
  if (!(n > 1e-12) || !q.allFinite())
    throw InvalidStateError("quat_normalized: quaternion is near zero or non-finite");
  Vec4 u = q / n;
  if (u(3) < 0.0) u = -u;
  return u;
}

Vec10 f_nom(const QuadState& x, const ControlInput& u, const QuadParams& params) {
  if (!x.finite()) throw InvalidStateError("f_nom: non-finite state component");
  if (!u.finite()) throw InvalidStateError("f_nom: non-finite input component");

  const Mat3 r = quat_to_rotation(x.q);
  Vec10 dx;
  dx.segment<3>(0) = x.v;
  dx.segment<3>(3) = -params.gravity + (u.thrust / params.mass) * r.col(2);
  dx.segment<4>(6) = 0.5 * (g_matrix(x.q).transpose() * u.omega);
  return dx;
}

namespace detail {

void check_rk4_inputs(const QuadState& x, const ControlInput& u, double dt) {
  if (!(dt > 0.0)) throw IntegrationError("rk4_step: dt must be positive");
  if (!x.finite() || !u.finite())
    throw InvalidStateError("rk4_step: non-finite state or input");
}

QuadState finish_rk4(const Vec10& x0, const Vec10& k1, const Vec10& k2, const Vec10& k3,
                     const Vec10& k4, double dt) {
  const Vec10 x1 = x0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!x1.allFinite()) throw IntegrationError("rk4_step: integration diverged");
  QuadState out = QuadState::from_vector(x1);
  out.q = quat_normalized(out.q);
  return out;
}

}  // namespace detail

QuadState rk4_step_nominal(const QuadState& x, const ControlInput& u, const QuadParams& params,
                           double dt) {
  return rk4_step([&params](const QuadState& s, const ControlInput& c) { return f_nom(s, c, params); },
                  x, u, dt);
}

}  // namespace dwmpc
