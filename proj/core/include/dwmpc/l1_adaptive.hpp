#pragma once

#include "dwmpc/errors.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

/// L1 adaptive module configuration. The error dynamics matrix must be
/// Hurwitz; the compensation sign selects how the filtered term enters the
/// MPC prediction model (the low-pass recursion settles at minus the residual
/// estimate, so kNegated feeds the estimate itself to the model).
struct L1Config {
  Mat3 error_dynamics{-10.0 * Mat3::Identity()};  // A [1/s]
  double lpf_cutoff{40.0};                        // [1/s]
  double period{0.005};                           // s, adaptation sample period

  enum class CompensationSign { kAsPrinted, kNegated };
  CompensationSign sign{CompensationSign::kNegated};

  void validate() const;
};

/// Per-vehicle estimator state.
struct L1State {
  Vec3 z_hat{Vec3::Zero()};      // predicted velocity [m/s]
  Vec3 sigma_hat{Vec3::Zero()};  // residual acceleration estimate [m/s^2]
  Vec3 u_sigma{Vec3::Zero()};    // filtered compensation [m/s^2]
  double thrust_prev{0.0};       // previously commanded thrust [N]
  bool was_reset{false};         // predictor hit non-finite values and re-anchored
};

/// Piecewise-constant adaptation law:
///   sigma_hat = (e^{AT} - I)^{-1} A e^{AT} (z - z_hat)
/// Raises ConfigError when e^{AT} - I is numerically singular.
Vec3 adaptation_law(const Vec3& z, const Vec3& z_hat, const L1Config& config);

/// Low-pass recursion U_k = (U_{k-1} + sigma_hat) e^{-alpha T} - sigma_hat.
/// With constant input it converges to -sigma_hat at geometric rate e^{-alpha T}.
Vec3 lpf_step(const Vec3& u_prev, const Vec3& sigma_hat, const L1Config& config);

/// Embeds the compensation into the 10-dimensional state derivative: zeros
/// except the velocity rows, signed per the config convention.
Vec10 compose_f_sigma(const Vec3& u_sigma, L1Config::CompensationSign sign);

/// Advances the velocity predictor one period with RK4:
///   zhat_dot = -gravity + model_force/mass + (R(q) e3 / mass) * thrust_prev
///              + sigma_hat + A (zhat - z)
/// Measured velocity, attitude, model force and inputs are held over the
/// step. A non-finite result re-anchors the predictor (zhat <- z,
/// sigma_hat <- 0) and sets was_reset.
void predictor_step(L1State& l1, const Vec3& v_measured, const Vec4& attitude,
                    const Vec3& model_force, const L1Config& config, const QuadParams& params);

}  // namespace dwmpc
