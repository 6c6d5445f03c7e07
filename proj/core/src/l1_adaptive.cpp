#include "dwmpc/l1_adaptive.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "dwmpc/matrix_exp.hpp"
#include "dwmpc/rigid_body.hpp"

namespace dwmpc {

void L1Config::validate() const {
  if (!(period > 0.0)) throw ConfigError("l1 config: period must be positive");
  if (!(lpf_cutoff > 0.0)) throw ConfigError("l1 config: lpf_cutoff must be positive");
  if (!error_dynamics.allFinite()) throw ConfigError("l1 config: error dynamics must be finite");
  const Eigen::EigenSolver<Mat3> eig(error_dynamics);
  for (int i = 0; i < 3; ++i) {
    if (!(eig.eigenvalues()(i).real() < 0.0))
      throw ConfigError("l1 config: error dynamics matrix must be Hurwitz");
  }
}

Vec3 adaptation_law(const Vec3& z, const Vec3& z_hat, const L1Config& config) {
  const Mat3 expm = matrix_exp(config.error_dynamics * config.period);
  const Mat3 phi = expm - Mat3::Identity();
  const Eigen::FullPivLU<Mat3> lu(phi);
  if (!lu.isInvertible())
    throw ConfigError("adaptation_law: e^{AT} - I is singular (A not Hurwitz or T = 0)");
  return lu.solve(config.error_dynamics * (expm * (z - z_hat)));
}

Vec3 lpf_step(const Vec3& u_prev, const Vec3& sigma_hat, const L1Config& config) {
  const double decay = std::exp(-config.lpf_cutoff * config.period);
  return (u_prev + sigma_hat) * decay - sigma_hat;
}

Vec10 compose_f_sigma(const Vec3& u_sigma, L1Config::CompensationSign sign) {
  Vec10 f = Vec10::Zero();
  f.segment<3>(3) = sign == L1Config::CompensationSign::kAsPrinted ? u_sigma : -u_sigma;
  return f;
}

void predictor_step(L1State& l1, const Vec3& v_measured, const Vec4& attitude,
                    const Vec3& model_force, const L1Config& config, const QuadParams& params) {
  // Every right-hand-side term, including the error correction
  // A (zhat - z), is sampled at the tick and held over the period. The
  // derivative is then constant, so the RK4 stages coincide and the update is
  // exact; holding the correction keeps the piecewise-constant law's
  // fixed point at sigma_hat + A e = d for a constant disturbance d.
  const Vec3 b_thrust = quat_to_rotation(attitude).col(2) * (l1.thrust_prev / params.mass);
  const Vec3 deriv = -params.gravity + model_force / params.mass + b_thrust + l1.sigma_hat +
                     config.error_dynamics * (l1.z_hat - v_measured);
  // RK4 over a held derivative: all four stages coincide.
  const Vec3 next = l1.z_hat + config.period * deriv;

  if (!next.allFinite()) {
    l1.z_hat = v_measured;
    l1.sigma_hat = Vec3::Zero();
    l1.was_reset = true;
    return;
  }
  l1.z_hat = next;
  l1.was_reset = false;
}

}  // namespace dwmpc
