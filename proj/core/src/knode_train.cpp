#include <cmath>
#include <limits>
#include <vector>

#include "dwmpc/knode.hpp"
#include "dwmpc/rigid_body.hpp"

namespace dwmpc {

namespace {

// ---------------------------------------------------------------------------
// Reverse-mode pieces for the hybrid dynamics
//   f(x) = f_nom(x, u) + [0; F(x)/mass; 0]
// with F the jet kernel plus the gated MLP residual, summed over sources.
// Inputs and neighbor snapshots are treated as exogenous constants.
// ---------------------------------------------------------------------------

struct StageTape {
  Vec10 x;                          // stage state (quaternion possibly non-unit)
  std::vector<int> active;          // indices of sources that passed the gates
  std::vector<Mlp::Tape> mlp_tapes;  // one per active source, when an mlp is used
};

Vec10 hybrid_deriv_taped(const Vec10& xv, const Vec4& uv,
                         const std::vector<std::pair<QuadState, double>>& sources,
                         const DwParams& dw, const Mlp* mlp, const QuadParams& params,
                         StageTape* tape) {
  const QuadState x = QuadState::from_vector(xv);
  const ControlInput u = ControlInput::from_vector(uv);
  Vec10 dx = f_nom(x, u, params);
  if (tape != nullptr) {
    tape->x = xv;
    tape->active.clear();
    tape->mlp_tapes.clear();
  }
  Vec3 force = Vec3::Zero();
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const auto& [src, thrust] = sources[s];
    if (!(src.p.z() > x.p.z())) continue;
    if ((src.p - x.p).norm() > dw.neighbor_range) continue;
    force += pairwise_dw_force(x, src, thrust, dw);
    if (mlp != nullptr) {
      const DwFeatures feat = make_dw_features(x, src, thrust, params);
      if (tape != nullptr) {
        Mlp::Tape t;
        force += mlp->forward(feat.values, t);
        tape->mlp_tapes.push_back(std::move(t));
      } else {
        force += mlp->forward(feat.values);
      }
    }
    if (tape != nullptr) tape->active.push_back(static_cast<int>(s));
  }
  dx.segment<3>(3) += force / params.mass;
  return dx;
}

// Accumulates J_f(x)^T lambda; mlp parameter gradients go into mlp_grad.
Vec10 hybrid_deriv_vjp(const StageTape& tape, const Vec4& uv,
                       const std::vector<std::pair<QuadState, double>>& sources,
                       const DwParams& dw, const Mlp* mlp, const QuadParams& params,
                       const Vec10& lambda, Mlp* mlp_grad) {
  const Vec3 lam_p = lambda.segment<3>(0);
  const Vec3 lam_v = lambda.segment<3>(3);
  const Vec4 lam_q = lambda.segment<4>(6);

  const Vec3 p = tape.x.segment<3>(0);
  const Vec4 q = tape.x.segment<4>(6);
  const double thrust = uv(0);
  const Vec3 omega = uv.segment<3>(1);

  Vec10 lam_x = Vec10::Zero();

  // pdot = v
  lam_x.segment<3>(3) += lam_p;

  // vdot thrust term: (thrust/mass) * third column of R(q/|q|).
  const double n = q.norm();
  const Vec4 qh = q / n;
  Eigen::Matrix<double, 3, 4> jr3;
  jr3 << 2.0 * qh(2), 2.0 * qh(3), 2.0 * qh(0), 2.0 * qh(1),
      -2.0 * qh(3), 2.0 * qh(2), 2.0 * qh(1), -2.0 * qh(0),
      -4.0 * qh(0), -4.0 * qh(1), 0.0, 0.0;
  const Vec4 lam_qh = (thrust / params.mass) * (jr3.transpose() * lam_v);
  lam_x.segment<4>(6) += (lam_qh - qh * qh.dot(lam_qh)) / n;

  // qdot = 0.5 * Omega(omega) q.
  Mat4 omega_mat;
  omega_mat << 0.0, omega.z(), -omega.y(), omega.x(),
      -omega.z(), 0.0, omega.x(), omega.y(),
      omega.y(), -omega.x(), 0.0, omega.z(),
      -omega.x(), -omega.y(), -omega.z(), 0.0;
  lam_x.segment<4>(6) += 0.5 * (omega_mat.transpose() * lam_q);

  // Interaction force terms.
  const Vec3 lam_force = lam_v / params.mass;
  std::size_t tape_idx = 0;
  for (int sidx : tape.active) {
    const auto& [src, src_thrust] = sources[static_cast<std::size_t>(sidx)];
    const double dz = src.p.z() - p.z();
    const double rho_sq = (src.p.head<2>() - p.head<2>()).squaredNorm();
    const double dzc = std::max(dz, dw.z_clamp);
    const double width = dw.core_width + dw.spread_rate * dzc;
    const double kern = dw_kernel(dz, rho_sq, src_thrust, dw);

    const double dk_ddzc =
        dz > dw.z_clamp ? kern * (-2.0 / dzc + rho_sq * dw.spread_rate / (width * width * width))
                        : 0.0;
    const double dk_drho2 = kern * (-0.5 / (width * width));
    const double lam_k = lam_force.z();
    lam_x(2) += lam_k * dk_ddzc * (-1.0);
    lam_x.segment<2>(0) += lam_k * dk_drho2 * 2.0 * (p.head<2>() - src.p.head<2>());

    if (mlp != nullptr) {
      VecX lam_feat = mlp->backward(tape.mlp_tapes[tape_idx++], lam_force, *mlp_grad);
      lam_x.segment<3>(0) -= lam_feat.segment<3>(0);
      lam_x.segment<3>(3) -= lam_feat.segment<3>(3);
      lam_x(5) += lam_feat(6);
    }
  }
  return lam_x;
}

struct StepTape {
  StageTape s1, s2, s3, s4;
  Vec4 q_pre;   // quaternion before renormalization
  double sign;  // sign applied by the qw >= 0 convention
};

Vec10 rk4_hybrid_step(const Vec10& xv, const Vec4& uv,
                      const std::vector<std::pair<QuadState, double>>& sources,
                      const DwParams& dw, const Mlp* mlp, const QuadParams& params, double dt,
                      StepTape* tape) {
  StageTape* t1 = tape ? &tape->s1 : nullptr;
  StageTape* t2 = tape ? &tape->s2 : nullptr;
  StageTape* t3 = tape ? &tape->s3 : nullptr;
  StageTape* t4 = tape ? &tape->s4 : nullptr;

  const Vec10 k1 = hybrid_deriv_taped(xv, uv, sources, dw, mlp, params, t1);
  const Vec10 x2 = xv + 0.5 * dt * k1;
  const Vec10 k2 = hybrid_deriv_taped(x2, uv, sources, dw, mlp, params, t2);
  const Vec10 x3 = xv + 0.5 * dt * k2;
  const Vec10 k3 = hybrid_deriv_taped(x3, uv, sources, dw, mlp, params, t3);
  const Vec10 x4 = xv + dt * k3;
  const Vec10 k4 = hybrid_deriv_taped(x4, uv, sources, dw, mlp, params, t4);

  Vec10 y = xv + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!y.allFinite()) throw IntegrationError("knode unroll: integration diverged");

  const Vec4 q_pre = y.segment<4>(6);
  Vec4 qn = q_pre / q_pre.norm();
  double sign = 1.0;
  if (qn(3) < 0.0) {
    qn = -qn;
    sign = -1.0;
  }
  y.segment<4>(6) = qn;
  if (tape != nullptr) {
    tape->q_pre = q_pre;
    tape->sign = sign;
  }
  return y;
}

Vec10 rk4_hybrid_step_vjp(const StepTape& tape, const Vec4& uv,
                          const std::vector<std::pair<QuadState, double>>& sources,
                          const DwParams& dw, const Mlp* mlp, const QuadParams& params, double dt,
                          const Vec10& lambda_out, Mlp* mlp_grad) {
  // Renormalization adjoint: q_out = sign * q_pre / |q_pre|.
  Vec10 lam_y = lambda_out;
  {
    const double n = tape.q_pre.norm();
    const Vec4 qh = tape.q_pre / n;
    const Vec4 lq = lambda_out.segment<4>(6);
    lam_y.segment<4>(6) = tape.sign * (lq - qh * qh.dot(lq)) / n;
  }

  const Vec10 lam_k4 = (dt / 6.0) * lam_y;
  const Vec10 lam_x4 = hybrid_deriv_vjp(tape.s4, uv, sources, dw, mlp, params, lam_k4, mlp_grad);
  const Vec10 lam_k3 = (dt / 3.0) * lam_y + dt * lam_x4;
  const Vec10 lam_x3 = hybrid_deriv_vjp(tape.s3, uv, sources, dw, mlp, params, lam_k3, mlp_grad);
  const Vec10 lam_k2 = (dt / 3.0) * lam_y + 0.5 * dt * lam_x3;
  const Vec10 lam_x2 = hybrid_deriv_vjp(tape.s2, uv, sources, dw, mlp, params, lam_k2, mlp_grad);
  const Vec10 lam_k1 = (dt / 6.0) * lam_y + 0.5 * dt * lam_x2;
  const Vec10 lam_x1 = hybrid_deriv_vjp(tape.s1, uv, sources, dw, mlp, params, lam_k1, mlp_grad);

  return lam_y + lam_x1 + lam_x2 + lam_x3 + lam_x4;
}

}  // namespace

void validate_training_set(const TrainingSet& data, int horizon) {
  if (horizon < 1) throw DimensionError("training set: horizon must be >= 1");
  for (std::size_t i = 0; i < data.segments.size(); ++i) {
    const auto& seg = data.segments[i];
    const std::string where = "training segment " + std::to_string(i);
    if (!(seg.dt > 0.0)) throw DimensionError(where + ": dt must be positive");
    if (seg.states.size() < static_cast<std::size_t>(horizon) + 1)
      throw DimensionError(where + ": needs at least horizon+1 samples");
    if (seg.inputs.size() + 1 != seg.states.size() || seg.neighbors.size() != seg.inputs.size())
      throw DimensionError(where + ": states/inputs/neighbors lengths inconsistent");
    for (const auto& s : seg.states)
      if (!s.allFinite()) throw InvalidStateError(where + ": non-finite state sample");
    for (const auto& u : seg.inputs)
      if (!u.allFinite()) throw InvalidStateError(where + ": non-finite input sample");
  }
}

double knode_loss(const TrainingSet& data, const Mlp& mlp, const DwParams& dw,
                  const QuadParams& params, int horizon, Mlp* grad) {
  validate_training_set(data, horizon);
  const int h = horizon;
  std::size_t count = 0;
  for (const auto& seg : data.segments) {
    (void)seg;
    count += static_cast<std::size_t>(h) * 6;
  }
  if (count == 0) throw DimensionError("knode_loss: empty training set");
  const double inv_m = 1.0 / static_cast<double>(count);

  double loss = 0.0;
  std::vector<StepTape> tapes(static_cast<std::size_t>(h));
  std::vector<Vec10> pred(static_cast<std::size_t>(h) + 1);

  for (const auto& seg : data.segments) {
    pred[0] = seg.states[0];
    for (int j = 0; j < h; ++j) {
      pred[j + 1] = rk4_hybrid_step(pred[j], seg.inputs[j], seg.neighbors[j], dw, &mlp, params,
                                    seg.dt, grad ? &tapes[j] : nullptr);
      const Vec10 err = pred[j + 1] - seg.states[j + 1];
      loss += inv_m * err.segment<6>(0).squaredNorm();
    }
    if (grad != nullptr) {
      Vec10 lambda = Vec10::Zero();
      for (int j = h; j >= 1; --j) {
        const Vec10 err = pred[j] - seg.states[j];
        lambda.segment<6>(0) += 2.0 * inv_m * err.segment<6>(0);
        lambda = rk4_hybrid_step_vjp(tapes[j - 1], seg.inputs[j - 1], seg.neighbors[j - 1], dw,
                                     &mlp, params, seg.dt, lambda, grad);
      }
    }
  }
  return loss;
}

TrainResult train_knode(const TrainingSet& data, const Mlp& init, const DwParams& dw,
                        const QuadParams& params, const TrainConfig& config) {
  if (data.segments.empty()) throw DimensionError("train_knode: empty training set");
  TrainResult result;
  result.mlp = init;
  result.loss_history.reserve(static_cast<std::size_t>(config.epochs) + 1);

  Mlp velocity(init.layer_sizes());
  velocity.set_zero();

  Mlp last_finite = init;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    Mlp grad(init.layer_sizes());
    grad.set_zero();
    double loss;
    try {
      loss = knode_loss(data, result.mlp, dw, params, config.horizon, &grad);
    } catch (const IntegrationError&) {
      loss = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(loss) || !grad.finite()) {
      result.mlp = last_finite;
      result.status = TrainStatus::kDiverged;
      return result;
    }
    result.loss_history.push_back(loss);
    last_finite = result.mlp;

    velocity.scale(config.momentum);
    velocity.add_scaled(grad, -config.learning_rate);
    result.mlp.add_scaled(velocity, 1.0);
    if (!result.mlp.finite()) {
      result.mlp = last_finite;
      result.status = TrainStatus::kDiverged;
      return result;
    }
  }
  try {
    result.loss_history.push_back(knode_loss(data, result.mlp, dw, params, config.horizon));
  } catch (const IntegrationError&) {
    result.mlp = last_finite;
    result.status = TrainStatus::kDiverged;
  }
  return result;
}

double multistep_velocity_rmse(const TrainingSet& data, const Mlp* mlp, const DwParams& dw,
                               const QuadParams& params, int horizon) {
  validate_training_set(data, horizon);
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (const auto& seg : data.segments) {
    Vec10 x = seg.states[0];
    for (int j = 0; j < horizon; ++j) {
      x = rk4_hybrid_step(x, seg.inputs[j], seg.neighbors[j], dw, mlp, params, seg.dt, nullptr);
      sum_sq += (x.segment<3>(3) - seg.states[j + 1].segment<3>(3)).squaredNorm();
      count += 3;
    }
  }
  return std::sqrt(sum_sq / static_cast<double>(count));
}

}  // namespace dwmpc
