#include "dwmpc/ocp.hpp"

#include <algorithm>
#include <cmath>

#include "dwmpc/rigid_body.hpp"

namespace dwmpc {

namespace {

constexpr double kFdStep = 1e-6;

Vec10 rk4_model_map(const PredictionModel& model, const Vec10& xv, const Vec4& uv,
                    const QuadParams& params, double dt, double tau) {
  // Neighbor snapshots are held within one grid interval and coast between
  // intervals (tau = j * period for stage j).
  const QuadState x = QuadState::from_vector(xv);
  const ControlInput u = ControlInput::from_vector(uv);
  return rk4_step(
             [&](const QuadState& s, const ControlInput& c) { return model.deriv(s, c, params, tau); },
             x, u, dt)
      .to_vector();
}

bool is_finite_bound(double v) { return std::isfinite(v); }

}  // namespace

void OcpConfig::validate() const {
  if (horizon < 1) throw ConfigError("ocp config: horizon must be >= 1");
  if (!(period > 0.0)) throw ConfigError("ocp config: period must be positive");
  if (!state_weight.isApprox(state_weight.transpose(), 1e-12) ||
      !terminal_weight.isApprox(terminal_weight.transpose(), 1e-12) ||
      !input_weight.isApprox(input_weight.transpose(), 1e-12))
    throw ConfigError("ocp config: weight matrices must be symmetric");
  const Eigen::SelfAdjointEigenSolver<Mat10> qe(state_weight);
  const Eigen::SelfAdjointEigenSolver<Mat10> pe(terminal_weight);
  const Eigen::SelfAdjointEigenSolver<Mat4> re(input_weight);
  if (qe.eigenvalues().minCoeff() < -1e-10 || pe.eigenvalues().minCoeff() < -1e-10)
    throw ConfigError("ocp config: state/terminal weights must be positive semidefinite");
  if (re.eigenvalues().minCoeff() <= 0.0)
    throw ConfigError("ocp config: input weight must be positive definite");
  for (int i = 0; i < 10; ++i)
    if (!(state_lower(i) <= state_upper(i)))
      throw ConfigError("ocp config: state box is empty");
  if (!(soft_penalty > 0.0) || soft_quad < 0.0)
    throw ConfigError("ocp config: soft-constraint weights must be positive");
}

std::vector<LtvStep> discretize_and_linearize(const PredictionModel& model,
                                              const std::vector<QuadState>& nominal_states,
                                              const std::vector<ControlInput>& nominal_inputs,
                                              const OcpConfig& config, const QuadParams& params) {
  const int n = config.horizon;
  if (nominal_states.size() != static_cast<std::size_t>(n) + 1 ||
      nominal_inputs.size() != static_cast<std::size_t>(n))
    throw DimensionError("discretize_and_linearize: trajectory length mismatch");

  std::vector<LtvStep> ltv(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double tau = j * config.period;
    const Vec10 xbar = nominal_states[static_cast<std::size_t>(j)].to_vector();
    const Vec4 ubar = nominal_inputs[static_cast<std::size_t>(j)].to_vector();
    const Vec10 base = rk4_model_map(model, xbar, ubar, params, config.period, tau);

    LtvStep step;
    for (int i = 0; i < 10; ++i) {
      Vec10 xp = xbar;
      xp(i) += kFdStep;
      step.a.col(i) = (rk4_model_map(model, xp, ubar, params, config.period, tau) - base) / kFdStep;
    }
    for (int i = 0; i < 4; ++i) {
      Vec4 up = ubar;
      up(i) += kFdStep;
      step.b.col(i) = (rk4_model_map(model, xbar, up, params, config.period, tau) - base) / kFdStep;
    }
    step.c = base - step.a * xbar - step.b * ubar;
    if (!step.a.allFinite() || !step.b.allFinite() || !step.c.allFinite())
      throw IntegrationError("discretize_and_linearize: non-finite Jacobian entries");
    ltv[static_cast<std::size_t>(j)] = step;
  }
  return ltv;
}

CondensedQp condense(const std::vector<LtvStep>& ltv, const Vec10& x0, const RefWindow& ref,
                     const std::vector<ControlInput>& nominal_inputs, const OcpConfig& config,
                     const QuadParams& params) {
  const int n = config.horizon;
  if (ltv.size() != static_cast<std::size_t>(n))
    throw DimensionError("condense: LTV length mismatch");
  if (ref.x.size() != static_cast<std::size_t>(n) + 1 || ref.u.size() != static_cast<std::size_t>(n))
    throw DimensionError("condense: reference window length mismatch");
  if (nominal_inputs.size() != static_cast<std::size_t>(n))
    throw DimensionError("condense: nominal input length mismatch");

  // Inputs enter the QP mass-normalized: u = S nu with S = diag(mass, 1, 1, 1).
  const double mass = params.mass;
  const Vec4 scale{mass, 1.0, 1.0, 1.0};

  // Affine state prediction x_j = m_j + sum_l s[j][l] nu_l.
  std::vector<Vec10> m(static_cast<std::size_t>(n) + 1);
  std::vector<std::vector<Mat10x4>> s(static_cast<std::size_t>(n) + 1);
  m[0] = x0;
  for (int j = 0; j < n; ++j) {
    const auto& step = ltv[static_cast<std::size_t>(j)];
    m[static_cast<std::size_t>(j) + 1] = step.a * m[static_cast<std::size_t>(j)] + step.c;
    s[static_cast<std::size_t>(j) + 1].resize(static_cast<std::size_t>(j) + 1);
    for (int l = 0; l < j; ++l)
      s[static_cast<std::size_t>(j) + 1][static_cast<std::size_t>(l)] =
          step.a * s[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
    s[static_cast<std::size_t>(j) + 1][static_cast<std::size_t>(j)] =
        step.b * scale.asDiagonal();
  }

  // Count soft state-constraint rows: two per finite bound per step j=1..n.
  std::vector<int> soft_dims;
  for (int d = 0; d < 10; ++d)
    if (is_finite_bound(config.state_lower(d)) || is_finite_bound(config.state_upper(d)))
      soft_dims.push_back(d);
  int rows = 0;
  for (int d : soft_dims) {
    if (is_finite_bound(config.state_lower(d))) rows += n;
    if (is_finite_bound(config.state_upper(d))) rows += n;
  }

  const int nu = 4 * n;
  const int nv = nu + rows;  // one slack per row

  CondensedQp out;
  out.num_inputs = nu;
  out.qp.hessian = MatX::Zero(nv, nv);
  out.qp.gradient = VecX::Zero(nv);
  out.qp.lower = VecX::Constant(nv, -std::numeric_limits<double>::infinity());
  out.qp.upper = VecX::Constant(nv, std::numeric_limits<double>::infinity());
  out.qp.ineq_a = MatX::Zero(rows, nv);
  out.qp.ineq_b = VecX::Zero(rows);

  // Quadratic cost: H = Psi^T Qbar Psi + Rbar, h = Psi^T Qbar (m - xref) - Rbar nuref.
  // Predicted states x_1..x_N carry the stage weight; the last also carries
  // the terminal weight. The fixed x_0 term is constant and dropped.
  for (int j = 1; j <= n; ++j) {
    const Mat10 qj = j == n ? Mat10(config.state_weight + config.terminal_weight)
                            : config.state_weight;
    const Vec10 err = m[static_cast<std::size_t>(j)] - ref.x[static_cast<std::size_t>(j)];
    const Vec10 qerr = qj * err;
    for (int l = 0; l < j; ++l) {
      const Mat10x4& sl = s[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)];
      const Mat10x4 qs = qj * sl;
      out.qp.gradient.segment<4>(4 * l) += sl.transpose() * qerr;
      for (int l2 = l; l2 < j; ++l2) {
        out.qp.hessian.block<4, 4>(4 * l, 4 * l2) +=
            qs.transpose() * s[static_cast<std::size_t>(j)][static_cast<std::size_t>(l2)];
      }
    }
  }
  for (int l = 0; l < n; ++l) {
    out.qp.hessian.block<4, 4>(4 * l, 4 * l) += config.input_weight;
    const Vec4 nuref = ref.u[static_cast<std::size_t>(l)].cwiseQuotient(scale);
    out.qp.gradient.segment<4>(4 * l) -= config.input_weight * nuref;
  }
  // Mirror the upper triangle.
  for (int a = 0; a < nu; ++a)
    for (int b = a + 1; b < nu; ++b) out.qp.hessian(b, a) = out.qp.hessian(a, b);

  // Hard input boxes in normalized units.
  for (int l = 0; l < n; ++l) {
    out.qp.lower(4 * l + 0) = 0.0;
    out.qp.upper(4 * l + 0) = params.thrust_max / mass;
    for (int i = 1; i < 4; ++i) {
      out.qp.lower(4 * l + i) = -params.rate_max;
      out.qp.upper(4 * l + i) = params.rate_max;
    }
  }

  // Initial point: previous (shifted) inputs, clamped by the solver.
  out.initial = VecX::Zero(nv);
  for (int l = 0; l < n; ++l)
    out.initial.segment<4>(4 * l) =
        nominal_inputs[static_cast<std::size_t>(l)].to_vector().cwiseQuotient(scale);

  // Soft state rows:  +/- x_j(d) - slack <= bound. Slack cost is an exact L1
  // penalty with a small quadratic term keeping the Hessian positive definite.
  int row = 0;
  for (int j = 1; j <= n; ++j) {
    for (int d : soft_dims) {
      for (int side = 0; side < 2; ++side) {
        const bool upper_side = side == 0;
        const double bound =
            upper_side ? config.state_upper(d) : config.state_lower(d);
        if (!is_finite_bound(bound)) continue;
        const double sgn = upper_side ? 1.0 : -1.0;
        const int slack = nu + row;
        for (int l = 0; l < j; ++l)
          out.qp.ineq_a.block<1, 4>(row, 4 * l) =
              sgn * s[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)].row(d);
        out.qp.ineq_a(row, slack) = -1.0;
        out.qp.ineq_b(row) = sgn * bound - sgn * m[static_cast<std::size_t>(j)](d);
        out.qp.lower(slack) = 0.0;
        out.qp.hessian(slack, slack) = config.soft_quad;
        out.qp.gradient(slack) = config.soft_penalty;
        ++row;
      }
    }
  }

  // Lift slacks so the initial point satisfies every row.
  if (rows > 0) {
    const VecX viol = out.qp.ineq_a.leftCols(nu) * out.initial.head(nu) - out.qp.ineq_b;
    for (int r = 0; r < rows; ++r) out.initial(nu + r) = std::max(0.0, viol(r));
  }
  return out;
}

MpcController::MpcController(OcpConfig config, QuadParams params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
  params_.validate();
  last_input_ = ControlInput{params_.hover_thrust(), Vec3::Zero()};
}

void MpcController::reset() {
  warm_ = false;
  qp_warm_ = QpWarmStart{};
  last_input_ = ControlInput{params_.hover_thrust(), Vec3::Zero()};
}

MpcSolution MpcController::step(double t, const QuadState& state, const RefWindow& ref,
                                const PredictionModel& model) {
  const int n = config_.horizon;
  if (ref.x.size() != static_cast<std::size_t>(n) + 1 || ref.u.size() != static_cast<std::size_t>(n))
    throw DimensionError("mpc step: reference window must span horizon+1 states");
  if (!state.finite()) throw InvalidStateError("mpc step: non-finite measured state");

  if (!warm_) {
    grid_base_time_ = t;
    nominal_states_.resize(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j)
      nominal_states_[static_cast<std::size_t>(j)] =
          QuadState::from_vector(ref.x[static_cast<std::size_t>(j)]);
    nominal_inputs_.assign(static_cast<std::size_t>(n),
                           ControlInput{params_.hover_thrust(), Vec3::Zero()});
  } else {
    // Shift by however many whole grid intervals have passed, repeating the
    // tail. Calls faster than the grid keep the previous solution in place.
    int shift = static_cast<int>(std::floor((t - grid_base_time_) / config_.period + 1e-9));
    shift = std::clamp(shift, 0, n);
    grid_base_time_ += shift * config_.period;
    for (int j = 0; j + shift <= n; ++j)
      nominal_states_[static_cast<std::size_t>(j)] =
          nominal_states_[static_cast<std::size_t>(j + shift)];
    for (int j = std::max(0, n - shift + 1); j <= n; ++j)
      nominal_states_[static_cast<std::size_t>(j)] = nominal_states_[static_cast<std::size_t>(n)];
    for (int j = 0; j + shift < n; ++j)
      nominal_inputs_[static_cast<std::size_t>(j)] =
          nominal_inputs_[static_cast<std::size_t>(j + shift)];
    for (int j = std::max(0, n - shift); j < n; ++j)
      nominal_inputs_[static_cast<std::size_t>(j)] =
          nominal_inputs_[static_cast<std::size_t>(n - 1)];
  }
  nominal_states_[0] = state;

  MpcSolution sol;
  try {
    // Equilibrium feedforward: the model's constant vertical acceleration
    // offset (compensation term plus interaction force at the measurement)
    // shifts the reference thrust, so the input cost does not fight the
    // compensation. Zero for the nominal model.
    RefWindow ref_ff = ref;
    const double a_off_z =
        model.f_sigma(5) + model.model_force(state, params_).z() / params_.mass;
    if (a_off_z != 0.0) {
      for (auto& u : ref_ff.u) u(0) -= params_.mass * a_off_z;
    }

    const auto ltv = discretize_and_linearize(model, nominal_states_, nominal_inputs_, config_, params_);
    CondensedQp cqp = condense(ltv, state.to_vector(), ref_ff, nominal_inputs_, config_, params_);
    const QpSolution qp_sol = solve_qp(cqp.qp, &qp_warm_, &cqp.initial, config_.qp_max_iterations);

    if (qp_sol.status == QpStatus::kInfeasible ||
        (qp_sol.status == QpStatus::kMaxIterations && qp_sol.primal_feasibility > 1e-6)) {
      sol.degraded = true;
      sol.qp_status = qp_sol.status;
      sol.first = last_input_;
      return sol;
    }

    const Vec4 scale{params_.mass, 1.0, 1.0, 1.0};
    sol.inputs.resize(static_cast<std::size_t>(n));
    for (int l = 0; l < n; ++l) {
      const Vec4 nu = qp_sol.x.segment<4>(4 * l);
      sol.inputs[static_cast<std::size_t>(l)] = ControlInput::from_vector(nu.cwiseProduct(scale));
    }
    sol.states.resize(static_cast<std::size_t>(n) + 1);
    sol.states[0] = state.to_vector();
    for (int j = 0; j < n; ++j) {
      const auto& step = ltv[static_cast<std::size_t>(j)];
      sol.states[static_cast<std::size_t>(j) + 1] =
          step.a * sol.states[static_cast<std::size_t>(j)] +
          step.b * sol.inputs[static_cast<std::size_t>(j)].to_vector() + step.c;
    }
    sol.kkt_residual =
        std::max({qp_sol.stationarity, qp_sol.primal_feasibility, qp_sol.complementarity});
    sol.qp_status = qp_sol.status;
    sol.qp_iterations = qp_sol.iterations;
    sol.active_set_size = qp_sol.active_set_size;
    sol.first = sol.inputs[0];

    // Refresh the warm start.
    for (int j = 0; j <= n; ++j)
      nominal_states_[static_cast<std::size_t>(j)] =
          QuadState::from_vector(sol.states[static_cast<std::size_t>(j)]);
    nominal_inputs_ = sol.inputs;
    warm_ = true;
    last_input_ = sol.first;
  } catch (const IntegrationError&) {
    sol.degraded = true;
    sol.first = last_input_;
    warm_ = false;
  } catch (const InvalidStateError&) {
    sol.degraded = true;
    sol.first = last_input_;
    warm_ = false;
  }
  return sol;
}

}  // namespace dwmpc
