#pragma once

#include <limits>
#include <vector>

#include "dwmpc/prediction_model.hpp"
#include "dwmpc/qp.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

/// Weights and limits of the receding-horizon problem. Input weights act on
/// mass-normalized thrust [m/s^2] and raw body rates so the same numbers work
/// across vehicle masses. State boxes are soft (L1 slack penalty); input
/// boxes are hard and come from QuadParams.
struct OcpConfig {
  int horizon{20};
  double period{0.02};  // s, prediction grid (can be coarser than the control rate)
  Mat10 state_weight{make_default_state_weight()};
  Mat4 input_weight{make_default_input_weight()};
  Mat10 terminal_weight{5.0 * make_default_state_weight()};
  Vec10 state_lower{Vec10::Constant(-std::numeric_limits<double>::infinity())};
  Vec10 state_upper{Vec10::Constant(std::numeric_limits<double>::infinity())};
  double soft_penalty{1e3};
  double soft_quad{1e-6};
  int qp_max_iterations{300};

  static Mat10 make_default_state_weight() {
    Vec10 d;
    d << 40, 40, 40, 4, 4, 4, 8, 8, 8, 8;
    return d.asDiagonal();
  }
  static Mat4 make_default_input_weight() {
    return Vec4{0.6, 0.2, 0.2, 0.2}.asDiagonal();
  }

  void validate() const;
};

/// Reference window for one solve: N+1 states and N inputs (thrust in
/// Newtons; rates). The tracked attitude is normally identity.
struct RefWindow {
  std::vector<Vec10> x;  // horizon + 1
  std::vector<Vec4> u;   // horizon
};

/// LTV approximation of one prediction interval:
///   x_{j+1} ~= a x_j + b u_j + c   (u in Newtons/rate units)
struct LtvStep {
  Mat10 a;
  Mat10x4 b;
  Vec10 c;
};

/// Jacobians of the RK4-discretized prediction model along the nominal
/// trajectory, by forward differences with step 1e-6. Neighbor states and
/// the compensation term inside `model` stay frozen. Raises on non-finite
/// entries.
std::vector<LtvStep> discretize_and_linearize(const PredictionModel& model,
                                              const std::vector<QuadState>& nominal_states,
                                              const std::vector<ControlInput>& nominal_inputs,
                                              const OcpConfig& config, const QuadParams& params);

/// Condensed QP over stacked mass-normalized inputs (plus one slack variable
/// per finite state-bound row). `initial` is a row-feasible starting point
/// for the solver.
struct CondensedQp {
  QpProblem qp;
  VecX initial;
  int num_inputs{0};  // leading decision variables, 4 * horizon
};

CondensedQp condense(const std::vector<LtvStep>& ltv, const Vec10& x0, const RefWindow& ref,
                     const std::vector<ControlInput>& nominal_inputs, const OcpConfig& config,
                     const QuadParams& params);

struct MpcSolution {
  std::vector<ControlInput> inputs;  // horizon entries, all inside the input box
  std::vector<Vec10> states;         // horizon+1 predicted states (LTV rollout)
  ControlInput first;                // the input to execute
  double kkt_residual{0.0};
  QpStatus qp_status{QpStatus::kOptimal};
  int qp_iterations{0};
  int active_set_size{0};
  bool degraded{false};  // solver failed; `first` repeats the previous input
};

/// One vehicle's receding-horizon controller: a single SQP iteration per call
/// with warm-started trajectory and working set. Calls may come faster than
/// the prediction grid; the nominal trajectory shifts by however many whole
/// grid intervals have elapsed since the previous call.
class MpcController {
 public:
  MpcController(OcpConfig config, QuadParams params);

  /// One real-time iteration at time t around the given model snapshot. Never
  /// throws on solver trouble mid-flight; a degraded solution repeats the
  /// last input.
  MpcSolution step(double t, const QuadState& state, const RefWindow& ref,
                   const PredictionModel& model);

  void reset();
  const OcpConfig& config() const { return config_; }

 private:
  OcpConfig config_;
  QuadParams params_;
  bool warm_{false};
  double grid_base_time_{0.0};
  std::vector<QuadState> nominal_states_;
  std::vector<ControlInput> nominal_inputs_;
  QpWarmStart qp_warm_;
  ControlInput last_input_;
};

}  // namespace dwmpc
