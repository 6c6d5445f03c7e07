#pragma once

#include <cstdint>
#include <vector>

#include "dwmpc/errors.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

/// Dense convex QP:  min 0.5 x^T H x + h^T x
///                   s.t. lower <= x <= upper,  ineq_a x <= ineq_b.
/// H must be symmetric positive definite on the feasible subspace (the MPC
/// condenser guarantees this by construction).
struct QpProblem {
  MatX hessian;
  VecX gradient;
  VecX lower;
  VecX upper;
  MatX ineq_a;  // may have zero rows
  VecX ineq_b;

  int num_variables() const { return static_cast<int>(gradient.size()); }
  int num_rows() const { return static_cast<int>(ineq_b.size()); }
  void validate() const;
};

enum class QpStatus { kOptimal, kMaxIterations, kInfeasible };

struct QpSolution {
  VecX x;
  VecX row_multipliers;       // one per general row, >= 0 when active
  QpStatus status{QpStatus::kOptimal};
  double stationarity{0.0};   // inf-norm of the free-variable gradient
  double primal_feasibility{0.0};
  double complementarity{0.0};
  int iterations{0};
  int active_set_size{0};
};

/// Working-set memory carried between consecutive solves of related QPs.
struct QpWarmStart {
  std::vector<std::int8_t> bound_state;  // -1 at lower, 0 free, +1 at upper
  std::vector<std::uint8_t> row_active;
  bool valid{false};
};

/// Primal active-set solver with dual optimality checks. Deterministic: all
/// scans run in index order and ties are broken by the lowest index. When
/// general rows are present the initial point (warm start or zero) must
/// satisfy them; the MPC condenser arranges this via its slack variables.
/// `initial` optionally overrides the starting point.
QpSolution solve_qp(const QpProblem& problem, QpWarmStart* warm = nullptr,
                    const VecX* initial = nullptr, int max_iterations = 0);

}  // namespace dwmpc
