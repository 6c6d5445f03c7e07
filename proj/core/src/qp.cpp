#include "dwmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

namespace dwmpc {

namespace {

constexpr double kFeasTol = 1e-10;
constexpr double kDualTol = 1e-10;

struct WorkingSet {
  std::vector<std::int8_t> bound;    // -1 lower, 0 free, +1 upper
  std::vector<std::uint8_t> row;     // 1 = treated as equality

  int active_count() const {
    int n = 0;
    for (auto b : bound) n += (b != 0);
    for (auto r : row) n += (r != 0);
    return n;
  }
};

struct EqpResult {
  VecX x;
  VecX row_lambda;  // multipliers of active rows in row-index order
  bool ok{false};
};

// Solves the equality-constrained QP defined by the working set: bound-fixed
// variables sit exactly at their bounds, active rows hold with equality.
EqpResult solve_eqp(const QpProblem& p, const WorkingSet& ws) {
  const int n = p.num_variables();
  const int m = p.num_rows();

  std::vector<int> free_idx;
  free_idx.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    if (ws.bound[static_cast<std::size_t>(i)] == 0) free_idx.push_back(i);
  std::vector<int> act_rows;
  for (int r = 0; r < m; ++r)
    if (ws.row[static_cast<std::size_t>(r)]) act_rows.push_back(r);

  const int nf = static_cast<int>(free_idx.size());
  const int na = static_cast<int>(act_rows.size());

  EqpResult out;
  out.x = VecX(n);
  for (int i = 0; i < n; ++i) {
    const auto b = ws.bound[static_cast<std::size_t>(i)];
    out.x(i) = b < 0 ? p.lower(i) : (b > 0 ? p.upper(i) : 0.0);
  }
  out.row_lambda = VecX::Zero(na);

  if (nf == 0) {
    out.ok = true;
    return out;
  }

  MatX hff(nf, nf);
  VecX rhs(nf);
  for (int a = 0; a < nf; ++a) {
    const int ia = free_idx[static_cast<std::size_t>(a)];
    double acc = p.gradient(ia);
    for (int i = 0; i < n; ++i) {
      const auto b = ws.bound[static_cast<std::size_t>(i)];
      if (b != 0) acc += p.hessian(ia, i) * out.x(i);
    }
    rhs(a) = -acc;
    for (int c = 0; c < nf; ++c) hff(a, c) = p.hessian(ia, free_idx[static_cast<std::size_t>(c)]);
  }

  Eigen::LLT<MatX> llt(hff);
  if (llt.info() != Eigen::Success) {
    // Tiny ridge for semidefinite corner cases.
    llt.compute(hff + 1e-12 * MatX::Identity(nf, nf));
    if (llt.info() != Eigen::Success) return out;
  }

  if (na == 0) {
    const VecX xf = llt.solve(rhs);
    for (int a = 0; a < nf; ++a) out.x(free_idx[static_cast<std::size_t>(a)]) = xf(a);
    out.ok = true;
    return out;
  }

  // Active general rows: Schur complement on the row multipliers.
  MatX gf(na, nf);
  VecX r2(na);
  for (int a = 0; a < na; ++a) {
    const int row = act_rows[static_cast<std::size_t>(a)];
    double fixed_part = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto b = ws.bound[static_cast<std::size_t>(i)];
      if (b != 0) fixed_part += p.ineq_a(row, i) * out.x(i);
    }
    r2(a) = p.ineq_b(row) - fixed_part;
    for (int c = 0; c < nf; ++c) gf(a, c) = p.ineq_a(row, free_idx[static_cast<std::size_t>(c)]);
  }

  const MatX hinv_gt = llt.solve(gf.transpose());
  const VecX hinv_rhs = llt.solve(rhs);
  MatX schur = gf * hinv_gt;
  schur.diagonal().array() += 1e-14;
  Eigen::LDLT<MatX> sldlt(schur);
  if (sldlt.info() != Eigen::Success) return out;
  const VecX lambda = sldlt.solve(gf * hinv_rhs - r2);
  const VecX xf = hinv_rhs - hinv_gt * lambda;

  for (int a = 0; a < nf; ++a) out.x(free_idx[static_cast<std::size_t>(a)]) = xf(a);
  out.row_lambda = lambda;
  out.ok = true;
  return out;
}

}  // namespace

void QpProblem::validate() const {
  const int n = num_variables();
  if (hessian.rows() != n || hessian.cols() != n)
    throw DimensionError("qp: hessian/gradient dimension mismatch");
  if (lower.size() != n || upper.size() != n)
    throw DimensionError("qp: bound dimension mismatch");
  if (ineq_a.rows() != ineq_b.size() || (ineq_a.rows() > 0 && ineq_a.cols() != n))
    throw DimensionError("qp: inequality row dimension mismatch");
  if (!hessian.allFinite() || !gradient.allFinite())
    throw InvalidStateError("qp: non-finite objective data");
}

QpSolution solve_qp(const QpProblem& p, QpWarmStart* warm, const VecX* initial,
                    int max_iterations) {
  p.validate();
  const int n = p.num_variables();
  const int m = p.num_rows();
  if (max_iterations <= 0) max_iterations = 6 * (n + m) + 20;

  QpSolution sol;
  sol.row_multipliers = VecX::Zero(m);

  // Bound-infeasible problems get a certificate instead of iteration.
  for (int i = 0; i < n; ++i) {
    if (p.lower(i) > p.upper(i)) {
      sol.status = QpStatus::kInfeasible;
      sol.x = VecX::Zero(n);
      sol.primal_feasibility = p.lower(i) - p.upper(i);
      return sol;
    }
  }

  WorkingSet ws;
  ws.bound.assign(static_cast<std::size_t>(n), 0);
  ws.row.assign(static_cast<std::size_t>(m), 0);
  if (warm != nullptr && warm->valid &&
      warm->bound_state.size() == static_cast<std::size_t>(n) &&
      warm->row_active.size() == static_cast<std::size_t>(m)) {
    ws.bound = warm->bound_state;
    ws.row = warm->row_active;
  }

  // Feasible starting point: clamp the initial guess into the boxes. Any
  // general rows must already hold there (see header contract).
  VecX x = initial != nullptr ? *initial : VecX::Zero(n);
  if (x.size() != n) throw DimensionError("qp: initial point dimension mismatch");
  for (int i = 0; i < n; ++i) x(i) = std::min(std::max(x(i), p.lower(i)), p.upper(i));
  if (m > 0) {
    const VecX viol = p.ineq_a * x - p.ineq_b;
    if (viol.size() > 0 && viol.maxCoeff() > 1e-7)
      throw InvalidStateError("qp: initial point violates general inequality rows");
  }
  // Working-set bounds must match the current point; stale flags pointing at
  // infinite bounds are dropped.
  for (int i = 0; i < n; ++i) {
    auto& b = ws.bound[static_cast<std::size_t>(i)];
    if (b < 0 && !std::isfinite(p.lower(i))) b = 0;
    if (b > 0 && !std::isfinite(p.upper(i))) b = 0;
    if (b < 0) x(i) = p.lower(i);
    if (b > 0) x(i) = p.upper(i);
  }
  for (int r = 0; r < m; ++r) {
    if (!ws.row[static_cast<std::size_t>(r)]) continue;
    // A warm-started row that no longer holds with equality is dropped.
    if (std::abs(p.ineq_a.row(r).dot(x) - p.ineq_b(r)) > 1e-9)
      ws.row[static_cast<std::size_t>(r)] = 0;
  }

  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    EqpResult eqp = solve_eqp(p, ws);
    if (!eqp.ok) break;

    // Blocking-constraint scan along x -> x*.
    const VecX dx = eqp.x - x;
    double alpha = 1.0;
    int block_kind = -1;  // 0 = lower bound, 1 = upper bound, 2 = row
    int block_index = -1;
    if (dx.lpNorm<Eigen::Infinity>() > 0.0) {
      for (int i = 0; i < n; ++i) {
        if (ws.bound[static_cast<std::size_t>(i)] != 0) continue;
        if (dx(i) > kFeasTol && std::isfinite(p.upper(i))) {
          const double a = (p.upper(i) - x(i)) / dx(i);
          if (a < alpha - 1e-14) { alpha = std::max(0.0, a); block_kind = 1; block_index = i; }
        } else if (dx(i) < -kFeasTol && std::isfinite(p.lower(i))) {
          const double a = (p.lower(i) - x(i)) / dx(i);
          if (a < alpha - 1e-14) { alpha = std::max(0.0, a); block_kind = 0; block_index = i; }
        }
      }
      for (int r = 0; r < m; ++r) {
        if (ws.row[static_cast<std::size_t>(r)]) continue;
        const double slope = p.ineq_a.row(r).dot(dx);
        if (slope > kFeasTol) {
          const double margin = p.ineq_b(r) - p.ineq_a.row(r).dot(x);
          const double a = margin / slope;
          if (a < alpha - 1e-14) { alpha = std::max(0.0, a); block_kind = 2; block_index = r; }
        }
      }
    }

    if (block_kind >= 0) {
      x += alpha * dx;
      if (block_kind == 2) {
        ws.row[static_cast<std::size_t>(block_index)] = 1;
      } else {
        ws.bound[static_cast<std::size_t>(block_index)] = block_kind == 0 ? -1 : 1;
        x(block_index) = block_kind == 0 ? p.lower(block_index) : p.upper(block_index);
      }
      continue;
    }

    // Candidate is feasible; check dual signs.
    x = eqp.x;
    VecX lam_full = VecX::Zero(m);
    {
      int a = 0;
      for (int r = 0; r < m; ++r)
        if (ws.row[static_cast<std::size_t>(r)]) lam_full(r) = eqp.row_lambda(a++);
    }
    VecX grad_full = p.hessian * x + p.gradient;
    if (m > 0) grad_full += p.ineq_a.transpose() * lam_full;

    double worst = -kDualTol;
    int worst_kind = -1, worst_index = -1;
    for (int i = 0; i < n; ++i) {
      const auto b = ws.bound[static_cast<std::size_t>(i)];
      if (b < 0 && grad_full(i) < worst) { worst = grad_full(i); worst_kind = 0; worst_index = i; }
      if (b > 0 && -grad_full(i) < worst) { worst = -grad_full(i); worst_kind = 1; worst_index = i; }
    }
    {
      int a = 0;
      for (int r = 0; r < m; ++r) {
        if (!ws.row[static_cast<std::size_t>(r)]) continue;
        if (eqp.row_lambda(a) < worst) { worst = eqp.row_lambda(a); worst_kind = 2; worst_index = r; }
        ++a;
      }
    }

    if (worst_kind < 0) {
      // Optimal: assemble multipliers and residuals.
      int a = 0;
      for (int r = 0; r < m; ++r)
        if (ws.row[static_cast<std::size_t>(r)]) sol.row_multipliers(r) = eqp.row_lambda(a++);
      sol.x = x;
      sol.status = QpStatus::kOptimal;
      sol.iterations = iter + 1;
      sol.active_set_size = ws.active_count();
      if (warm != nullptr) {
        warm->bound_state = ws.bound;
        warm->row_active = ws.row;
        warm->valid = true;
      }

      double stat = 0.0;
      for (int i = 0; i < n; ++i)
        if (ws.bound[static_cast<std::size_t>(i)] == 0) stat = std::max(stat, std::abs(grad_full(i)));
      sol.stationarity = stat;
      double feas = 0.0;
      for (int i = 0; i < n; ++i)
        feas = std::max({feas, p.lower(i) - x(i), x(i) - p.upper(i)});
      double compl_res = 0.0;
      for (int r = 0; r < m; ++r) {
        const double slack = p.ineq_b(r) - p.ineq_a.row(r).dot(x);
        feas = std::max(feas, -slack);
        compl_res = std::max(compl_res, std::abs(sol.row_multipliers(r) * slack));
      }
      sol.primal_feasibility = std::max(feas, 0.0);
      sol.complementarity = compl_res;
      return sol;
    }

    if (worst_kind == 2) {
      ws.row[static_cast<std::size_t>(worst_index)] = 0;
    } else {
      ws.bound[static_cast<std::size_t>(worst_index)] = 0;
    }
  }

  // Iteration cap: report the best iterate with honest residuals.
  sol.x = x;
  sol.status = QpStatus::kMaxIterations;
  sol.iterations = iter;
  sol.active_set_size = ws.active_count();
  const VecX grad_full = p.hessian * x + p.gradient;
  sol.stationarity = grad_full.lpNorm<Eigen::Infinity>();
  double feas = 0.0;
  for (int i = 0; i < n; ++i) feas = std::max({feas, p.lower(i) - x(i), x(i) - p.upper(i)});
  for (int r = 0; r < m; ++r) feas = std::max(feas, p.ineq_a.row(r).dot(x) - p.ineq_b(r));
  sol.primal_feasibility = std::max(feas, 0.0);
  sol.complementarity = 0.0;
  if (warm != nullptr) warm->valid = false;
  return sol;
}

}  // namespace dwmpc
