#include <benchmark/benchmark.h>

#include "dwmpc/qp.hpp"
#include "dwmpc/rng.hpp"

using namespace dwmpc;

namespace {

QpProblem make_problem(int n, std::uint64_t seed) {
  Rng rng(seed);
  QpProblem p;
  MatX a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
  p.hessian = a.transpose() * a + 0.5 * MatX::Identity(n, n);
  p.gradient = VecX(n);
  p.lower = VecX(n);
  p.upper = VecX(n);
  for (int i = 0; i < n; ++i) {
    p.gradient(i) = 2.0 * rng.normal();
    const double c = rng.normal();
    p.lower(i) = c - 0.5;
    p.upper(i) = c + 0.5;
  }
  p.ineq_a = MatX::Zero(0, n);
  p.ineq_b = VecX::Zero(0);
  return p;
}

}  // namespace

static void BM_QpColdStart(benchmark::State& state) {
  const QpProblem p = make_problem(static_cast<int>(state.range(0)), 7);
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(p));
}
BENCHMARK(BM_QpColdStart)->Arg(20)->Arg(40)->Arg(80);

static void BM_QpWarmStart(benchmark::State& state) {
  const QpProblem p = make_problem(static_cast<int>(state.range(0)), 7);
  QpWarmStart warm;
  solve_qp(p, &warm);
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(p, &warm));
}
BENCHMARK(BM_QpWarmStart)->Arg(20)->Arg(40)->Arg(80);
