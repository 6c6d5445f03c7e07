#include <benchmark/benchmark.h>

#include "dwmpc/knode.hpp"
#include "dwmpc/rigid_body.hpp"
#include "dwmpc/rng.hpp"

using namespace dwmpc;

static void BM_NominalDerivative(benchmark::State& state) {
  QuadParams params;
  QuadState x;
  x.p = Vec3{0.1, -0.2, 1.0};
  x.v = Vec3{0.3, 0.0, -0.1};
  const ControlInput u{params.hover_thrust(), Vec3{0.2, -0.1, 0.05}};
  for (auto _ : state) benchmark::DoNotOptimize(f_nom(x, u, params));
}
BENCHMARK(BM_NominalDerivative);

static void BM_Rk4Step(benchmark::State& state) {
  QuadParams params;
  QuadState x;
  x.p = Vec3{0.1, -0.2, 1.0};
  const ControlInput u{params.hover_thrust(), Vec3{0.2, -0.1, 0.05}};
  for (auto _ : state) benchmark::DoNotOptimize(rk4_step_nominal(x, u, params, 5e-4));
}
BENCHMARK(BM_Rk4Step);

static void BM_JetKernel(benchmark::State& state) {
  DwParams dw;
  for (auto _ : state) benchmark::DoNotOptimize(dw_kernel(0.25, 0.01, 0.35, dw));
}
BENCHMARK(BM_JetKernel);

static void BM_HybridForceWithResidual(benchmark::State& state) {
  QuadParams params;
  DwParams dw;
  Rng rng(1);
  const Mlp mlp = Mlp::random_init({kDwFeatureSize, 32, 32, 3}, rng);
  QuadState ego, src;
  ego.p = Vec3{0, 0, 1};
  src.p = Vec3{0.05, 0.02, 1.3};
  const std::vector<std::pair<QuadState, double>> sources{{src, 0.35}};
  for (auto _ : state)
    benchmark::DoNotOptimize(hybrid_interaction_force(ego, sources, dw, &mlp, params));
}
BENCHMARK(BM_HybridForceWithResidual);
