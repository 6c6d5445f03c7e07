#include <benchmark/benchmark.h>

#include "dwmpc/ocp.hpp"
#include "dwmpc/rng.hpp"

using namespace dwmpc;

namespace {

RefWindow hover_ref(const QuadParams& params, int horizon) {
  RefWindow ref;
  Vec10 x = Vec10::Zero();
  x(2) = 1.0;
  x(9) = 1.0;
  ref.x.assign(static_cast<std::size_t>(horizon) + 1, x);
  ref.u.assign(static_cast<std::size_t>(horizon), Vec4{params.hover_thrust(), 0, 0, 0});
  return ref;
}

}  // namespace

static void BM_MpcStepNominal(benchmark::State& state) {
  QuadParams params;
  OcpConfig config;
  MpcController mpc(config, params);
  PredictionModel model;
  QuadState x;
  x.p = Vec3{0, 0, 1};
  const RefWindow ref = hover_ref(params, config.horizon);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpc.step(t, x, ref, model));
    t += 0.0025;
  }
}
BENCHMARK(BM_MpcStepNominal);

static void BM_MpcStepHybridWithNeighbors(benchmark::State& state) {
  QuadParams params;
  OcpConfig config;
  MpcController mpc(config, params);
  Rng rng(3);
  const Mlp mlp = Mlp::random_init({8, 32, 32, 3}, rng);

  PredictionModel model;
  model.variant = ModelVariant::kKnodeDw;
  model.mlp = &mlp;
  QuadState above;
  above.p = Vec3{0.02, 0.0, 1.25};
  QuadState below;
  below.p = Vec3{-0.02, 0.0, 0.75};
  model.neighbors = {{above, 0.4}, {below, 0.35}};
  model.f_sigma.segment<3>(3) = Vec3{0.0, 0.0, 0.2};

  QuadState x;
  x.p = Vec3{0, 0, 1};
  const RefWindow ref = hover_ref(params, config.horizon);
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mpc.step(t, x, ref, model));
    t += 0.0025;
  }
}
BENCHMARK(BM_MpcStepHybridWithNeighbors);

BENCHMARK_MAIN();
