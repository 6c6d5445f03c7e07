#include "dwmpc/simulate.hpp"

#include <cmath>

#include "dwmpc/knode.hpp"
#include "dwmpc/prediction_model.hpp"
#include "dwmpc/rigid_body.hpp"

namespace dwmpc {

bool variant_has_l1(ControllerVariant v) {
  return v == ControllerVariant::kL1Mpc || v == ControllerVariant::kL1DwMpc ||
         v == ControllerVariant::kL1KnodeDwMpc;
}

bool variant_has_knode(ControllerVariant v) {
  return v == ControllerVariant::kKnodeDwMpc || v == ControllerVariant::kL1KnodeDwMpc;
}

ModelVariant variant_model(ControllerVariant v) {
  switch (v) {
    case ControllerVariant::kMpc:
    case ControllerVariant::kL1Mpc:
      return ModelVariant::kNominal;
    case ControllerVariant::kDwMpc:
    case ControllerVariant::kL1DwMpc:
      return ModelVariant::kDw;
    case ControllerVariant::kKnodeDwMpc:
    case ControllerVariant::kL1KnodeDwMpc:
      return ModelVariant::kKnodeDw;
  }
  return ModelVariant::kNominal;
}

const char* variant_name(ControllerVariant v) {
  switch (v) {
    case ControllerVariant::kMpc: return "mpc";
    case ControllerVariant::kDwMpc: return "dw_mpc";
    case ControllerVariant::kKnodeDwMpc: return "knode_dw_mpc";
    case ControllerVariant::kL1Mpc: return "l1_mpc";
    case ControllerVariant::kL1DwMpc: return "l1_dw_mpc";
    case ControllerVariant::kL1KnodeDwMpc: return "l1_knode_dw_mpc";
  }
  return "mpc";
}

ControllerVariant parse_variant(const std::string& name) {
  for (ControllerVariant v :
       {ControllerVariant::kMpc, ControllerVariant::kDwMpc, ControllerVariant::kKnodeDwMpc,
        ControllerVariant::kL1Mpc, ControllerVariant::kL1DwMpc,
        ControllerVariant::kL1KnodeDwMpc}) {
    if (name == variant_name(v)) return v;
  }
  throw ConfigError("unknown controller variant '" + name + "'");
}

const char* outcome_name(RunOutcome o) {
  switch (o) {
    case RunOutcome::kCompleted: return "completed";
    case RunOutcome::kCrash: return "crash";
    case RunOutcome::kCollision: return "collision";
    case RunOutcome::kDiverged: return "diverged";
  }
  return "completed";
}

double SimSetup::effective_duration() const {
  if (duration > 0.0) return duration;
  double d = 0.0;
  for (const auto& v : vehicles) d = std::max(d, v.trajectory.duration());
  return d;
}

void SimSetup::validate() const {
  if (vehicles.empty()) throw ConfigError("simulation: at least one vehicle required");
  quad.validate();
  plant.validate();
  solver.validate();
  if (!(plant_rate_hz > 0.0)) throw ConfigError("simulation: plant rate must be positive");
  if (!(effective_duration() > 0.0)) throw ConfigError("simulation: duration must be positive");
  if (measurement_noise_std < 0.0)
    throw ConfigError("simulation: measurement noise std must be non-negative");
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    const auto& v = vehicles[i];
    v.trajectory.validate();
    v.dw.validate();
    v.l1.validate();
    if (!(v.rate_hz > 0.0))
      throw ConfigError("vehicle " + std::to_string(i) + ": control rate must be positive");
    const double ratio = plant_rate_hz / v.rate_hz;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0)
      throw ConfigError("vehicle " + std::to_string(i) +
                        ": control rate must divide the plant rate");
    if (variant_has_knode(v.variant) && v.mlp == nullptr)
      throw ConfigError("vehicle " + std::to_string(i) + " (" + variant_name(v.variant) +
                        ") requires trained weights");
  }
}

namespace {

struct VehicleRuntime {
  QuadState state;
  MpcController controller;
  L1Config l1_config;
  L1State l1;
  ControlInput command;
  OuState ou;
  Vec3 last_plant_force{Vec3::Zero()};
  Rng meas_rng;
  int tick_interval{1};
  bool pending_tick{false};
  TickLog pending;
};

}  // namespace

RunRecord run_simulation(const SimSetup& setup, std::uint64_t seed,
                         const std::string& config_hash) {
  setup.validate();

  const double duration = setup.effective_duration();
  const double plant_dt = 1.0 / setup.plant_rate_hz;
  const auto total_steps = static_cast<std::int64_t>(std::llround(duration * setup.plant_rate_hz));
  const std::size_t n_vehicles = setup.vehicles.size();

  Rng master(seed);
  Rng plant_rng = master.fork(0);

  RunRecord record;
  record.seed = seed;
  record.config_hash = config_hash;
  const auto window = setup.vehicles.front().trajectory.tracking_window();
  record.window_begin = window.first;
  record.window_end = window.second;

  std::vector<VehicleRuntime> rt;
  rt.reserve(n_vehicles);
  record.vehicles.resize(n_vehicles);
  for (std::size_t i = 0; i < n_vehicles; ++i) {
    const auto& vs = setup.vehicles[i];
    const RefPoint r0 = reference_trajectory(vs.trajectory, 0.0);
    QuadState x0;
    x0.p = r0.p + vs.offset;
    x0.v = r0.v;

    L1Config l1c = vs.l1;
    l1c.period = 1.0 / vs.rate_hz;

    VehicleRuntime v{x0,
                     MpcController(setup.solver, setup.quad),
                     l1c,
                     L1State{},
                     ControlInput{setup.quad.hover_thrust(), Vec3::Zero()},
                     OuState{},
                     Vec3::Zero(),
                     master.fork(1 + static_cast<std::uint64_t>(i)),
                     static_cast<int>(std::llround(setup.plant_rate_hz / vs.rate_hz)),
                     false,
                     TickLog{}};
    v.l1.z_hat = x0.v;
    v.l1.thrust_prev = setup.quad.hover_thrust();
    rt.push_back(std::move(v));

    record.vehicles[i].role = vs.role;
    record.vehicles[i].variant = variant_name(vs.variant);
    record.vehicles[i].rate_hz = vs.rate_hz;
  }

  const int horizon = setup.solver.horizon;
  const double period = setup.solver.period;

  auto fail = [&](RunOutcome outcome, double t, int vehicle, const std::string& what) {
    record.outcome = outcome;
    record.failure_time = t;
    record.failure_vehicle = vehicle;
    record.failure_what = what;
  };

  for (std::int64_t step = 0; step < total_steps && record.outcome == RunOutcome::kCompleted;
       ++step) {
    const double t = static_cast<double>(step) * plant_dt;

    // Control phase: vehicles fire at their own rates on current measurements.
    for (std::size_t i = 0; i < n_vehicles; ++i) {
      auto& v = rt[i];
      const auto& vs = setup.vehicles[i];
      if (step % v.tick_interval != 0) continue;

      QuadState measured = v.state;
      if (setup.measurement_noise_std > 0.0) {
        for (int d = 0; d < 3; ++d)
          measured.p(d) += setup.measurement_noise_std * v.meas_rng.normal();
      }

      // Neighbor snapshot (states and last commanded thrusts), frozen over
      // the horizon.
      PredictionModel model;
      model.variant = variant_model(vs.variant);
      model.dw = vs.dw;
      model.mlp = variant_has_knode(vs.variant) ? vs.mlp : nullptr;
      for (std::size_t o = 0; o < n_vehicles; ++o) {
        if (o == i) continue;
        if ((rt[o].state.p - measured.p).norm() > vs.dw.neighbor_range) continue;
        model.neighbors.emplace_back(rt[o].state, rt[o].command.thrust);
      }

      TickLog log;
      log.t = t;
      log.state = v.state.to_vector();

      if (variant_has_l1(vs.variant)) {
        v.l1.sigma_hat = adaptation_law(measured.v, v.l1.z_hat, v.l1_config);
        v.l1.u_sigma = lpf_step(v.l1.u_sigma, v.l1.sigma_hat, v.l1_config);
        model.f_sigma = compose_f_sigma(v.l1.u_sigma, v.l1_config.sign);
        log.sigma_hat = v.l1.sigma_hat;
        log.u_sigma = v.l1.u_sigma;
      }

      RefWindow ref;
      ref.x.resize(static_cast<std::size_t>(horizon) + 1);
      ref.u.assign(static_cast<std::size_t>(horizon),
                   Vec4{setup.quad.hover_thrust(), 0.0, 0.0, 0.0});
      for (int j = 0; j <= horizon; ++j) {
        const RefPoint rp =
            reference_trajectory(vs.trajectory, t + static_cast<double>(j) * period);
        Vec10 xr = rp.to_state();
        xr.segment<3>(0) += vs.offset;
        ref.x[static_cast<std::size_t>(j)] = xr;
      }
      const RefPoint now = reference_trajectory(vs.trajectory, t);
      log.p_ref = now.p + vs.offset;
      log.v_ref = now.v;

      const MpcSolution sol = v.controller.step(t, measured, ref, model);
      v.command = sol.first;
      log.input = sol.first.to_vector();
      log.kkt = sol.kkt_residual;
      log.qp_iterations = sol.qp_iterations;
      log.active_set = sol.active_set_size;
      log.degraded = sol.degraded ? 1 : 0;

      if (variant_has_l1(vs.variant)) {
        v.l1.thrust_prev = v.command.thrust;
        const Vec3 model_force = model.model_force(measured, setup.quad);
        predictor_step(v.l1, measured.v, measured.q, model_force, v.l1_config, setup.quad);
        log.l1_reset = v.l1.was_reset ? 1 : 0;
      }

      v.pending = log;
      v.pending_tick = true;
    }

    // Plant phase: interaction forces from simultaneous states, then integrate.
    std::vector<Vec3> forces(n_vehicles);
    for (std::size_t i = 0; i < n_vehicles; ++i) {
      std::vector<std::pair<QuadState, double>> others;
      others.reserve(n_vehicles - 1);
      for (std::size_t o = 0; o < n_vehicles; ++o) {
        if (o == i) continue;
        others.emplace_back(rt[o].state, rt[o].command.thrust);
      }
      const PlantForceResult pf =
          plant_interaction_force(rt[i].state, others, rt[i].ou, setup.plant, plant_dt, plant_rng);
      rt[i].ou = pf.noise;
      forces[i] = pf.force;
      rt[i].last_plant_force = pf.force;
    }

    for (std::size_t i = 0; i < n_vehicles; ++i) {
      if (!rt[i].pending_tick) continue;
      rt[i].pending.plant_force = forces[i];
      record.vehicles[i].ticks.push_back(rt[i].pending);
      rt[i].pending_tick = false;
    }

    for (std::size_t i = 0; i < n_vehicles && record.outcome == RunOutcome::kCompleted; ++i) {
      auto& v = rt[i];
      const Vec3 accel_force = forces[i];
      try {
        v.state = rk4_step(
            [&](const QuadState& s, const ControlInput& u) {
              Vec10 dx = f_nom(s, u, setup.quad);
              dx.segment<3>(3) += accel_force / setup.quad.mass;
              return dx;
            },
            v.state, v.command, plant_dt);
      } catch (const IntegrationError& e) {
        fail(RunOutcome::kDiverged, t, static_cast<int>(i), e.what());
        break;
      } catch (const InvalidStateError& e) {
        fail(RunOutcome::kDiverged, t, static_cast<int>(i), e.what());
        break;
      }
      if (!v.state.finite()) {
        fail(RunOutcome::kDiverged, t, static_cast<int>(i), "non-finite state");
        break;
      }
      if (v.state.p.z() < 0.0) {
        fail(RunOutcome::kCrash, t, static_cast<int>(i), "altitude below zero");
        break;
      }
    }
    for (std::size_t i = 0; i < n_vehicles && record.outcome == RunOutcome::kCompleted; ++i) {
      for (std::size_t o = i + 1; o < n_vehicles; ++o) {
        if ((rt[i].state.p - rt[o].state.p).norm() < setup.quad.diameter) {
          fail(RunOutcome::kCollision, t, static_cast<int>(i),
               "pairwise distance below one body diameter");
          break;
        }
      }
    }
  }

  for (std::size_t i = 0; i < n_vehicles; ++i) {
    auto& series = record.vehicles[i];
    std::vector<ErrorSample> samples;
    samples.reserve(series.ticks.size());
    for (const auto& tick : series.ticks)
      samples.push_back({tick.t, tick.state.segment<3>(0), tick.p_ref});
    try {
      series.metrics = compute_metrics(samples, record.window_begin, record.window_end);
      series.metrics_valid = true;
    } catch (const DimensionError&) {
      series.metrics_valid = false;
    }
  }
  return record;
}

}  // namespace dwmpc
