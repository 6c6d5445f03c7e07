#include "dwmpc/knode_data.hpp"

namespace dwmpc {

TrainingScenario parse_training_scenario(const std::string& name) {
  if (name == "static_top") return TrainingScenario::kStaticTop;
  if (name == "stacked") return TrainingScenario::kStacked;
  if (name == "both") return TrainingScenario::kBoth;
  throw ConfigError("unknown training scenario '" + name + "'");
}

namespace {

SimSetup two_vehicle_setup(const TrainingDataOptions& opt, bool static_top) {
  SimSetup setup;
  setup.quad = opt.quad;
  setup.plant = opt.plant;
  setup.solver = opt.solver;
  setup.plant_rate_hz = opt.plant_rate_hz;

  TrajectorySpec line;
  line.kind = TrajectorySpec::Kind::kLine;
  line.start = Vec3{0.0, 0.0, 1.0};

  VehicleSetup ego;
  ego.role = "ego";
  ego.trajectory = line;
  ego.variant = ControllerVariant::kDwMpc;
  ego.rate_hz = opt.rate_hz;
  ego.dw = opt.controller_dw;

  VehicleSetup source;
  source.role = "source";
  source.variant = ControllerVariant::kDwMpc;
  source.rate_hz = opt.rate_hz;
  source.dw = opt.controller_dw;
  if (static_top) {
    // Hover above the midpoint of the ego's pass.
    TrajectorySpec hover;
    hover.kind = TrajectorySpec::Kind::kHover;
    hover.start = Vec3{0.0, 0.0, 1.0} + Vec3{0.5 * line.length, 0.0, 0.0};
    hover.hover_duration = line.duration();
    source.trajectory = hover;
    source.offset = Vec3{0.0, 0.0, opt.separation};
  } else {
    // Stacked: same line, vertically aligned.
    source.trajectory = line;
    source.offset = Vec3{0.0, 0.0, opt.separation};
  }

  setup.vehicles = {ego, source};
  return setup;
}

void extract_segments(const RunRecord& record, const TrainingDataOptions& opt,
                      TrainingSet& out) {
  const auto& ego = record.vehicles[0];
  const auto& src = record.vehicles[1];
  const std::size_t n = std::min(ego.ticks.size(), src.ticks.size());
  const double dt = 1.0 / opt.rate_hz;
  const std::size_t window = static_cast<std::size_t>(opt.horizon) + 1;
  if (n < window) return;

  for (std::size_t start = 0; start + window <= n;
       start += static_cast<std::size_t>(opt.stride)) {
    TrajectorySegment seg;
    seg.dt = dt;
    seg.states.reserve(window);
    seg.inputs.reserve(window - 1);
    seg.neighbors.reserve(window - 1);
    for (std::size_t k = start; k < start + window; ++k) {
      seg.states.push_back(ego.ticks[k].state);
      if (k + 1 < start + window) {
        seg.inputs.push_back(ego.ticks[k].input);
        const QuadState src_state = QuadState::from_vector(src.ticks[k].state);
        seg.neighbors.push_back({{src_state, src.ticks[k].input(0)}});
      }
    }
    out.segments.push_back(std::move(seg));
  }
}

}  // namespace

TrainingData generate_training_data(const TrainingDataOptions& options,
                                    const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("generate_training_data: at least one seed required");
  TrainingData out;
  std::vector<bool> scenarios;
  if (options.source == TrainingScenario::kStaticTop) scenarios = {true};
  else if (options.source == TrainingScenario::kStacked) scenarios = {false};
  else scenarios = {true, false};

  for (const std::uint64_t seed : seeds) {
    for (bool static_top : scenarios) {
      const SimSetup setup = two_vehicle_setup(options, static_top);
      const RunRecord record = run_simulation(setup, seed);
      if (record.outcome != RunOutcome::kCompleted) {
        out.dropped.push_back(std::string(static_top ? "static_top" : "stacked") + " seed " +
                              std::to_string(seed) + ": " + outcome_name(record.outcome) +
                              " at t=" + std::to_string(record.failure_time));
        continue;
      }
      extract_segments(record, options, out.set);
    }
  }
  if (out.set.segments.empty())
    throw ConfigError("generate_training_data: all runs failed, no segments collected");
  return out;
}

std::pair<TrainingSet, TrainingSet> split_training_set(const TrainingSet& all, int keep_every) {
  if (keep_every < 2) throw ConfigError("split_training_set: keep_every must be >= 2");
  TrainingSet train, held;
  for (std::size_t i = 0; i < all.segments.size(); ++i) {
    if (i % static_cast<std::size_t>(keep_every) == static_cast<std::size_t>(keep_every) - 1)
      held.segments.push_back(all.segments[i]);
    else
      train.segments.push_back(all.segments[i]);
  }
  return {std::move(train), std::move(held)};
}

}  // namespace dwmpc
