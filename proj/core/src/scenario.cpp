#include "dwmpc/scenario.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dwmpc {

using nlohmann::json;

namespace {

[[noreturn]] void fail_at_byte(const std::string& name, const std::string& text, std::size_t byte,
                               const std::string& what) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  throw ParseError(name + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + what);
}

struct Checker {
  const std::string& name;

  void keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed,
            std::initializer_list<const char*> required = {}) const {
    if (!obj.is_object()) throw ParseError(name + ": " + path + " must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
      if (!ok.count(key))
        throw ParseError(name + ": unknown key '" + key + "' in " + path);
    }
    for (const char* req : required) {
      if (!obj.contains(req))
        throw ParseError(name + ": missing required key '" + std::string(req) + "' in " + path);
    }
  }

  double number(const json& obj, const std::string& path, const char* key, double fallback) const {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) throw ParseError(name + ": " + path + "." + key + " must be a number");
    return obj[key].get<double>();
  }

  int integer(const json& obj, const std::string& path, const char* key, int fallback) const {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number_integer())
      throw ParseError(name + ": " + path + "." + key + " must be an integer");
    return obj[key].get<int>();
  }

  std::string text(const json& obj, const std::string& path, const char* key,
                   const std::string& fallback) const {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_string()) throw ParseError(name + ": " + path + "." + key + " must be a string");
    return obj[key].get<std::string>();
  }

  Vec3 vec3(const json& obj, const std::string& path, const char* key, const Vec3& fallback) const {
    if (!obj.contains(key)) return fallback;
    const auto& a = obj[key];
    if (!a.is_array() || a.size() != 3)
      throw ParseError(name + ": " + path + "." + key + " must be an array of 3 numbers");
    Vec3 v;
    for (int i = 0; i < 3; ++i) v(i) = a[static_cast<std::size_t>(i)].get<double>();
    return v;
  }

  template <int N>
  Eigen::Matrix<double, N, 1> vec_n(const json& obj, const std::string& path, const char* key,
                                    const Eigen::Matrix<double, N, 1>& fallback) const {
    if (!obj.contains(key)) return fallback;
    const auto& a = obj[key];
    if (!a.is_array() || a.size() != N)
      throw ParseError(name + ": " + path + "." + key + " must be an array of " +
                       std::to_string(N) + " numbers");
    Eigen::Matrix<double, N, 1> v;
    for (int i = 0; i < N; ++i) v(i) = a[static_cast<std::size_t>(i)].get<double>();
    return v;
  }
};

DwParams parse_dw(const json& obj, const Checker& ck, const std::string& path,
                  const DwParams& base) {
  ck.keys(obj, path, {"jet_strength", "z_clamp", "core_width", "spread_rate", "neighbor_range"});
  DwParams p = base;
  p.jet_strength = ck.number(obj, path, "jet_strength", p.jet_strength);
  p.z_clamp = ck.number(obj, path, "z_clamp", p.z_clamp);
  p.core_width = ck.number(obj, path, "core_width", p.core_width);
  p.spread_rate = ck.number(obj, path, "spread_rate", p.spread_rate);
  p.neighbor_range = ck.number(obj, path, "neighbor_range", p.neighbor_range);
  return p;
}

L1Config parse_l1(const json& obj, const Checker& ck, const std::string& path) {
  ck.keys(obj, path, {"a", "lpf_cutoff", "compensation_sign"});
  L1Config c;
  const double a = ck.number(obj, path, "a", -10.0);
  c.error_dynamics = a * Mat3::Identity();
  c.lpf_cutoff = ck.number(obj, path, "lpf_cutoff", c.lpf_cutoff);
  const std::string sign = ck.text(obj, path, "compensation_sign", "negated");
  if (sign == "negated") c.sign = L1Config::CompensationSign::kNegated;
  else if (sign == "as_printed") c.sign = L1Config::CompensationSign::kAsPrinted;
  else throw ParseError("compensation_sign must be 'negated' or 'as_printed'");
  return c;
}

}  // namespace

void Scenario::validate() const {
  formation.validate();
  trajectory.validate();
  if (vehicles.empty() || vehicles.size() > 3)
    throw ConfigError("scenario: between 1 and 3 vehicles required");
  if (seeds.empty()) throw ConfigError("scenario: at least one seed required");
  quad.validate();
  plant.validate();
  solver.validate();
  for (std::size_t i = 0; i < vehicles.size(); ++i) {
    vehicles[i].dw.validate();
    vehicles[i].l1.validate();
    if (variant_has_knode(vehicles[i].variant) && vehicles[i].weights_path.empty())
      throw ConfigError("scenario: vehicle " + std::to_string(i) + " (" +
                        variant_name(vehicles[i].variant) + ") requires a weights path");
  }
}

Scenario parse_scenario_text(const std::string& text, const std::string& name,
                             const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail_at_byte(name, text, e.byte, e.what());
  }

  const Checker ck{name};
  ck.keys(root, "config",
          {"formation", "trajectory", "vehicles", "plant", "solver", "quad", "seeds", "duration",
           "measurement_noise_std"},
          {"formation", "trajectory", "vehicles"});

  Scenario s;

  {
    const auto& f = root["formation"];
    ck.keys(f, "formation", {"kind", "z1", "z2", "r"}, {"kind"});
    const std::string kind = ck.text(f, "formation", "kind", "i_stack");
    if (kind == "i_stack") s.formation.kind = Formation::Kind::kIStack;
    else if (kind == "v_stack") s.formation.kind = Formation::Kind::kVStack;
    else throw ParseError(name + ": formation.kind must be 'i_stack' or 'v_stack'");
    s.formation.z1 = ck.number(f, "formation", "z1", s.formation.z1);
    s.formation.z2 = ck.number(f, "formation", "z2", s.formation.z2);
    s.formation.r = ck.number(f, "formation", "r", 0.0);
  }

  {
    const auto& t = root["trajectory"];
    ck.keys(t, "trajectory",
            {"kind", "start", "direction", "length", "cruise_speed", "accel", "amp_x", "amp_y",
             "lap_time", "hover_lead", "hover_tail", "hover_duration"},
            {"kind"});
    const std::string kind = ck.text(t, "trajectory", "kind", "line");
    if (kind == "hover") s.trajectory.kind = TrajectorySpec::Kind::kHover;
    else if (kind == "line") s.trajectory.kind = TrajectorySpec::Kind::kLine;
    else if (kind == "lemniscate") s.trajectory.kind = TrajectorySpec::Kind::kLemniscate;
    else throw ParseError(name + ": trajectory.kind must be hover/line/lemniscate");
    s.trajectory.start = ck.vec3(t, "trajectory", "start", s.trajectory.start);
    s.trajectory.direction = ck.vec3(t, "trajectory", "direction", s.trajectory.direction);
    s.trajectory.length = ck.number(t, "trajectory", "length", s.trajectory.length);
    s.trajectory.cruise_speed = ck.number(t, "trajectory", "cruise_speed", s.trajectory.cruise_speed);
    s.trajectory.accel = ck.number(t, "trajectory", "accel", s.trajectory.accel);
    s.trajectory.amp_x = ck.number(t, "trajectory", "amp_x", s.trajectory.amp_x);
    s.trajectory.amp_y = ck.number(t, "trajectory", "amp_y", s.trajectory.amp_y);
    s.trajectory.lap_time = ck.number(t, "trajectory", "lap_time", s.trajectory.lap_time);
    s.trajectory.hover_lead = ck.number(t, "trajectory", "hover_lead", s.trajectory.hover_lead);
    s.trajectory.hover_tail = ck.number(t, "trajectory", "hover_tail", s.trajectory.hover_tail);
    s.trajectory.hover_duration =
        ck.number(t, "trajectory", "hover_duration", s.trajectory.hover_duration);
  }

  {
    const auto& arr = root["vehicles"];
    if (!arr.is_array() || arr.empty() || arr.size() > 3)
      throw ParseError(name + ": vehicles must be an array of 1..3 entries");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "vehicles[" + std::to_string(i) + "]";
      const auto& v = arr[i];
      ck.keys(v, path, {"controller", "rate_hz", "weights", "l1", "dw"}, {"controller"});
      Scenario::Vehicle veh;
      veh.variant = parse_variant(ck.text(v, path, "controller", "mpc"));
      veh.rate_hz = ck.number(v, path, "rate_hz", i == 0 ? 200.0 : 400.0);
      veh.weights_path = ck.text(v, path, "weights", "");
      if (!veh.weights_path.empty()) {
        const std::filesystem::path wp = std::filesystem::path(veh.weights_path).is_absolute()
                                             ? std::filesystem::path(veh.weights_path)
                                             : base_dir / veh.weights_path;
        veh.weights_path = wp.string();
        if (!std::filesystem::exists(wp))
          throw ConfigError(name + ": " + path + ".weights file does not exist: " + wp.string());
      }
      if (v.contains("l1")) veh.l1 = parse_l1(v["l1"], ck, path + ".l1");
      if (v.contains("dw")) veh.dw = parse_dw(v["dw"], ck, path + ".dw", DwParams{});
      s.vehicles.push_back(std::move(veh));
    }
  }

  if (root.contains("plant")) {
    const auto& p = root["plant"];
    ck.keys(p, "plant", {"rate_hz", "interaction", "measurement_noise_std"});
    s.plant_rate_hz = ck.number(p, "plant", "rate_hz", s.plant_rate_hz);
    if (p.contains("interaction")) {
      const auto& di = p["interaction"];
      ck.keys(di, "plant.interaction",
              {"jet_strength", "z_clamp", "core_width", "spread_rate", "neighbor_range",
               "below_gain", "noise_sigma", "noise_tau", "vel_skew"});
      json dw_only = di;
      dw_only.erase("below_gain");
      dw_only.erase("noise_sigma");
      dw_only.erase("noise_tau");
      dw_only.erase("vel_skew");
      s.plant.dw = parse_dw(dw_only, ck, "plant.interaction", s.plant.dw);
      s.plant.below_gain = ck.number(di, "plant.interaction", "below_gain", s.plant.below_gain);
      s.plant.noise_sigma = ck.number(di, "plant.interaction", "noise_sigma", s.plant.noise_sigma);
      s.plant.noise_tau = ck.number(di, "plant.interaction", "noise_tau", s.plant.noise_tau);
      s.plant.vel_skew = ck.number(di, "plant.interaction", "vel_skew", s.plant.vel_skew);
    }
    s.measurement_noise_std =
        ck.number(p, "plant", "measurement_noise_std", s.measurement_noise_std);
  }

  if (root.contains("solver")) {
    const auto& so = root["solver"];
    ck.keys(so, "solver",
            {"horizon", "period", "q_diag", "r_diag", "terminal_scale", "state_lower",
             "state_upper", "soft_penalty", "soft_quad", "qp_max_iterations"});
    s.solver.horizon = ck.integer(so, "solver", "horizon", s.solver.horizon);
    s.solver.period = ck.number(so, "solver", "period", s.solver.period);
    const Vec10 q_default = s.solver.state_weight.diagonal();
    const Vec10 q = ck.vec_n<10>(so, "solver", "q_diag", q_default);
    const Vec4 r = ck.vec_n<4>(so, "solver", "r_diag", s.solver.input_weight.diagonal());
    const double pscale = ck.number(so, "solver", "terminal_scale", 5.0);
    s.solver.state_weight = q.asDiagonal();
    s.solver.input_weight = r.asDiagonal();
    s.solver.terminal_weight = pscale * Mat10(q.asDiagonal());
    s.solver.state_lower = ck.vec_n<10>(so, "solver", "state_lower", s.solver.state_lower);
    s.solver.state_upper = ck.vec_n<10>(so, "solver", "state_upper", s.solver.state_upper);
    s.solver.soft_penalty = ck.number(so, "solver", "soft_penalty", s.solver.soft_penalty);
    s.solver.soft_quad = ck.number(so, "solver", "soft_quad", s.solver.soft_quad);
    s.solver.qp_max_iterations =
        ck.integer(so, "solver", "qp_max_iterations", s.solver.qp_max_iterations);
  }

  if (root.contains("quad")) {
    const auto& q = root["quad"];
    ck.keys(q, "quad", {"mass", "gravity", "diameter", "thrust_max", "rate_max"});
    s.quad.mass = ck.number(q, "quad", "mass", s.quad.mass);
    s.quad.gravity = ck.vec3(q, "quad", "gravity", s.quad.gravity);
    s.quad.diameter = ck.number(q, "quad", "diameter", s.quad.diameter);
    s.quad.thrust_max = ck.number(q, "quad", "thrust_max", s.quad.thrust_max);
    s.quad.rate_max = ck.number(q, "quad", "rate_max", s.quad.rate_max);
  }

  if (root.contains("seeds")) {
    const auto& a = root["seeds"];
    if (!a.is_array() || a.empty()) throw ParseError(name + ": seeds must be a non-empty array");
    s.seeds.clear();
    for (const auto& e : a) s.seeds.push_back(e.get<std::uint64_t>());
  }
  s.duration = ck.number(root, "config", "duration", s.duration);
  s.measurement_noise_std =
      ck.number(root, "config", "measurement_noise_std", s.measurement_noise_std);

  s.validate();
  return s;
}

Scenario parse_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str(), path.string(), path.parent_path());
}

std::string scenario_to_canonical_json(const Scenario& s) {
  json root;
  root["formation"] = {{"kind", s.formation.kind == Formation::Kind::kIStack ? "i_stack" : "v_stack"},
                       {"z1", s.formation.z1},
                       {"z2", s.formation.z2},
                       {"r", s.formation.r}};
  const char* traj_kind = s.trajectory.kind == TrajectorySpec::Kind::kHover
                              ? "hover"
                              : (s.trajectory.kind == TrajectorySpec::Kind::kLine ? "line"
                                                                                  : "lemniscate");
  root["trajectory"] = {{"kind", traj_kind},
                        {"start", {s.trajectory.start(0), s.trajectory.start(1), s.trajectory.start(2)}},
                        {"direction",
                         {s.trajectory.direction(0), s.trajectory.direction(1),
                          s.trajectory.direction(2)}},
                        {"length", s.trajectory.length},
                        {"cruise_speed", s.trajectory.cruise_speed},
                        {"accel", s.trajectory.accel},
                        {"amp_x", s.trajectory.amp_x},
                        {"amp_y", s.trajectory.amp_y},
                        {"lap_time", s.trajectory.lap_time},
                        {"hover_lead", s.trajectory.hover_lead},
                        {"hover_tail", s.trajectory.hover_tail},
                        {"hover_duration", s.trajectory.hover_duration}};
  root["vehicles"] = json::array();
  for (const auto& v : s.vehicles) {
    root["vehicles"].push_back(
        {{"controller", variant_name(v.variant)},
         {"rate_hz", v.rate_hz},
         {"weights", v.weights_path},
         {"l1",
          {{"a", v.l1.error_dynamics(0, 0)},
           {"lpf_cutoff", v.l1.lpf_cutoff},
           {"compensation_sign",
            v.l1.sign == L1Config::CompensationSign::kNegated ? "negated" : "as_printed"}}},
         {"dw",
          {{"jet_strength", v.dw.jet_strength},
           {"z_clamp", v.dw.z_clamp},
           {"core_width", v.dw.core_width},
           {"spread_rate", v.dw.spread_rate},
           {"neighbor_range", v.dw.neighbor_range}}}});
  }
  root["plant"] = {{"rate_hz", s.plant_rate_hz},
                   {"interaction",
                    {{"jet_strength", s.plant.dw.jet_strength},
                     {"z_clamp", s.plant.dw.z_clamp},
                     {"core_width", s.plant.dw.core_width},
                     {"spread_rate", s.plant.dw.spread_rate},
                     {"neighbor_range", s.plant.dw.neighbor_range},
                     {"below_gain", s.plant.below_gain},
                     {"noise_sigma", s.plant.noise_sigma},
                     {"noise_tau", s.plant.noise_tau},
                     {"vel_skew", s.plant.vel_skew}}}};
  std::vector<double> q(10), lo(10), hi(10);
  for (int i = 0; i < 10; ++i) {
    q[static_cast<std::size_t>(i)] = s.solver.state_weight(i, i);
    lo[static_cast<std::size_t>(i)] = s.solver.state_lower(i);
    hi[static_cast<std::size_t>(i)] = s.solver.state_upper(i);
  }
  root["solver"] = {{"horizon", s.solver.horizon},
                    {"period", s.solver.period},
                    {"q_diag", q},
                    {"r_diag",
                     {s.solver.input_weight(0, 0), s.solver.input_weight(1, 1),
                      s.solver.input_weight(2, 2), s.solver.input_weight(3, 3)}},
                    {"terminal_scale",
                     s.solver.state_weight(0, 0) != 0.0
                         ? s.solver.terminal_weight(0, 0) / s.solver.state_weight(0, 0)
                         : 0.0},
                    {"soft_penalty", s.solver.soft_penalty},
                    {"soft_quad", s.solver.soft_quad}};
  root["quad"] = {{"mass", s.quad.mass},
                  {"gravity", {s.quad.gravity(0), s.quad.gravity(1), s.quad.gravity(2)}},
                  {"diameter", s.quad.diameter},
                  {"thrust_max", s.quad.thrust_max},
                  {"rate_max", s.quad.rate_max}};
  root["measurement_noise_std"] = s.measurement_noise_std;
  root["duration"] = s.duration;
  return root.dump();
}

std::string scenario_config_hash(const Scenario& s) {
  const std::string canon = scenario_to_canonical_json(s);
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, h);
  return buf;
}

CompiledScenario compile_scenario(const Scenario& s) {
  s.validate();
  CompiledScenario out;
  out.setup.quad = s.quad;
  out.setup.plant = s.plant;
  out.setup.solver = s.solver;
  out.setup.plant_rate_hz = s.plant_rate_hz;
  out.setup.duration = s.duration;
  out.setup.measurement_noise_std = s.measurement_noise_std;

  const auto offsets = formation_offsets(s.formation);
  static const char* kRoles[3] = {"bottom", "center", "top"};
  for (std::size_t i = 0; i < s.vehicles.size(); ++i) {
    const auto& cfg = s.vehicles[i];
    VehicleSetup v;
    v.role = kRoles[i];
    v.offset = offsets[i];
    v.trajectory = s.trajectory;
    v.variant = cfg.variant;
    v.rate_hz = cfg.rate_hz;
    v.l1 = cfg.l1;
    v.dw = cfg.dw;
    if (variant_has_knode(cfg.variant)) {
      out.weights.push_back(std::make_unique<Mlp>(Mlp::load(cfg.weights_path)));
      v.mlp = out.weights.back().get();
    }
    out.setup.vehicles.push_back(std::move(v));
  }
  out.setup.validate();
  return out;
}

RunRecord run_scenario(const Scenario& s, std::uint64_t seed) {
  const CompiledScenario compiled = compile_scenario(s);
  return run_simulation(compiled.setup, seed, scenario_config_hash(s));
}

}  // namespace dwmpc
