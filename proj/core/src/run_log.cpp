#include "dwmpc/run_log.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dwmpc {

namespace {

constexpr const char* kFormatLine = "dwmpc-run-log v1";
constexpr const char* kColumns =
    "t,vehicle,px,py,pz,vx,vy,vz,qx,qy,qz,qw,ref_px,ref_py,ref_pz,ref_vx,ref_vy,ref_vz,"
    "u_thrust,u_wx,u_wy,u_wz,sig_x,sig_y,sig_z,usig_x,usig_y,usig_z,f_x,f_y,f_z,"
    "kkt,qp_iters,active_set,degraded,l1_reset";
constexpr int kNumColumns = 36;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct LogReader {
  std::ifstream in;
  std::string path;
  int line_no = 0;

  bool next(std::string& line) {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("run log " + path + ", row " + std::to_string(line_no) + ": " + what);
  }
};

}  // namespace

void write_run_log(const RunRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("write_run_log: cannot open " + path.string());

  out << "# " << kFormatLine << "\n";
  out << "# config_hash " << (record.config_hash.empty() ? "-" : record.config_hash) << "\n";
  out << "# seed " << record.seed << "\n";
  out << "# outcome " << outcome_name(record.outcome) << "\n";
  if (record.outcome != RunOutcome::kCompleted) {
    out << "# failure_time " << fmt(record.failure_time) << "\n";
    out << "# failure_vehicle " << record.failure_vehicle << "\n";
  }
  out << "# window " << fmt(record.window_begin) << " " << fmt(record.window_end) << "\n";
  out << "# vehicles " << record.vehicles.size() << "\n";
  for (std::size_t i = 0; i < record.vehicles.size(); ++i) {
    const auto& v = record.vehicles[i];
    out << "# vehicle " << i << " role " << v.role << " variant " << v.variant << " rate_hz "
        << fmt(v.rate_hz) << " metrics_valid " << (v.metrics_valid ? 1 : 0) << " rmse "
        << fmt(v.metrics.rmse) << " z_max " << fmt(v.metrics.z_max) << "\n";
  }
  out << "# columns " << kColumns << "\n";

  // Merge rows by (time, vehicle index); per-vehicle tick lists are already
  // time-sorted.
  std::vector<std::size_t> cursor(record.vehicles.size(), 0);
  while (true) {
    int best = -1;
    double best_t = 0.0;
    for (std::size_t i = 0; i < record.vehicles.size(); ++i) {
      if (cursor[i] >= record.vehicles[i].ticks.size()) continue;
      const double t = record.vehicles[i].ticks[cursor[i]].t;
      if (best < 0 || t < best_t) {
        best = static_cast<int>(i);
        best_t = t;
      }
    }
    if (best < 0) break;
    const auto& k = record.vehicles[static_cast<std::size_t>(best)].ticks[cursor[static_cast<std::size_t>(best)]++];
    out << fmt(k.t) << "," << best;
    for (int d = 0; d < 10; ++d) out << "," << fmt(k.state(d));
    for (int d = 0; d < 3; ++d) out << "," << fmt(k.p_ref(d));
    for (int d = 0; d < 3; ++d) out << "," << fmt(k.v_ref(d));
    for (int d = 0; d < 4; ++d) out << "," << fmt(k.input(d));
    for (int d = 0; d < 3; ++d) out << "," << fmt(k.sigma_hat(d));
    for (int d = 0; d < 3; ++d) out << "," << fmt(k.u_sigma(d));
    for (int d = 0; d < 3; ++d) out << "," << fmt(k.plant_force(d));
    out << "," << fmt(k.kkt) << "," << k.qp_iterations << "," << k.active_set << ","
        << k.degraded << "," << k.l1_reset << "\n";
  }
  if (!out) throw ParseError("write_run_log: write failed for " + path.string());
}

RunRecord read_run_log(const std::filesystem::path& path) {
  LogReader reader{std::ifstream(path), path.string()};
  if (!reader.in) throw ParseError("read_run_log: cannot open " + path.string());

  RunRecord record;
  std::string line;

  if (!reader.next(line) || line != std::string("# ") + kFormatLine)
    reader.fail("missing or unsupported format line");

  auto header_tail = [&](const std::string& l, const std::string& key) {
    const std::string prefix = "# " + key + " ";
    if (l.rfind(prefix, 0) != 0) reader.fail("expected header '" + key + "'");
    return l.substr(prefix.size());
  };

  if (!reader.next(line)) reader.fail("truncated header");
  record.config_hash = header_tail(line, "config_hash");
  if (record.config_hash == "-") record.config_hash.clear();

  if (!reader.next(line)) reader.fail("truncated header");
  record.seed = std::stoull(header_tail(line, "seed"));

  if (!reader.next(line)) reader.fail("truncated header");
  const std::string outcome = header_tail(line, "outcome");
  bool matched = false;
  for (RunOutcome o : {RunOutcome::kCompleted, RunOutcome::kCrash, RunOutcome::kCollision,
                       RunOutcome::kDiverged}) {
    if (outcome == outcome_name(o)) {
      record.outcome = o;
      matched = true;
    }
  }
  if (!matched) reader.fail("unknown outcome '" + outcome + "'");

  if (record.outcome != RunOutcome::kCompleted) {
    if (!reader.next(line)) reader.fail("truncated header");
    record.failure_time = std::stod(header_tail(line, "failure_time"));
    if (!reader.next(line)) reader.fail("truncated header");
    record.failure_vehicle = std::stoi(header_tail(line, "failure_vehicle"));
  }

  if (!reader.next(line)) reader.fail("truncated header");
  {
    std::istringstream ss(header_tail(line, "window"));
    if (!(ss >> record.window_begin >> record.window_end)) reader.fail("malformed window");
  }

  if (!reader.next(line)) reader.fail("truncated header");
  const int n_vehicles = std::stoi(header_tail(line, "vehicles"));
  if (n_vehicles < 1 || n_vehicles > 64) reader.fail("implausible vehicle count");
  record.vehicles.resize(static_cast<std::size_t>(n_vehicles));

  for (int i = 0; i < n_vehicles; ++i) {
    if (!reader.next(line)) reader.fail("truncated vehicle header");
    std::istringstream ss(line);
    std::string hash_mark, tag, key;
    int idx = -1;
    ss >> hash_mark >> tag >> idx;
    if (hash_mark != "#" || tag != "vehicle" || idx != i) reader.fail("malformed vehicle header");
    auto& v = record.vehicles[static_cast<std::size_t>(i)];
    int valid = 0;
    while (ss >> key) {
      if (key == "role") ss >> v.role;
      else if (key == "variant") ss >> v.variant;
      else if (key == "rate_hz") ss >> v.rate_hz;
      else if (key == "metrics_valid") ss >> valid;
      else if (key == "rmse") ss >> v.metrics.rmse;
      else if (key == "z_max") ss >> v.metrics.z_max;
      else reader.fail("unknown vehicle header key '" + key + "'");
    }
    v.metrics_valid = valid != 0;
  }

  if (!reader.next(line)) reader.fail("missing columns header");
  if (line != std::string("# columns ") + kColumns) reader.fail("unexpected column layout");

  while (reader.next(line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<double> vals;
    vals.reserve(kNumColumns);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) reader.fail("malformed value '" + cell + "'");
      } catch (const std::invalid_argument&) {
        reader.fail("malformed value '" + cell + "'");
      }
    }
    if (static_cast<int>(vals.size()) != kNumColumns)
      reader.fail("expected " + std::to_string(kNumColumns) + " columns, got " +
                  std::to_string(vals.size()));
    const int vid = static_cast<int>(vals[1]);
    if (vid < 0 || vid >= n_vehicles) reader.fail("vehicle index out of range");

    TickLog k;
    k.t = vals[0];
    for (int d = 0; d < 10; ++d) k.state(d) = vals[2 + d];
    for (int d = 0; d < 3; ++d) k.p_ref(d) = vals[12 + d];
    for (int d = 0; d < 3; ++d) k.v_ref(d) = vals[15 + d];
    for (int d = 0; d < 4; ++d) k.input(d) = vals[18 + d];
    for (int d = 0; d < 3; ++d) k.sigma_hat(d) = vals[22 + d];
    for (int d = 0; d < 3; ++d) k.u_sigma(d) = vals[25 + d];
    for (int d = 0; d < 3; ++d) k.plant_force(d) = vals[28 + d];
    k.kkt = vals[31];
    k.qp_iterations = static_cast<int>(vals[32]);
    k.active_set = static_cast<int>(vals[33]);
    k.degraded = static_cast<int>(vals[34]);
    k.l1_reset = static_cast<int>(vals[35]);
    record.vehicles[static_cast<std::size_t>(vid)].ticks.push_back(k);
  }
  return record;
}

}  // namespace dwmpc
