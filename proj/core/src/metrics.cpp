#include "dwmpc/metrics.hpp"

#include <cmath>
#include <map>

namespace dwmpc {

Metrics compute_metrics(const std::vector<ErrorSample>& samples, double window_begin,
                        double window_end) {
  double sum_sq = 0.0;
  double z_max = 0.0;
  std::size_t n = 0;
  for (const auto& s : samples) {
    if (s.t < window_begin || s.t > window_end) continue;
    sum_sq += (s.p - s.p_ref).squaredNorm();
    z_max = std::max(z_max, std::abs(s.p.z() - s.p_ref.z()));
    ++n;
  }
  if (n == 0) throw DimensionError("compute_metrics: no samples inside the tracking window");
  return Metrics{std::sqrt(sum_sq / static_cast<double>(n)), z_max};
}

std::vector<GroupStats> aggregate_stats(const std::vector<RunSummary>& runs) {
  std::map<std::string, std::vector<const RunSummary*>> groups;
  for (const auto& r : runs) groups[r.group].push_back(&r);

  std::vector<GroupStats> out;
  for (const auto& [name, members] : groups) {
    for (const auto* m : members)
      if (m->config_hash != members.front()->config_hash)
        throw ConfigError("aggregate_stats: mixed configurations in group '" + name + "'");

    GroupStats g;
    g.group = name;
    std::vector<double> rmse, zmax;
    for (const auto* m : members) {
      if (!m->completed) {
        ++g.failed;
        continue;
      }
      ++g.completed;
      rmse.push_back(m->metrics.rmse);
      zmax.push_back(m->metrics.z_max);
    }
    auto mean_std = [](const std::vector<double>& xs) {
      if (xs.empty()) return std::pair<double, double>{0.0, 0.0};
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      var = xs.size() > 1 ? var / static_cast<double>(xs.size() - 1) : 0.0;
      return std::pair<double, double>{mean, std::sqrt(var)};
    };
    std::tie(g.rmse_mean, g.rmse_std) = mean_std(rmse);
    std::tie(g.zmax_mean, g.zmax_std) = mean_std(zmax);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace dwmpc
