#pragma once

#include <string>
#include <vector>

#include "dwmpc/errors.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

struct Metrics {
  double rmse{0.0};   // m, 3-D position error over the tracking window
  double z_max{0.0};  // m, max |p_z - ref_z| over the tracking window
};

/// One scored sample of a tracked trajectory.
struct ErrorSample {
  double t;
  Vec3 p;
  Vec3 p_ref;
};

/// RMSE and max vertical deviation over samples inside [window_begin, window_end].
/// Raises DimensionError when no sample falls inside the window.
Metrics compute_metrics(const std::vector<ErrorSample>& samples, double window_begin,
                        double window_end);

/// Per-group aggregate of run metrics.
struct GroupStats {
  std::string group;
  int completed{0};
  int failed{0};
  double rmse_mean{0.0};
  double rmse_std{0.0};
  double zmax_mean{0.0};
  double zmax_std{0.0};
};

struct RunSummary {
  std::string group;        // e.g. controller variant name
  std::string config_hash;  // all runs in a group must share it
  bool completed{true};
  Metrics metrics;
};

/// Sample mean and (n-1)-denominator standard deviation per group. Failed
/// runs are excluded from the statistics and counted separately. Raises
/// ConfigError when records in one group carry different config hashes.
std::vector<GroupStats> aggregate_stats(const std::vector<RunSummary>& runs);

}  // namespace dwmpc
