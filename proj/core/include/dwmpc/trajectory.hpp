#pragma once

#include <utility>

#include "dwmpc/errors.hpp"
#include "dwmpc/types.hpp"

namespace dwmpc {

/// Reference trajectory specification. The default is a straight line with a
/// trapezoidal speed profile and hover bookends; alternatives are hover-only
/// and a figure-eight. All variants are C1 in time.
struct TrajectorySpec {
  enum class Kind { kHover, kLine, kLemniscate };
  Kind kind{Kind::kLine};
  Vec3 start{0.0, 0.0, 1.0};

  // Line parameters.
  Vec3 direction{1.0, 0.0, 0.0};  // normalized internally
  double length{2.0};             // m
  double cruise_speed{0.5};       // m/s
  double accel{0.5};              // m/s^2

  // Lemniscate parameters (x = ax sin, y = ay sin 2., same hover bookends).
  double amp_x{0.8};
  double amp_y{0.5};
  double lap_time{8.0};  // s per figure-eight lap at full speed

  double hover_lead{3.0};  // s
  double hover_tail{3.0};  // s
  double hover_duration{10.0};  // s, hover-only total

  void validate() const;

  /// Total duration implied by the parameters.
  double duration() const;

  /// Time window over which tracking metrics are scored (lead-in/out excluded).
  std::pair<double, double> tracking_window() const;
};

struct RefPoint {
  Vec3 p{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};

  /// Full reference state with identity attitude.
  Vec10 to_state() const {
    Vec10 x = Vec10::Zero();
    x.segment<3>(0) = p;
    x.segment<3>(3) = v;
    x(9) = 1.0;
    return x;
  }
};

/// Evaluates the reference at time t. Times beyond the end continue the
/// terminal hover so receding-horizon windows stay well defined.
RefPoint reference_trajectory(const TrajectorySpec& spec, double t);

}  // namespace dwmpc
