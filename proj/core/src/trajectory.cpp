#include "dwmpc/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace dwmpc {

namespace {

struct ArcPoint {
  double s;  // arc position
  double v;  // arc speed
};

double ramp_time(double length, double vmax, double accel) {
  const double tr = vmax / accel;
  if (accel * tr * tr > length) return std::sqrt(length / accel);  // triangular profile
  return tr;
}

double profile_duration(double length, double vmax, double accel) {
  const double tr = ramp_time(length, vmax, accel);
  const double vp = accel * tr;
  const double cruise = (length - accel * tr * tr) / vp;
  return 2.0 * tr + std::max(0.0, cruise);
}

ArcPoint profile_eval(double tau, double length, double vmax, double accel) {
  const double tr = ramp_time(length, vmax, accel);
  const double vp = accel * tr;
  const double total = profile_duration(length, vmax, accel);
  tau = std::clamp(tau, 0.0, total);
  if (tau < tr) return {0.5 * accel * tau * tau, accel * tau};
  if (tau < total - tr) return {0.5 * accel * tr * tr + vp * (tau - tr), vp};
  const double left = total - tau;
  return {length - 0.5 * accel * left * left, accel * left};
}

}  // namespace

void TrajectorySpec::validate() const {
  if (!(hover_lead >= 0.0) || !(hover_tail >= 0.0))
    throw ConfigError("trajectory: hover bookends must be non-negative");
  switch (kind) {
    case Kind::kHover:
      if (!(hover_duration > 0.0)) throw ConfigError("trajectory: hover duration must be positive");
      break;
    case Kind::kLine:
      if (!(length > 0.0) || !(cruise_speed > 0.0) || !(accel > 0.0))
        throw ConfigError("trajectory: line length/speed/accel must be positive");
      if (direction.norm() < 1e-12) throw ConfigError("trajectory: line direction must be nonzero");
      break;
    case Kind::kLemniscate:
      if (!(lap_time > 0.0)) throw ConfigError("trajectory: lap_time must be positive");
      break;
  }
}

double TrajectorySpec::duration() const {
  switch (kind) {
    case Kind::kHover:
      return hover_duration;
    case Kind::kLine:
      return hover_lead + profile_duration(length, cruise_speed, accel) + hover_tail;
    case Kind::kLemniscate: {
      const double theta_rate = 2.0 * M_PI / lap_time;
      return hover_lead + profile_duration(2.0 * M_PI, theta_rate, theta_rate) + hover_tail;
    }
  }
  return hover_duration;
}

std::pair<double, double> TrajectorySpec::tracking_window() const {
  if (kind == Kind::kHover) return {std::min(hover_lead, hover_duration), hover_duration};
  return {hover_lead, duration() - hover_tail};
}

RefPoint reference_trajectory(const TrajectorySpec& spec, double t) {
  spec.validate();
  t = std::max(t, 0.0);
  RefPoint ref;
  ref.p = spec.start;

  switch (spec.kind) {
    case TrajectorySpec::Kind::kHover:
      return ref;
    case TrajectorySpec::Kind::kLine: {
      const Vec3 dir = spec.direction.normalized();
      const double tau = t - spec.hover_lead;
      if (tau <= 0.0) return ref;
      const ArcPoint a = profile_eval(tau, spec.length, spec.cruise_speed, spec.accel);
      ref.p = spec.start + a.s * dir;
      ref.v = a.v * dir;
      return ref;
    }
    case TrajectorySpec::Kind::kLemniscate: {
      const double theta_rate = 2.0 * M_PI / spec.lap_time;
      const double tau = t - spec.hover_lead;
      if (tau <= 0.0) return ref;
      const ArcPoint a = profile_eval(tau, 2.0 * M_PI, theta_rate, theta_rate);
      const double th = a.s;
      ref.p = spec.start + Vec3{spec.amp_x * std::sin(th), spec.amp_y * std::sin(2.0 * th), 0.0};
      ref.v = Vec3{spec.amp_x * std::cos(th), 2.0 * spec.amp_y * std::cos(2.0 * th), 0.0} * a.v;
      return ref;
    }
  }
  return ref;
}

}  // namespace dwmpc
