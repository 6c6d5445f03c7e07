#pragma once

#include <Eigen/Dense>

namespace dwmpc {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Vec10 = Eigen::Matrix<double, 10, 1>;
using Mat10 = Eigen::Matrix<double, 10, 10>;
using Mat10x4 = Eigen::Matrix<double, 10, 4>;
using Mat3x4 = Eigen::Matrix<double, 3, 4>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Translational and rotational state of one vehicle.
/// The quaternion is body->world, stored as (qx, qy, qz, qw).
struct QuadState {
  Vec3 p{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};
  Vec4 q{0.0, 0.0, 0.0, 1.0};

  Vec10 to_vector() const {
    Vec10 x;
    x.segment<3>(0) = p;
    x.segment<3>(3) = v;
    x.segment<4>(6) = q;
    return x;
  }

  static QuadState from_vector(const Vec10& x) {
    QuadState s;
    s.p = x.segment<3>(0);
    s.v = x.segment<3>(3);
    s.q = x.segment<4>(6);
    return s;
  }

  bool finite() const { return to_vector().allFinite(); }
};

/// Commanded collective thrust [N] and body rates [rad/s].
struct ControlInput {
  double thrust{0.0};
  Vec3 omega{Vec3::Zero()};

  Vec4 to_vector() const { return Vec4{thrust, omega.x(), omega.y(), omega.z()}; }

  static ControlInput from_vector(const Vec4& u) {
    return ControlInput{u(0), Vec3{u(1), u(2), u(3)}};
  }

  bool finite() const { return std::isfinite(thrust) && omega.allFinite(); }
};

/// Physical constants of one vehicle. Defaults approximate a small 34 g
/// quadrotor with a thrust-upgraded power train.
struct QuadParams {
  double mass{0.034};            // kg
  Vec3 gravity{0.0, 0.0, 9.81};  // world frame, enters the velocity equation as -gravity
  double diameter{0.1};          // m, body length, also the collision distance
  double thrust_max{0.70};       // N
  double rate_max{10.0};         // rad/s per axis

  double hover_thrust() const { return mass * gravity.norm(); }

  /// Throws ConfigError unless mass/diameter are positive and hover is feasible.
  void validate() const;
};

}  // namespace dwmpc
