#include <doctest.h>

#include <cmath>

#include "dwmpc/rigid_body.hpp"
#include "dwmpc/rng.hpp"

using namespace dwmpc;

namespace {

Vec4 random_unit_quat(Rng& rng) {
  Vec4 q;
  for (int i = 0; i < 4; ++i) q(i) = rng.normal();
  return q / q.norm();
}

}  // namespace

TEST_CASE("hover is an equilibrium of the nominal dynamics") {
  QuadParams params;
  QuadState x;
  const ControlInput u{params.hover_thrust(), Vec3::Zero()};
  const Vec10 dx = f_nom(x, u, params);
  CHECK(dx.segment<3>(0).norm() == 0.0);
  CHECK(dx.segment<3>(3).norm() < 1e-15);
  CHECK(dx.segment<4>(6).norm() == 0.0);
}

TEST_CASE("thrust-free dynamics reduce to free fall exactly") {
  QuadParams params;
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    QuadState x;
    x.q = random_unit_quat(rng);
    const Vec10 dx = f_nom(x, ControlInput{0.0, Vec3::Zero()}, params);
    CHECK(dx.segment<3>(3) == -params.gravity);
  }
}

TEST_CASE("quaternion rate at identity attitude matches the rate map") {
  QuadParams params;
  QuadState x;
  const Vec10 dx = f_nom(x, ControlInput{0.0, Vec3{0.0, 0.0, 1.0}}, params);
  CHECK(dx(6) == 0.0);
  CHECK(dx(7) == 0.0);
  CHECK(dx(8) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(dx(9) == 0.0);
}

TEST_CASE("quaternion derivative is orthogonal to the quaternion") {
  QuadParams params;
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    QuadState x;
    x.q = random_unit_quat(rng);
    const Vec3 omega{rng.normal(), rng.normal(), rng.normal()};
    const Vec10 dx = f_nom(x, ControlInput{0.1, omega}, params);
    CHECK(std::abs(x.q.dot(dx.segment<4>(6))) < 1e-9);
  }
}

TEST_CASE("rotation matrix basics") {
  CHECK(quat_to_rotation(Vec4{0, 0, 0, 1}).isIdentity(1e-15));

  const double s = std::sin(M_PI / 4.0), c = std::cos(M_PI / 4.0);
  const Mat3 r = quat_to_rotation(Vec4{0.0, 0.0, s, c});
  CHECK((r * Vec3::UnitX() - Vec3::UnitY()).norm() < 1e-12);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat3 rr = quat_to_rotation(random_unit_quat(rng));
    CHECK((rr.transpose() * rr - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(rr.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }

  CHECK_THROWS_AS(quat_to_rotation(Vec4::Zero()), InvalidStateError);
}

TEST_CASE("rate map matches its printed entries and is orthogonal to q") {
  Rng rng(5);
  const Mat3x4 gi = g_matrix(Vec4{0, 0, 0, 1});
  CHECK(gi(0, 0) == 1.0);
  CHECK(gi(0, 1) == 0.0);
  CHECK(gi(0, 2) == 0.0);
  CHECK(gi(0, 3) == 0.0);
  CHECK(gi(1, 1) == 1.0);
  CHECK(gi(2, 2) == 1.0);

  for (int trial = 0; trial < 50; ++trial) {
    const Vec4 q = random_unit_quat(rng);
    const Mat3x4 g = g_matrix(q);
    // Row-by-row against the closed form.
    CHECK(g(0, 0) == q(3));
    CHECK(g(0, 1) == q(2));
    CHECK(g(0, 2) == -q(1));
    CHECK(g(0, 3) == -q(0));
    CHECK(g(1, 0) == -q(2));
    CHECK(g(1, 1) == q(3));
    CHECK(g(1, 2) == q(0));
    CHECK(g(1, 3) == -q(1));
    CHECK(g(2, 0) == q(1));
    CHECK(g(2, 1) == -q(0));
    CHECK(g(2, 2) == q(3));
    CHECK(g(2, 3) == -q(2));
    CHECK((g * q).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((g_matrix(-q) + g).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("rk4 free fall matches constant-acceleration kinematics") {
  QuadParams params;
  QuadState x;
  const QuadState next = rk4_step_nominal(x, ControlInput{0.0, Vec3::Zero()}, params, 0.01);
  CHECK(next.v.z() == doctest::Approx(-0.0981).epsilon(1e-14));
  CHECK(next.p.z() == doctest::Approx(-4.905e-4).epsilon(1e-14));
}

TEST_CASE("rk4 hover leaves the state unchanged") {
  QuadParams params;
  QuadState x;
  x.p = Vec3{0.3, -0.2, 1.5};
  QuadState next = x;
  for (int i = 0; i < 100; ++i)
    next = rk4_step_nominal(next, ControlInput{params.hover_thrust(), Vec3::Zero()}, params, 1e-3);
  CHECK((next.p - x.p).norm() < 1e-12);
  CHECK(next.v.norm() < 1e-12);
  CHECK((next.q - x.q).norm() < 1e-12);
}

TEST_CASE("rk4 converges at fourth order on the closed-form rotation") {
  QuadParams params;
  const double w = 2.0;
  const ControlInput u{params.hover_thrust(), Vec3{0.0, 0.0, w}};
  const double t_end = 1.0;

  const auto run = [&](double dt) {
    QuadState x;
    const int steps = static_cast<int>(std::llround(t_end / dt));
    for (int i = 0; i < steps; ++i) x = rk4_step_nominal(x, u, params, dt);
    const Vec4 exact{0.0, 0.0, std::sin(0.5 * w * t_end), std::cos(0.5 * w * t_end)};
    return (x.q - exact).norm();
  };

  const double e1 = run(0.04);
  const double e2 = run(0.02);
  const double ratio = e1 / e2;
  CHECK(ratio > 16.0 * 0.8);
  CHECK(ratio < 16.0 * 1.2);
}

TEST_CASE("quaternion norm is renormalized after every step") {
  QuadParams params;
  Rng rng(23);
  QuadState x;
  for (int i = 0; i < 500; ++i) {
    const ControlInput u{0.3, Vec3{rng.normal(), rng.normal(), rng.normal()}};
    x = rk4_step(
        [&params](const QuadState& s, const ControlInput& c) { return f_nom(s, c, params); }, x, u,
        0.005);
    CHECK(std::abs(x.q.norm() - 1.0) < 1e-9);
    CHECK(x.q(3) >= 0.0);
  }
}

TEST_CASE("dynamics are affine in thrust") {
  QuadParams params;
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    QuadState x;
    x.q = random_unit_quat(rng);
    x.v = Vec3{rng.normal(), rng.normal(), rng.normal()};
    const double thrust = 0.1 + 0.2 * rng.uniform01();
    const ControlInput u1{thrust, Vec3::Zero()};
    const ControlInput u2{2.0 * thrust, Vec3::Zero()};
    const Vec3 a1 = f_nom(x, u1, params).segment<3>(3) + params.gravity;
    const Vec3 a2 = f_nom(x, u2, params).segment<3>(3) + params.gravity;
    CHECK((a2 - 2.0 * a1).norm() < 1e-14);
  }
}

TEST_CASE("ballistic flight conserves energy to far below the budget") {
  QuadParams params;
  QuadState x;
  x.p = Vec3{0, 0, 5};
  x.v = Vec3{1.0, 0.0, 2.0};
  const double g = params.gravity.norm();
  const auto energy = [&](const QuadState& s) {
    return 0.5 * params.mass * s.v.squaredNorm() + params.mass * g * s.p.z();
  };
  const double e0 = energy(x);
  for (int i = 0; i < 1000; ++i)
    x = rk4_step_nominal(x, ControlInput{0.0, Vec3::Zero()}, params, 1e-3);
  CHECK(std::abs(energy(x) - e0) < 1e-8);
}

TEST_CASE("non-finite inputs are rejected") {
  QuadParams params;
  QuadState x;
  x.v(0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(f_nom(x, ControlInput{0.1, Vec3::Zero()}, params), InvalidStateError);
  QuadState ok;
  ControlInput bad{std::numeric_limits<double>::infinity(), Vec3::Zero()};
  CHECK_THROWS_AS(f_nom(ok, bad, params), InvalidStateError);
  CHECK_THROWS_AS(rk4_step_nominal(ok, ControlInput{0.1, Vec3::Zero()}, params, 0.0),
                  IntegrationError);
}

TEST_CASE("quad params validation") {
  QuadParams p;
  CHECK_NOTHROW(p.validate());
  p.thrust_max = 0.1;  // below hover
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = QuadParams{};
  p.mass = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}
