#include <doctest.h>

#include <cmath>

#include "dwmpc/downwash.hpp"

using namespace dwmpc;

namespace {

QuadState at(double x, double y, double z) {
  QuadState s;
  s.p = Vec3{x, y, z};
  return s;
}

}  // namespace

TEST_CASE("jet force directly below the clamp distance equals the full strength") {
  DwParams p;
  const double thrust = 0.4;
  const Vec3 f = pairwise_dw_force(at(0, 0, 0), at(0, 0, p.z_clamp), thrust, p);
  CHECK(f.x() == 0.0);
  CHECK(f.y() == 0.0);
  CHECK(f.z() == doctest::Approx(-p.jet_strength * thrust).epsilon(1e-14));
}

TEST_CASE("axial decay is quadratic") {
  DwParams p;
  const double thrust = 0.4;
  const Vec3 f = pairwise_dw_force(at(0, 0, 0), at(0, 0, 2.0 * p.z_clamp), thrust, p);
  CHECK(f.z() == doctest::Approx(-p.jet_strength * thrust / 4.0).epsilon(1e-14));
}

TEST_CASE("radial Gaussian tail vanishes") {
  DwParams p;
  const double dz = 2.0 * p.z_clamp;
  const double width = p.core_width + p.spread_rate * dz;
  const double rho = 10.0 * width;
  const Vec3 f = pairwise_dw_force(at(0, 0, 0), at(rho, 0, dz), 0.4, p);
  CHECK(std::abs(f.z()) < 1e-12);
}

TEST_CASE("force magnitude is monotone non-increasing in separation and offset") {
  DwParams p;
  double prev = 1e9;
  for (double dz = 0.05; dz < 1.0; dz += 0.01) {
    const double mag = std::abs(pairwise_dw_force(at(0, 0, 0), at(0, 0, dz), 0.4, p).z());
    CHECK(mag <= prev + 1e-15);
    prev = mag;
  }
  prev = 1e9;
  for (double rho = 0.0; rho < 1.0; rho += 0.01) {
    const double mag = std::abs(pairwise_dw_force(at(0, 0, 0), at(rho, 0, 0.3), 0.4, p).z());
    CHECK(mag <= prev + 1e-15);
    prev = mag;
  }
}

TEST_CASE("the source must be strictly above the ego") {
  DwParams p;
  CHECK_THROWS_AS(pairwise_dw_force(at(0, 0, 1), at(0, 0, 1), 0.4, p), InvalidStateError);
  CHECK_THROWS_AS(pairwise_dw_force(at(0, 0, 1), at(0, 0, 0.5), 0.4, p), InvalidStateError);
}

TEST_CASE("aggregation follows the strict-above pairwise sum") {
  DwParams p;
  const QuadState ego = at(0, 0, 1);

  SUBCASE("empty neighborhood gives exactly zero") {
    CHECK(aggregate_downwash(ego, NeighborSet{}, {}, p, 0.3) == Vec3::Zero());
  }
  SUBCASE("neighbors at or below contribute nothing") {
    NeighborSet nbrs;
    nbrs.entries.push_back({1, at(0, 0, 1.0)});
    nbrs.entries.push_back({2, at(0.1, 0, 0.5)});
    CHECK(aggregate_downwash(ego, nbrs, {{1, 0.4}, {2, 0.4}}, p, 0.3) == Vec3::Zero());
  }
  SUBCASE("two identical sources double the single force exactly") {
    NeighborSet one, two;
    one.entries.push_back({1, at(0.05, 0, 1.3)});
    two.entries.push_back({1, at(0.05, 0, 1.3)});
    two.entries.push_back({2, at(0.05, 0, 1.3)});
    const Vec3 f1 = aggregate_downwash(ego, one, {{1, 0.4}, {2, 0.4}}, p, 0.3);
    const Vec3 f2 = aggregate_downwash(ego, two, {{1, 0.4}, {2, 0.4}}, p, 0.3);
    CHECK(f2 == 2.0 * f1);
  }
  SUBCASE("additive over neighbor subsets") {
    NeighborSet a, b, both;
    a.entries.push_back({1, at(0.0, 0.1, 1.2)});
    b.entries.push_back({2, at(-0.1, 0.0, 1.4)});
    both.entries = a.entries;
    both.entries.push_back(b.entries.front());
    const ThrustMap thrusts{{1, 0.35}, {2, 0.42}};
    const Vec3 fa = aggregate_downwash(ego, a, thrusts, p, 0.3);
    const Vec3 fb = aggregate_downwash(ego, b, thrusts, p, 0.3);
    const Vec3 fab = aggregate_downwash(ego, both, thrusts, p, 0.3);
    CHECK((fab - (fa + fb)).norm() == 0.0);
  }
  SUBCASE("missing thrust entries fall back to the given value") {
    NeighborSet nbrs;
    nbrs.entries.push_back({9, at(0, 0, 1.3)});
    const Vec3 f_fallback = aggregate_downwash(ego, nbrs, {}, p, 0.4);
    const Vec3 f_explicit = aggregate_downwash(ego, nbrs, {{9, 0.4}}, p, 0.0);
    CHECK(f_fallback == f_explicit);
  }
}

TEST_CASE("geometry invariances") {
  DwParams p;
  const Vec3 shift{1.7, -2.3, 0.4};
  const QuadState ego = at(0.1, 0.2, 1.0);
  const QuadState src = at(-0.05, 0.3, 1.25);

  QuadState ego_shifted = ego, src_shifted = src;
  ego_shifted.p += shift;
  src_shifted.p += shift;
  const Vec3 f0 = pairwise_dw_force(ego, src, 0.4, p);
  const Vec3 f1 = pairwise_dw_force(ego_shifted, src_shifted, 0.4, p);
  CHECK((f0 - f1).norm() < 1e-15);

  // Rotation about z keeps the vertical force unchanged.
  const double c = std::cos(0.7), s = std::sin(0.7);
  auto rotz = [&](const Vec3& v) { return Vec3{c * v.x() - s * v.y(), s * v.x() + c * v.y(), v.z()}; };
  QuadState ego_rot = ego, src_rot = src;
  ego_rot.p = rotz(ego.p);
  src_rot.p = rotz(src.p);
  const Vec3 f2 = pairwise_dw_force(ego_rot, src_rot, 0.4, p);
  CHECK(f2.z() == doctest::Approx(f0.z()).epsilon(1e-12));
}

TEST_CASE("neighborhood collection respects the range and excludes the ego") {
  const QuadState ego = at(0, 0, 1);
  std::vector<std::pair<int, QuadState>> all = {
      {0, ego}, {1, at(0.5, 0, 1)}, {2, at(5.0, 0, 1)}};
  const NeighborSet nbrs = neighbors_in_range(0, ego, all, 1.0);
  REQUIRE(nbrs.entries.size() == 1);
  CHECK(nbrs.entries[0].id == 1);
}

TEST_CASE("plant interaction reduces to the controller model in the degenerate case") {
  PlantInteractionParams plant;
  plant.dw = DwParams{};  // same as controller side
  plant.below_gain = 0.0;
  plant.noise_sigma = 0.0;
  plant.vel_skew = 0.0;

  const QuadState ego = at(0.1, -0.2, 1.0);
  const QuadState src = at(0.15, -0.1, 1.3);
  Rng rng(17);

  SUBCASE("no others and no noise gives zero") {
    const auto r = plant_interaction_force(ego, {}, OuState{}, plant, 5e-4, rng);
    CHECK(r.force == Vec3::Zero());
  }
  SUBCASE("matches aggregate downwash") {
    const auto r = plant_interaction_force(ego, {{src, 0.4}}, OuState{}, plant, 5e-4, rng);
    NeighborSet nbrs;
    nbrs.entries.push_back({1, src});
    const Vec3 expect = aggregate_downwash(ego, nbrs, {{1, 0.4}}, DwParams{}, 0.0);
    CHECK((r.force - expect).norm() == 0.0);
  }
}

TEST_CASE("vehicles below push the ego up") {
  PlantInteractionParams plant;
  plant.noise_sigma = 0.0;
  Rng rng(1);
  const auto r =
      plant_interaction_force(at(0, 0, 1.0), {{at(0, 0, 0.7), 0.4}}, OuState{}, plant, 5e-4, rng);
  CHECK(r.force.z() > 0.0);
  const double swapped = std::abs(dw_kernel(0.3, 0.0, 0.4, plant.dw));
  CHECK(r.force.z() == doctest::Approx(plant.below_gain * swapped).epsilon(1e-12));
}

TEST_CASE("lateral wake advection shifts the effective offset") {
  PlantInteractionParams plant;
  plant.noise_sigma = 0.0;
  Rng rng(1);
  QuadState src = at(0, 0, 1.3);
  src.v = Vec3{1.0, 0.0, 0.0};  // source moving +x relative to a hovering ego
  const auto moving =
      plant_interaction_force(at(0, 0, 1.0), {{src, 0.4}}, OuState{}, plant, 5e-4, rng);
  src.v.setZero();
  Rng rng2(1);
  const auto still =
      plant_interaction_force(at(0, 0, 1.0), {{src, 0.4}}, OuState{}, plant, 5e-4, rng2);
  CHECK(std::abs(moving.force.z()) < std::abs(still.force.z()));
}

TEST_CASE("ou noise matches its stationary variance") {
  PlantInteractionParams plant;
  plant.below_gain = 0.0;
  plant.vel_skew = 0.0;
  Rng rng(42);
  OuState state;
  const double dt = 0.005;
  double sum = 0.0, sum_sq = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const auto r = plant_interaction_force(at(0, 0, 1), {}, state, plant, dt, rng);
    state = r.noise;
    sum += state.value.x();
    sum_sq += state.value.x() * state.value.x();
  }
  const double mean = sum / n;
  const double var = sum_sq / n - mean * mean;
  CHECK(var == doctest::Approx(plant.noise_sigma * plant.noise_sigma).epsilon(0.05));
}

TEST_CASE("parameter validation") {
  DwParams p;
  CHECK_NOTHROW(p.validate());
  p.neighbor_range = p.z_clamp;  // violates range >= 2 z_clamp
  CHECK_THROWS_AS(p.validate(), ConfigError);
  PlantInteractionParams plant;
  plant.noise_tau = 0.0;
  CHECK_THROWS_AS(plant.validate(), ConfigError);
}
