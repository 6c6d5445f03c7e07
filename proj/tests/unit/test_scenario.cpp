#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dwmpc/scenario.hpp"

using namespace dwmpc;

namespace {

const char* kMinimalConfig = R"json({
  "formation": {"kind": "i_stack", "z1": 0.2, "z2": 0.4},
  "trajectory": {"kind": "line"},
  "vehicles": [
    {"controller": "mpc"},
    {"controller": "l1_mpc", "rate_hz": 400},
    {"controller": "l1_dw_mpc"}
  ]
})json";

Scenario parse(const std::string& text) {
  return parse_scenario_text(text, "test.json", std::filesystem::temp_directory_path());
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const Scenario s = parse(kMinimalConfig);
  CHECK(s.formation.kind == Formation::Kind::kIStack);
  CHECK(s.vehicles.size() == 3);
  CHECK(s.vehicles[0].rate_hz == 200.0);
  CHECK(s.vehicles[1].rate_hz == 400.0);
  CHECK(s.vehicles[2].rate_hz == 400.0);
  CHECK(s.plant_rate_hz == 2000.0);
  CHECK(s.seeds.size() == 5);
  CHECK(s.solver.horizon == 20);
}

TEST_CASE("unknown keys are rejected everywhere") {
  const char* bad_top = R"({"formation": {"kind": "i_stack"}, "trajectory": {"kind": "line"},
    "vehicles": [{"controller": "mpc"}], "typo_key": 1})";
  CHECK_THROWS_WITH_AS(parse(bad_top), doctest::Contains("typo_key"), ParseError);

  const char* bad_nested = R"({"formation": {"kind": "i_stack", "zz1": 0.2},
    "trajectory": {"kind": "line"}, "vehicles": [{"controller": "mpc"}]})";
  CHECK_THROWS_WITH_AS(parse(bad_nested), doctest::Contains("zz1"), ParseError);

  const char* bad_vehicle = R"({"formation": {"kind": "i_stack"}, "trajectory": {"kind": "line"},
    "vehicles": [{"controller": "mpc", "weirdness": true}]})";
  CHECK_THROWS_WITH_AS(parse(bad_vehicle), doctest::Contains("weirdness"), ParseError);
}

TEST_CASE("json syntax errors carry line and column") {
  const char* broken = "{\n  \"formation\": {\"kind\": \"i_stack\",}\n}";
  try {
    parse(broken);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    const std::string what = e.what();
    CHECK(what.find("test.json:2:") != std::string::npos);
  }
}

TEST_CASE("knode variants demand an existing weights file") {
  const char* missing = R"({"formation": {"kind": "i_stack"}, "trajectory": {"kind": "line"},
    "vehicles": [{"controller": "mpc"}, {"controller": "knode_dw_mpc"}]})";
  try {
    parse(missing);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("vehicle 1") != std::string::npos);
  }

  const char* nonexistent = R"({"formation": {"kind": "i_stack"}, "trajectory": {"kind": "line"},
    "vehicles": [{"controller": "knode_dw_mpc", "weights": "no_such_file_xyz.txt"}]})";
  CHECK_THROWS_AS(parse(nonexistent), ConfigError);
}

TEST_CASE("config hash is stable, seed-independent and content-sensitive") {
  Scenario a = parse(kMinimalConfig);
  Scenario b = parse(kMinimalConfig);
  CHECK(scenario_config_hash(a) == scenario_config_hash(b));

  b.seeds = {42};
  CHECK(scenario_config_hash(a) == scenario_config_hash(b));  // seeds excluded

  b = parse(kMinimalConfig);
  b.formation.z2 = 0.3;
  CHECK(scenario_config_hash(a) != scenario_config_hash(b));
}

TEST_CASE("scenario file parse and compile round trip") {
  const auto dir = std::filesystem::temp_directory_path();
  const auto path = dir / "dwmpc_test_scenario.json";
  {
    std::ofstream out(path);
    out << kMinimalConfig;
  }
  const Scenario s = parse_scenario_file(path);
  const CompiledScenario compiled = compile_scenario(s);
  REQUIRE(compiled.setup.vehicles.size() == 3);
  CHECK(compiled.setup.vehicles[0].role == "bottom");
  CHECK(compiled.setup.vehicles[1].role == "center");
  CHECK(compiled.setup.vehicles[2].role == "top");
  CHECK((compiled.setup.vehicles[1].offset - Vec3{0.0, 0.0, 0.4}).norm() < 1e-15);
  CHECK((compiled.setup.vehicles[2].offset - Vec3{0.0, 0.0, 0.6}).norm() < 1e-15);
  std::filesystem::remove(path);
}

TEST_CASE("formation invariant propagates through parsing") {
  const char* bad = R"({"formation": {"kind": "i_stack", "r": 0.1},
    "trajectory": {"kind": "line"}, "vehicles": [{"controller": "mpc"}]})";
  CHECK_THROWS_AS(parse(bad), ConfigError);
}
