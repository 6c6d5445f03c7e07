#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "dwmpc/formation.hpp"
#include "dwmpc/simulate.hpp"

namespace dwmpc {

/// User-facing scenario: a formation, a shared base trajectory, per-vehicle
/// controller assignments and the plant truth. Vehicle index 0 is the bottom
/// of the stack, 1 the center, 2 the top.
struct Scenario {
  Formation formation;
  TrajectorySpec trajectory;

  struct Vehicle {
    ControllerVariant variant{ControllerVariant::kMpc};
    double rate_hz{200.0};
    L1Config l1;
    DwParams dw;
    std::string weights_path;  // required by the KNODE variants
  };
  std::vector<Vehicle> vehicles;

  QuadParams quad;
  PlantInteractionParams plant;
  OcpConfig solver;
  double plant_rate_hz{2000.0};
  double measurement_noise_std{0.0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  double duration{0.0};  // <= 0: trajectory duration

  void validate() const;
};

/// Strict parse: unknown keys anywhere are rejected; parse failures report
/// line and column; referenced weight files must exist. Relative weight paths
/// resolve against the config file's directory.
Scenario parse_scenario_file(const std::filesystem::path& path);

/// Same, from a JSON string (diagnostics use the given name).
Scenario parse_scenario_text(const std::string& text, const std::string& name,
                             const std::filesystem::path& base_dir);

/// Canonical JSON round-trip of a scenario (used for hashing and provenance).
std::string scenario_to_canonical_json(const Scenario& s);

/// FNV-1a content digest of the canonical form, as fixed-width hex.
std::string scenario_config_hash(const Scenario& s);

/// Scenario compiled to a runnable setup; owns the loaded weight files the
/// setup points into.
struct CompiledScenario {
  SimSetup setup;
  std::vector<std::unique_ptr<Mlp>> weights;
};

CompiledScenario compile_scenario(const Scenario& s);

/// Compiles and runs one seed.
RunRecord run_scenario(const Scenario& s, std::uint64_t seed);

}  // namespace dwmpc
