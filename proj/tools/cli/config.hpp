#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kowalevski/critical_set.hpp"
#include "kowalevski/integrator.hpp"
#include "kowalevski/rigid_core.hpp"

namespace kowalevski::cli {

enum class Subsystem { General, M, N, O };

std::string subsystem_name(Subsystem s);

struct Tolerances {
  double rel = 1e-10;
  double abs = 1e-12;
  // simulate: largest admissible relative drift of H, K, G.
  double drift = 1e-8;
  // separate: largest admissible deviation from the direct flow.
  double deviation = 1e-5;
};

struct RegionSpec {
  int grid = 200;
  // Window of the (s1, s2) plane; empty picks a window from a and b.
  std::optional<std::array<double, 2>> s1_range;
  std::optional<std::array<double, 2>> s2_range;
};

struct VerifySpec {
  long draws = 1000;
  // Test hook: "phi2_sign" flips the sign of Phi2 in the master identity.
  std::string fault;
};

struct ScenarioConfig {
  double a = 1.0;
  double b = 0.4;
  Subsystem subsystem = Subsystem::General;
  SubsystemNConstants n{1.0, 2.5};
  SubsystemOConstants o{-0.6, 1.2};
  // Initial data: separated coordinates (s1, s2) or (t1, t2), or a phase state.
  std::optional<std::array<double, 2>> separated;
  std::optional<PhaseState> phase;
  std::optional<std::vector<int>> branch_bits;
  double t_begin = 0.0;
  double t_end = 1.0;
  Tolerances tol;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int samples = 101;
  RegionSpec region;
  VerifySpec verify;

  BodyParams params() const { return BodyParams(a, b); }
  IntegrationConfig integration() const;
};

// Throws InputError on malformed documents: unknown keys, wrong types,
// values that violate the preconditions of the selected subsystem.
ScenarioConfig parse_config(const nlohmann::json& doc);
ScenarioConfig load_config(const std::string& path);

// Config as JSON, for the reports.
nlohmann::ordered_json config_summary(const ScenarioConfig& cfg);

}  // namespace kowalevski::cli
