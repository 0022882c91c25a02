#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "kowalevski/coordinate_nets.hpp"

namespace kowalevski::cli {

enum ExitCode : int { kExitPass = 0, kExitInput = 1, kExitVerification = 2, kExitNumerical = 3 };

struct CommandResult {
  int exit_code = kExitPass;
  std::string summary;
  std::vector<std::string> warnings;
  // name -> text of every file written, in order of writing.
  std::vector<std::pair<std::string, std::string>> files;
  nlohmann::ordered_json report;
};

CommandResult cmd_simulate(const ScenarioConfig& cfg);
CommandResult cmd_separate(const ScenarioConfig& cfg);
CommandResult cmd_region(const ScenarioConfig& cfg);
CommandResult cmd_verify(const ScenarioConfig& cfg);

// A boundary line a s1 + b s2 + c = 0 of the accessible region.
struct RegionLine {
  std::string name;
  double a = 0.0, b = 0.0, c = 0.0;
};

struct BoundarySegment {
  std::string line;
  SPoint start, end;
};

// Lines that can carry the boundary of the selected subsystem's region.
std::vector<RegionLine> region_lines(const ScenarioConfig& cfg);
// Membership predicate of the selected subsystem's region.
bool region_contains(const ScenarioConfig& cfg, const SPoint& sp, double tol = 0.0);
// Boundary segments inside the window, traced along region_lines.
std::vector<BoundarySegment> trace_region_boundary(const ScenarioConfig& cfg, const std::array<double, 2>& s1_range,
                                                   const std::array<double, 2>& s2_range, int samples_per_line);
std::array<double, 2> default_s1_range(const ScenarioConfig& cfg);
std::array<double, 2> default_s2_range(const ScenarioConfig& cfg);

// Maps library errors to exit codes and writes the files of the result
// under cfg.output_dir.
int run_command(const std::string& name, const ScenarioConfig& cfg, std::ostream& out, std::ostream& err);

// Entry point of the executable; argv as given to main.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kowalevski::cli
