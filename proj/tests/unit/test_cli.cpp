#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "commands.hpp"
#include "config.hpp"
#include "io.hpp"
#include "kowalevski/errors.hpp"

using namespace kowalevski;
using namespace kowalevski::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("kowalevski_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

json ref_level() {
  return json::parse(R"({"params": {"a": 1.0, "b": 0.4}, "subsystem": "O",
                         "constants": {"s": -0.6, "tau": 1.2}, "initial": {"t1": 0.3, "t2": -1.5}})");
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun invoke(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"kowalevski"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

CliRun cli_with(const std::string& command, const json& doc, const fs::path& dir, std::vector<std::string> extra = {}) {
  const fs::path cfg = dir / "config.json";
  std::ofstream(cfg) << doc.dump();
  std::vector<std::string> args{command, "--config", cfg.string(), "--out", (dir / "out").string()};
  args.insert(args.end(), extra.begin(), extra.end());
  return invoke(args);
}

}  // namespace

TEST(ParseConfig, DefaultsAndFields) {
  const ScenarioConfig cfg = parse_config(ref_level());
  EXPECT_EQ(cfg.subsystem, Subsystem::O);
  EXPECT_DOUBLE_EQ(cfg.o.s, -0.6);
  EXPECT_DOUBLE_EQ(cfg.o.tau, 1.2);
  ASSERT_TRUE(cfg.separated.has_value());
  EXPECT_DOUBLE_EQ((*cfg.separated)[1], -1.5);
  EXPECT_DOUBLE_EQ(cfg.t_end, 1.0);
  EXPECT_EQ(cfg.verify.draws, 1000);
}

TEST(ParseConfig, RejectsMalformedDocuments) {
  auto rejects = [](const std::string& text) {
    EXPECT_THROW(parse_config(json::parse(text)), InputError) << text;
  };
  rejects(R"({"colour": 1})");
  rejects(R"({"params": {"a": "1", "b": 0.4}})");
  rejects(R"({"params": {"a": 0.4, "b": 1.0}})");
  rejects(R"({"subsystem": "P"})");
  rejects(R"({"subsystem": "N", "branch_bits": [1, 1, 1]})");
  rejects(R"({"subsystem": "O", "branch_bits": [1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 2]})");
  rejects(R"({"subsystem": "M", "initial": {"s1": 1.2, "s2": 0.1}})");
  rejects(R"({"tolerances": {"rel": -1}})");
  rejects(R"({"seed": -3})");
  rejects(R"({"output": {"samples": 1}})");
  rejects(R"({"region": {"grid": 0}})");
  rejects(R"({"verify": {"fault": "other"}})");
  rejects(R"({"verify": {"draws": -1}})");
}

TEST(ParseConfig, ZeroLengthSpanIsAnInputError) {
  EXPECT_THROW(parse_config(json::parse(R"({"t_span": [1.0, 1.0]})")), InputError);
  const fs::path dir = scratch("zero_span");
  json doc = ref_level();
  doc["t_span"] = {2.0, 2.0};
  const CliRun r = cli_with("simulate", doc, dir);
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("zero-length"), std::string::npos) << r.err;
}

TEST(ParseConfig, OneFieldCaseRejectedForN) {
  const fs::path dir = scratch("b_zero");
  const json doc = json::parse(R"({"params": {"a": 1.0, "b": 0.0}, "subsystem": "N",
                                   "constants": {"m": 1.0, "ell": 2.5}, "initial": {"s1": 1.3, "s2": 0.0}})");
  const CliRun r = cli_with("separate", doc, dir);
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("b = 0"), std::string::npos) << r.err;
  // The general flow still accepts b = 0.
  EXPECT_NO_THROW(parse_config(json::parse(R"({"params": {"a": 1.0, "b": 0.0}})")));
}

TEST(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(invoke({"--help"}).code, 0);
  EXPECT_EQ(invoke({}).code, kExitInput);
  EXPECT_EQ(invoke({"bogus"}).code, kExitInput);
  EXPECT_EQ(invoke({"simulate"}).code, kExitInput);
  const CliRun r = invoke({"simulate", "--config", "/nonexistent/config.json"});
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("cannot open"), std::string::npos);
}

TEST(Cli, SeparateNeedsNOrO) {
  const fs::path dir = scratch("separate_general");
  const json doc = json::parse(R"({"initial": {"omega": [0.1, 0.2, 0.3], "alpha": [1, 0, 0], "beta": [0, 0.4, 0]}})");
  EXPECT_EQ(cli_with("separate", doc, dir).code, kExitInput);
  EXPECT_EQ(cli_with("region", doc, dir).code, kExitInput);
}

TEST(Simulate, WritesTrajectoryAndReport) {
  const fs::path dir = scratch("simulate");
  json doc = ref_level();
  doc["output"] = {{"samples", 11}};
  const CliRun r = cli_with("simulate", doc, dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = split(slurp(dir / "out" / "trajectory.csv"), '\n');
  ASSERT_EQ(lines.size(), 12u);
  EXPECT_EQ(lines[0], "t,omega1,omega2,omega3,alpha1,alpha2,alpha3,beta1,beta2,beta3,H,K,G,geometric_residual");
  const json rep = json::parse(slurp(dir / "out" / "simulate_report.json"));
  EXPECT_TRUE(rep["pass"].get<bool>());
  EXPECT_LT(rep["relative_drift"]["H"].get<double>(), 1e-8);
  // Subsystem O is invariant: the relation residual stays small.
  EXPECT_LT(rep["invariant_relation_residual"].get<double>(), 1e-7);
}

TEST(Separate, OnReferenceLevelMatchesDirectFlow) {
  const fs::path dir = scratch("separate_o");
  const CliRun r = cli_with("separate", ref_level(), dir);
  ASSERT_EQ(r.code, 0) << r.err;
  const json rep = json::parse(slurp(dir / "out" / "separate_report.json"));
  EXPECT_LT(rep["max_deviation"].get<double>(), 1e-5);
  for (const char* f : {"separated.csv", "reconstructed.csv", "comparison.csv"}) {
    EXPECT_TRUE(fs::exists(dir / "out" / f)) << f;
  }
}

TEST(Separate, InadmissibleStartListsRadicands) {
  const fs::path dir = scratch("separate_bad");
  json doc = ref_level();
  doc["initial"] = {{"t1", 1.5}, {"t2", -1.5}};
  CliRun r = cli_with("separate", doc, dir);
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("negative radicands"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("F(t1)"), std::string::npos) << r.err;

  const json n = json::parse(R"({"subsystem": "N", "constants": {"m": 1.0, "ell": 2.5},
                                 "initial": {"s1": 0.5, "s2": 0.1}})");
  r = cli_with("separate", n, dir);
  EXPECT_EQ(r.code, kExitInput);
  EXPECT_NE(r.err.find("s1^2 - a^2"), std::string::npos) << r.err;
}

TEST(Verify, SameSeedGivesIdenticalBytes) {
  const fs::path a = scratch("verify_a");
  const fs::path b = scratch("verify_b");
  const json doc = json::parse(R"({"verify": {"draws": 300}})");
  ASSERT_EQ(cli_with("verify", doc, a, {"--seed", "42"}).code, 0);
  ASSERT_EQ(cli_with("verify", doc, b, {"--seed", "42"}).code, 0);
  const std::string first = slurp(a / "out" / "verify_report.json");
  EXPECT_EQ(first, slurp(b / "out" / "verify_report.json"));
  ASSERT_EQ(cli_with("verify", doc, b, {"--seed", "43"}).code, 0);
  EXPECT_NE(first, slurp(b / "out" / "verify_report.json"));
}

TEST(Verify, FaultHookFailsLoudly) {
  const fs::path dir = scratch("verify_fault");
  const CliRun r = cli_with("verify", json::parse(R"({"verify": {"draws": 200, "fault": "phi2_sign"}})"), dir);
  EXPECT_EQ(r.code, kExitVerification);
  EXPECT_NE(r.err.find("master_identity FAILED"), std::string::npos) << r.err;
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
  const json rep = json::parse(slurp(dir / "out" / "verify_report.json"));
  EXPECT_FALSE(rep["pass"].get<bool>());
  EXPECT_FALSE(rep["suites"][0]["pass"].get<bool>());
  // The other suites are untouched by the hook.
  EXPECT_TRUE(rep["suites"][1]["pass"].get<bool>());
}

TEST(Verify, ZeroDrawsPassVacuouslyWithWarning) {
  const fs::path dir = scratch("verify_zero");
  const CliRun r = cli_with("verify", json::parse(R"({"verify": {"draws": 0}})"), dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning: verify.draws = 0"), std::string::npos) << r.err;
  const json rep = json::parse(slurp(dir / "out" / "verify_report.json"));
  for (const auto& s : rep["suites"]) EXPECT_EQ(s["evaluated"].get<long>(), 0);
}

TEST(Region, GridOfOneGivesSingleCell) {
  const fs::path dir = scratch("region_one");
  json doc = ref_level();
  doc["region"] = {{"grid", 1}};
  ASSERT_EQ(cli_with("region", doc, dir).code, 0);
  const auto lines = split(slurp(dir / "out" / "region_grid.csv"), '\n');
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "s1,s2,inside");
  // The single cell is centred on the origin of the default window.
  EXPECT_EQ(lines[1], "0,0,0");
}

TEST(Region, InadmissibleConstantsGiveEmptyBoundaryAndWarning) {
  const fs::path dir = scratch("region_empty");
  json doc = ref_level();
  // sigma / (4 s^2) + tau < 0 at s = 0.1.
  doc["constants"] = {{"s", 0.1}, {"tau", 1.2}};
  doc.erase("initial");
  const CliRun r = cli_with("region", doc, dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("warning:"), std::string::npos);
  EXPECT_EQ(slurp(dir / "out" / "region_boundary.csv"), "segment,line,s1_start,s2_start,s1_end,s2_end\n");
}

TEST(Region, EmptyNRegionWarns) {
  const fs::path dir = scratch("region_empty_n");
  // Phi(s1) <= 0 only for s1 in [0.2, 0.3], inside |s1| < a.
  const json doc = json::parse(R"({"subsystem": "N", "constants": {"m": 10.0, "ell": 5.0}})");
  const CliRun r = cli_with("region", doc, dir);
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("region is empty"), std::string::npos) << r.err;
}

TEST(Region, ReferenceLevelMatchesGoldenFixture) {
  const char* fixtures = std::getenv("KOWALEVSKI_FIXTURES");
  ASSERT_NE(fixtures, nullptr);
  const std::string golden = slurp(fs::path(fixtures) / "ref_region_boundary.csv");
  ASSERT_FALSE(golden.empty());
  const fs::path dir = scratch("region_ref");
  json doc = ref_level();
  doc["region"] = {{"grid", 200}};
  ASSERT_EQ(cli_with("region", doc, dir).code, 0);
  const auto want = split(golden, '\n');
  const auto got = split(slurp(dir / "out" / "region_boundary.csv"), '\n');
  ASSERT_EQ(want.size(), got.size());
  EXPECT_EQ(want[0], got[0]);
  for (std::size_t i = 1; i < want.size(); ++i) {
    const auto w = split(want[i], ',');
    const auto g = split(got[i], ',');
    ASSERT_EQ(w.size(), 6u);
    ASSERT_EQ(g.size(), 6u);
    EXPECT_EQ(w[1], g[1]);
    for (std::size_t k = 2; k < 6; ++k) EXPECT_NEAR(std::stod(w[k]), std::stod(g[k]), 1e-9) << want[i];
  }
}

TEST(Region, BoundaryUsesOnlyRegionLines) {
  ScenarioConfig cfg = parse_config(ref_level());
  const auto segs = trace_region_boundary(cfg, {-4.0, 4.0}, {-0.6, 0.6}, 2001);
  ASSERT_FALSE(segs.empty());
  const auto lines = region_lines(cfg);
  for (const auto& s : segs) {
    const auto it = std::find_if(lines.begin(), lines.end(), [&](const RegionLine& l) { return l.name == s.line; });
    ASSERT_NE(it, lines.end());
    for (const SPoint& p : {s.start, s.end}) EXPECT_NEAR(it->a * p.s1 + it->b * p.s2 + it->c, 0.0, 1e-12);
    // Midpoints of boundary segments lie in the closed region.
    const SPoint mid{0.5 * (s.start.s1 + s.end.s1), 0.5 * (s.start.s2 + s.end.s2)};
    EXPECT_TRUE(region_contains(cfg, mid, 1e-9));
  }
}

TEST(Io, CsvFormat) {
  CsvTable t({"name", "x", "y"});
  t.add_row({"a"}, {0.1, -2.5e-300});
  t.add_row({"b"}, {1.0 / 3.0, 4.0});
  const std::string s = t.str();
  EXPECT_EQ(s.find('\r'), std::string::npos);
  const auto lines = split(s, '\n');
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[1], "a,0.10000000000000001,-2.5e-300");
  // 17 significant digits round-trip.
  EXPECT_EQ(std::stod(split(lines[2], ',')[1]), 1.0 / 3.0);
  EXPECT_THROW(t.add_row({1.0}), InputError);
}

TEST(Io, AtomicWriteCreatesDirectories) {
  const fs::path dir = scratch("atomic");
  write_file_atomic(dir / "a" / "b" / "f.txt", "hello\n");
  EXPECT_EQ(slurp(dir / "a" / "b" / "f.txt"), "hello\n");
  for (const auto& e : fs::directory_iterator(dir / "a" / "b")) {
    EXPECT_EQ(e.path().filename(), "f.txt");
  }
}
