#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "io.hpp"
#include "kowalevski/kowalevski.hpp"

namespace kowalevski::cli {

namespace {

const char* const kPhaseHeader[9] = {"omega1", "omega2", "omega3", "alpha1", "alpha2",
                                     "alpha3", "beta1",  "beta2",  "beta3"};

std::vector<std::string> phase_header(const std::vector<std::string>& head, const std::vector<std::string>& tail) {
  std::vector<std::string> out = head;
  out.insert(out.end(), std::begin(kPhaseHeader), std::end(kPhaseHeader));
  out.insert(out.end(), tail.begin(), tail.end());
  return out;
}

std::vector<double> phase_row(double t, const PhaseState& y) {
  std::vector<double> row{t};
  const PhaseVector v = y.to_vector();
  for (int i = 0; i < 9; ++i) row.push_back(v[i]);
  return row;
}

nlohmann::ordered_json state_json(const PhaseState& y) {
  return {{"omega", {y.omega[0], y.omega[1], y.omega[2]}},
          {"alpha", {y.alpha[0], y.alpha[1], y.alpha[2]}},
          {"beta", {y.beta[0], y.beta[1], y.beta[2]}}};
}

std::vector<double> sample_times(double t0, double t1, int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    out.push_back(i == n - 1 ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return out;
}

BranchBitsN bits_n(const std::vector<int>& v) {
  BranchBitsN b{};
  std::copy(v.begin(), v.end(), b.begin());
  return b;
}

BranchBitsO bits_o(const std::vector<int>& v) {
  BranchBitsO b{};
  std::copy(v.begin(), v.end(), b.begin());
  return b;
}

SeparatedStateN initial_n(const ScenarioConfig& cfg) {
  const BodyParams params = cfg.params();
  const auto& q = *cfg.separated;
  if (cfg.branch_bits) return {q[0], q[1], bits_n(*cfg.branch_bits)};
  const auto branches = admissible_branches_n(q[0], q[1], cfg.n, params);
  if (branches.empty()) throw BranchError("no sign assignment reconstructs a point of N at the initial (s1, s2)");
  return {q[0], q[1], branches.front()};
}

SeparatedStateO initial_o(const ScenarioConfig& cfg) {
  const BodyParams params = cfg.params();
  const auto& q = *cfg.separated;
  const auto bad = violated_radicands_o(q[0], q[1], cfg.o, params, 1e-12);
  if (!bad.empty()) {
    std::string msg = "inadmissible initial (t1, t2) = (" + format_double(q[0]) + ", " + format_double(q[1]) +
                      "): negative radicands";
    for (const auto& b : bad) msg += "; " + b;
    throw AdmissibilityError(msg);
  }
  if (cfg.branch_bits) return {q[0], q[1], bits_o(*cfg.branch_bits)};
  const auto branches = enumerate_branches_o(q[0], q[1], cfg.o, params);
  if (branches.empty()) {
    throw AdmissibilityError("no sign assignment gives a real point of O at the initial (t1, t2) = (" +
                             format_double(q[0]) + ", " + format_double(q[1]) + ")");
  }
  return {q[0], q[1], branches.front().signs};
}

PhaseState initial_state(const ScenarioConfig& cfg) {
  if (cfg.phase) return *cfg.phase;
  if (!cfg.separated) throw InputError("initial: missing initial data");
  if (cfg.subsystem == Subsystem::N) return reconstruct_n(initial_n(cfg), cfg.n, cfg.params());
  if (cfg.subsystem == Subsystem::O) return reconstruct_o(initial_o(cfg), cfg.o, cfg.params());
  throw InputError("initial: separated coordinates need subsystem N or O");
}

std::optional<double> invariant_residual(Subsystem s, const PhaseState& y) {
  const ComplexState c = to_complex(y);
  switch (s) {
    case Subsystem::M:
      return normalized_residual_m(c);
    case Subsystem::N:
      return normalized_residual_n(c);
    case Subsystem::O:
      return normalized_residual_o(c);
    default:
      return std::nullopt;
  }
}

Trajectory<9> direct_flow(const PhaseState& y0, double t0, double t1, const IntegrationConfig& ic) {
  auto rhs = [](double, const PhaseVector& y) { return PhaseVector(eom_rhs(y)); };
  return integrate_adaptive<9>(rhs, y0.to_vector(), t0, t1, ic);
}

}  // namespace

// ---------------------------------------------------------------------------

CommandResult cmd_simulate(const ScenarioConfig& cfg) {
  const BodyParams params = cfg.params();
  const PhaseState y0 = initial_state(cfg);
  CommandResult res;
  const double geo0 = geometric_residuals(y0, params).max_abs();
  if (geo0 > 1e-8) {
    res.warnings.push_back("initial state is off the constraint surface (geometric residual " + format_double(geo0) +
                           ")");
  }
  const Trajectory<9> traj = direct_flow(y0, cfg.t_begin, cfg.t_end, cfg.integration());

  auto integral = [&params](int which) {
    return [&params, which](const StateVec<9>& v) {
      const IntegralValues iv = general_integrals(PhaseState::from_vector(v), params);
      return which == 0 ? iv.h : (which == 1 ? iv.k : iv.g);
    };
  };
  const std::vector<double> drift = drift_report<9>(traj, {integral(0), integral(1), integral(2)});
  double geometric = 0.0;
  double invariant = 0.0;
  bool has_invariant = false;
  for (const PhaseVector& v : traj.y) {
    const PhaseState y = PhaseState::from_vector(v);
    geometric = std::max(geometric, geometric_residuals(y, params).max_abs());
    if (auto r = invariant_residual(cfg.subsystem, y)) {
      invariant = std::max(invariant, *r);
      has_invariant = true;
    }
  }

  CsvTable table(phase_header({"t"}, {"H", "K", "G", "geometric_residual"}));
  for (double t : sample_times(cfg.t_begin, cfg.t_end, cfg.samples)) {
    const PhaseState y = PhaseState::from_vector(traj.interpolate(t));
    const IntegralValues iv = general_integrals(y, params);
    std::vector<double> row = phase_row(t, y);
    row.insert(row.end(), {iv.h, iv.k, iv.g, geometric_residuals(y, params).max_abs()});
    table.add_row(row);
  }

  const double worst = std::max({drift[0], drift[1], drift[2], geometric});
  const bool pass = worst <= cfg.tol.drift;
  auto& r = res.report;
  r["command"] = "simulate";
  r["config"] = config_summary(cfg);
  r["initial_state"] = state_json(y0);
  r["accepted_steps"] = traj.t.size() - 1;
  r["rejected_steps"] = traj.rejected_steps;
  r["relative_drift"] = {{"H", drift[0]}, {"K", drift[1]}, {"G", drift[2]}};
  r["geometric_residual"] = geometric;
  if (has_invariant) r["invariant_relation_residual"] = invariant;
  r["threshold"] = cfg.tol.drift;
  r["pass"] = pass;
  res.files.push_back({"trajectory.csv", table.str()});
  res.files.push_back({"simulate_report.json", json_text(r)});
  res.exit_code = pass ? kExitPass : kExitVerification;
  res.summary = std::string("simulate: ") + (pass ? "pass" : "FAIL") + ", largest drift " + format_double(worst) +
                " (threshold " + format_double(cfg.tol.drift) + ")";
  return res;
}

// ---------------------------------------------------------------------------

namespace {

struct SeparatedRun {
  std::vector<double> t;
  std::vector<std::array<double, 2>> q;
  std::vector<std::vector<int>> bits;
  std::vector<PhaseState> states;
  std::vector<TurningEvent> events;
  double t_stop = 0.0;
  std::string diagnostic;
  bool completed = true;
  PhaseState y0;
};

template <class Traj, class StateAt, class Rebuild>
void sample_run(SeparatedRun& run, const Traj& traj, const ScenarioConfig& cfg, StateAt state_at, Rebuild rebuild) {
  run.events = traj.turning_events;
  run.t_stop = traj.t_end();
  run.completed = traj.status == Termination::Completed;
  run.diagnostic = traj.diagnostic;
  for (double t : sample_times(cfg.t_begin, run.t_stop, cfg.samples)) {
    const auto st = state_at(t);
    run.t.push_back(t);
    run.q.push_back({st.first, st.second});
    const auto bits = traj.bits_at(t);
    run.bits.emplace_back(bits.begin(), bits.end());
    run.states.push_back(rebuild(t));
  }
}

}  // namespace

CommandResult cmd_separate(const ScenarioConfig& cfg) {
  if (cfg.subsystem != Subsystem::N && cfg.subsystem != Subsystem::O) {
    throw InputError("separate: subsystem must be N or O");
  }
  if (!cfg.separated) throw InputError("separate: initial must give separated coordinates");
  const BodyParams params = cfg.params();
  SeparatedRun run;
  std::vector<std::string> coord_names;
  std::vector<std::string> bit_names;
  if (cfg.subsystem == Subsystem::N) {
    const auto& q = *cfg.separated;
    detail::require_admissible_n(q[0], q[1], cfg.n, params, 1e-12);
    const SeparatedStateN st0 = initial_n(cfg);
    run.y0 = reconstruct_n(st0, cfg.n, params);
    const auto traj = integrate_separated_n(st0, cfg.n, params, cfg.t_begin, cfg.t_end, cfg.integration());
    sample_run(
        run, traj, cfg,
        [&](double t) {
          const SeparatedStateN s = separated_state_n(traj, cfg.n, params, t);
          return std::make_pair(s.s1, s.s2);
        },
        [&](double t) { return reconstruct_n(separated_state_n(traj, cfg.n, params, t), cfg.n, params); });
    coord_names = {"s1", "s2"};
    bit_names = {"eps_S1", "eps_phi1", "eps_S2", "eps_phi2"};
  } else {
    const SeparatedStateO st0 = initial_o(cfg);
    run.y0 = reconstruct_o(st0, cfg.o, params);
    const auto traj = integrate_separated_o(st0, cfg.o, params, cfg.t_begin, cfg.t_end, cfg.integration());
    sample_run(
        run, traj, cfg,
        [&](double t) {
          const SeparatedStateO s = separated_state_o(traj, cfg.o, params, t);
          return std::make_pair(s.t1, s.t2);
        },
        [&](double t) { return reconstruct_o(separated_state_o(traj, cfg.o, params, t), cfg.o, params); });
    coord_names = {"t1", "t2"};
    for (int k = 0; k < 11; ++k) bit_names.push_back(std::string("eps_") + radical_o_name(k));
  }

  CommandResult res;
  if (!run.completed) {
    res.warnings.push_back("separated integration stopped at t = " + format_double(run.t_stop) + ": " +
                           run.diagnostic);
  }
  const Trajectory<9> direct = direct_flow(run.y0, cfg.t_begin, run.t_stop, cfg.integration());

  std::vector<std::string> sep_header{"t"};
  sep_header.insert(sep_header.end(), coord_names.begin(), coord_names.end());
  for (auto& b : bit_names) {
    std::replace(b.begin(), b.end(), ' ', '_');
    b.erase(std::remove_if(b.begin(), b.end(), [](char c) { return c == '(' || c == ')'; }), b.end());
  }
  sep_header.insert(sep_header.end(), bit_names.begin(), bit_names.end());
  CsvTable sep(sep_header);
  CsvTable rec(phase_header({"t"}, {}));
  CsvTable cmp({"t", "deviation"});
  double worst = 0.0;
  for (std::size_t i = 0; i < run.t.size(); ++i) {
    std::vector<double> row{run.t[i], run.q[i][0], run.q[i][1]};
    for (int b : run.bits[i]) row.push_back(b);
    sep.add_row(row);
    rec.add_row(phase_row(run.t[i], run.states[i]));
    const double dev = max_abs_diff(run.states[i], PhaseState::from_vector(direct.interpolate(run.t[i])));
    worst = std::max(worst, dev);
    cmp.add_row({run.t[i], dev});
  }

  const bool pass = worst <= cfg.tol.deviation;
  auto& r = res.report;
  r["command"] = "separate";
  r["config"] = config_summary(cfg);
  r["initial_separated"] = {(*cfg.separated)[0], (*cfg.separated)[1]};
  r["initial_branch"] = run.bits.front();
  r["initial_state"] = state_json(run.y0);
  r["t_stop"] = run.t_stop;
  r["completed"] = run.completed;
  nlohmann::ordered_json events = nlohmann::ordered_json::array();
  for (const TurningEvent& e : run.events) {
    events.push_back({{"t", e.t}, {"coordinate", e.coordinate + 1}, {"radical", e.radical}, {"root", e.root}});
  }
  r["turning_events"] = events;
  r["max_deviation"] = worst;
  r["threshold"] = cfg.tol.deviation;
  r["pass"] = pass;
  res.files.push_back({"separated.csv", sep.str()});
  res.files.push_back({"reconstructed.csv", rec.str()});
  res.files.push_back({"comparison.csv", cmp.str()});
  res.files.push_back({"separate_report.json", json_text(r)});
  res.exit_code = pass ? kExitPass : kExitVerification;
  res.summary = std::string("separate: ") + (pass ? "pass" : "FAIL") + ", max deviation from the direct flow " +
                format_double(worst) + " over " + std::to_string(run.events.size()) + " turning points";
  return res;
}

// ---------------------------------------------------------------------------

std::array<double, 2> default_s1_range(const ScenarioConfig& cfg) { return {-4.0 * cfg.a, 4.0 * cfg.a}; }

std::array<double, 2> default_s2_range(const ScenarioConfig& cfg) {
  const double w = cfg.b > 0.0 ? 1.5 * cfg.b : 0.5 * cfg.a;
  return {-w, w};
}

std::vector<RegionLine> region_lines(const ScenarioConfig& cfg) {
  const BodyParams params = cfg.params();
  std::vector<RegionLine> out{{"s1=-a", 1.0, 0.0, params.a()},
                              {"s1=+a", 1.0, 0.0, -params.a()},
                              {"s2=-b", 0.0, 1.0, params.b()},
                              {"s2=+b", 0.0, 1.0, -params.b()}};
  if (cfg.subsystem == Subsystem::N) {
    const double lo = (cfg.n.ell - 1.0) / (2.0 * cfg.n.m);
    const double hi = (cfg.n.ell + 1.0) / (2.0 * cfg.n.m);
    out.push_back({"Phi(s1)=0 lower", 1.0, 0.0, -std::min(lo, hi)});
    out.push_back({"Phi(s1)=0 upper", 1.0, 0.0, -std::max(lo, hi)});
    out.push_back({"Phi(s2)=0 lower", 0.0, 1.0, -std::min(lo, hi)});
    out.push_back({"Phi(s2)=0 upper", 0.0, 1.0, -std::max(lo, hi)});
  } else if (cfg.subsystem == Subsystem::O) {
    const OConstantsDerived d = derive_o(cfg.o, params);
    const double kl = (cfg.o.tau - 2.0 * cfg.o.s * d.chi) / params.r2();
    const double km = (cfg.o.tau + 2.0 * cfg.o.s * d.chi) / params.r2();
    out.push_back({"Lambda+", 1.0 - kl, 1.0 + kl, 2.0 * cfg.o.s});
    out.push_back({"Lambda-", 1.0 - kl, 1.0 + kl, -2.0 * cfg.o.s});
    out.push_back({"M+", 1.0 - km, 1.0 + km, 2.0 * cfg.o.s});
    out.push_back({"M-", 1.0 - km, 1.0 + km, -2.0 * cfg.o.s});
  } else {
    throw InputError("region: subsystem must be N or O");
  }
  return out;
}

bool region_contains(const ScenarioConfig& cfg, const SPoint& sp, double tol) {
  if (cfg.subsystem == Subsystem::N) return region_n(sp.s1, sp.s2, cfg.n, cfg.params(), tol);
  if (cfg.subsystem == Subsystem::O) return region_o(sp, cfg.o, cfg.params(), tol);
  throw InputError("region: subsystem must be N or O");
}

std::vector<BoundarySegment> trace_region_boundary(const ScenarioConfig& cfg, const std::array<double, 2>& s1_range,
                                                   const std::array<double, 2>& s2_range, int samples_per_line) {
  const double scale = std::max({s1_range[1] - s1_range[0], s2_range[1] - s2_range[0], 1.0});
  const double nudge = 1e-7 * scale;
  const std::vector<RegionLine> lines = region_lines(cfg);
  // Bisection stops within the membership tolerance of a corner; move the
  // endpoint onto the nearest intersection with another line.
  auto snap = [&](const RegionLine& own, SPoint p) {
    double best = 1e-6 * scale;
    SPoint out = p;
    for (const RegionLine& other : lines) {
      const double det = own.a * other.b - own.b * other.a;
      if (&other == &own || std::abs(det) < 1e-14) continue;
      const SPoint q{(own.b * other.c - other.b * own.c) / det, (other.a * own.c - own.a * other.c) / det};
      const double d = std::hypot(q.s1 - p.s1, q.s2 - p.s2);
      if (d < best) {
        best = d;
        out = q;
      }
    }
    return out;
  };
  std::vector<BoundarySegment> out;
  for (const RegionLine& line : lines) {
    const double norm = std::hypot(line.a, line.b);
    if (norm == 0.0) continue;
    const double nx = line.a / norm;
    const double ny = line.b / norm;
    // Foot of the perpendicular from the origin and the direction of the line.
    const double px = -line.c * nx / norm;
    const double py = -line.c * ny / norm;
    const double dx = -ny;
    const double dy = nx;
    // Clip the parameter u of p + u d to the window.
    double ulo = -1e300, uhi = 1e300;
    auto clip = [&](double p, double d, double lo, double hi) {
      if (d == 0.0) {
        if (p < lo || p > hi) ulo = 1.0, uhi = 0.0;
        return;
      }
      double a = (lo - p) / d, b = (hi - p) / d;
      if (a > b) std::swap(a, b);
      ulo = std::max(ulo, a);
      uhi = std::min(uhi, b);
    };
    clip(px, dx, s1_range[0], s1_range[1]);
    clip(py, dy, s2_range[0], s2_range[1]);
    if (!(uhi > ulo)) continue;
    auto point = [&](double u) { return SPoint{px + u * dx, py + u * dy}; };
    auto on_boundary = [&](double u) {
      const SPoint p = point(u);
      if (!region_contains(cfg, p, 1e-9)) return false;
      const SPoint plus{p.s1 + nudge * nx, p.s2 + nudge * ny};
      const SPoint minus{p.s1 - nudge * nx, p.s2 - nudge * ny};
      return !region_contains(cfg, plus) || !region_contains(cfg, minus);
    };
    auto refine = [&](double u_in, double u_out) {
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (u_in + u_out);
        if (on_boundary(mid)) {
          u_in = mid;
        } else {
          u_out = mid;
        }
      }
      return u_in;
    };
    const int n = std::max(samples_per_line, 2);
    std::vector<double> us(static_cast<std::size_t>(n));
    std::vector<char> flag(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      us[static_cast<std::size_t>(i)] = ulo + (uhi - ulo) * static_cast<double>(i) / static_cast<double>(n - 1);
      flag[static_cast<std::size_t>(i)] = on_boundary(us[static_cast<std::size_t>(i)]);
    }
    int i = 0;
    while (i < n) {
      if (!flag[static_cast<std::size_t>(i)]) {
        ++i;
        continue;
      }
      int j = i;
      while (j + 1 < n && flag[static_cast<std::size_t>(j + 1)]) ++j;
      const double u0 = i == 0 ? us.front() : refine(us[static_cast<std::size_t>(i)], us[static_cast<std::size_t>(i - 1)]);
      const double u1 =
          j == n - 1 ? us.back() : refine(us[static_cast<std::size_t>(j)], us[static_cast<std::size_t>(j + 1)]);
      if (u1 - u0 > 1e-9 * scale) out.push_back({line.name, snap(line, point(u0)), snap(line, point(u1))});
      i = j + 1;
    }
  }
  return out;
}

CommandResult cmd_region(const ScenarioConfig& cfg) {
  if (cfg.subsystem != Subsystem::N && cfg.subsystem != Subsystem::O) {
    throw InputError("region: subsystem must be N or O");
  }
  const auto s1r = cfg.region.s1_range.value_or(default_s1_range(cfg));
  const auto s2r = cfg.region.s2_range.value_or(default_s2_range(cfg));
  const int g = cfg.region.grid;
  CommandResult res;
  CsvTable boundary_csv({"segment", "line", "s1_start", "s2_start", "s1_end", "s2_end"});
  CsvTable grid_csv({"s1", "s2", "inside"});

  bool constants_ok = true;
  if (cfg.subsystem == Subsystem::O) {
    try {
      derive_o(cfg.o, cfg.params());
    } catch (const DomainError& e) {
      constants_ok = false;
      res.warnings.push_back(std::string("constants outside the admissible set: ") + e.what());
    }
  }
  long inside = 0;
  std::vector<BoundarySegment> segments;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const double s1 = s1r[0] + (s1r[1] - s1r[0]) * (i + 0.5) / g;
      const double s2 = s2r[0] + (s2r[1] - s2r[0]) * (j + 0.5) / g;
      const bool in = constants_ok && region_contains(cfg, {s1, s2});
      inside += in ? 1 : 0;
      grid_csv.add_row({s1, s2, in ? 1.0 : 0.0});
    }
  }
  if (constants_ok) segments = trace_region_boundary(cfg, s1r, s2r, std::max(4 * g + 1, 2001));
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const BoundarySegment& s = segments[k];
    boundary_csv.add_row({std::to_string(k), s.line}, {s.start.s1, s.start.s2, s.end.s1, s.end.s2});
  }
  if (segments.empty() && inside == 0) {
    res.warnings.push_back("the accessible region is empty in the window s1 in [" + format_double(s1r[0]) + ", " +
                           format_double(s1r[1]) + "], s2 in [" + format_double(s2r[0]) + ", " +
                           format_double(s2r[1]) + "]");
  }

  auto& r = res.report;
  r["command"] = "region";
  r["config"] = config_summary(cfg);
  r["window"] = {{"s1", {s1r[0], s1r[1]}}, {"s2", {s2r[0], s2r[1]}}};
  r["grid"] = g;
  r["inside_samples"] = inside;
  r["boundary_segments"] = segments.size();
  nlohmann::ordered_json lines = nlohmann::ordered_json::array();
  for (const BoundarySegment& s : segments) {
    if (std::find(lines.begin(), lines.end(), s.line) == lines.end()) lines.push_back(s.line);
  }
  r["boundary_lines"] = lines;
  r["warnings"] = res.warnings;
  res.files.push_back({"region_boundary.csv", boundary_csv.str()});
  res.files.push_back({"region_grid.csv", grid_csv.str()});
  res.files.push_back({"region_report.json", json_text(r)});
  res.summary = "region: " + std::to_string(segments.size()) + " boundary segments, " + std::to_string(inside) +
                " of " + std::to_string(static_cast<long>(g) * g) + " grid samples inside";
  return res;
}

// ---------------------------------------------------------------------------

int run_command(const std::string& name, const ScenarioConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    CommandResult res;
    if (name == "simulate") {
      res = cmd_simulate(cfg);
    } else if (name == "separate") {
      res = cmd_separate(cfg);
    } else if (name == "region") {
      res = cmd_region(cfg);
    } else if (name == "verify") {
      res = cmd_verify(cfg);
    } else {
      throw InputError("unknown command " + name);
    }
    for (const auto& [file, text] : res.files) write_file_atomic(std::filesystem::path(cfg.output_dir) / file, text);
    for (const std::string& w : res.warnings) err << "warning: " << w << "\n";
    out << res.summary << "\n";
    return res.exit_code;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const AdmissibilityError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const BranchError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const RealityViolation& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized Kowalevski top in two constant fields"};
  app.require_subcommand(1);
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "integrate the full equations of motion and report the drift of the integrals"},
      {"separate", "integrate the separated equations of N or O and compare with the direct flow"},
      {"region", "sample the accessible region in the (s1, s2) plane and trace its boundary"},
      {"verify", "run the randomized identity suites"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    auto* opt = sub->add_option("--config", config_path, "scenario JSON file");
    if (std::string(name) != "verify") opt->required();
    sub->add_option("--seed", seed, "64-bit seed, overrides the config");
    sub->add_option("--out", out_dir, "output directory, overrides the config");
    subs.push_back(sub);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitPass;
  } catch (const CLI::ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  CLI::App* chosen = nullptr;
  for (CLI::App* s : subs) {
    if (s->parsed()) chosen = s;
  }
  ScenarioConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  if (chosen->count("--seed") > 0) cfg.seed = seed;
  if (chosen->count("--out") > 0) cfg.output_dir = out_dir;
  return run_command(chosen->get_name(), cfg, out, err);
}

}  // namespace kowalevski::cli
