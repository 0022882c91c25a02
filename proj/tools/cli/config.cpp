#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kowalevski/errors.hpp"

namespace kowalevski::cli {

using nlohmann::json;

std::string subsystem_name(Subsystem s) {
  switch (s) {
    case Subsystem::M:
      return "M";
    case Subsystem::N:
      return "N";
    case Subsystem::O:
      return "O";
    default:
      return "general";
  }
}

IntegrationConfig ScenarioConfig::integration() const {
  IntegrationConfig c;
  c.rel_tol = tol.rel;
  c.abs_tol = tol.abs;
  return c;
}

namespace {

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw InputError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (allowed.count(it.key()) == 0) throw InputError(where + ": unknown key \"" + it.key() + "\"");
  }
}

double number(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw InputError(where + ": missing \"" + key + "\"");
  const json& v = obj.at(key);
  if (!v.is_number()) throw InputError(where + "." + key + ": expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError(where + "." + key + ": not finite");
  return d;
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

std::array<double, 2> pair(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw InputError(where + ": expected [lo, hi]");
  }
  const std::array<double, 2> out{v[0].get<double>(), v[1].get<double>()};
  if (!std::isfinite(out[0]) || !std::isfinite(out[1]) || !(out[1] > out[0])) {
    throw InputError(where + ": expected finite lo < hi");
  }
  return out;
}

Vector3 vec3(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) throw InputError(where + ": missing \"" + key + "\"");
  const json& v = obj.at(key);
  if (!v.is_array() || v.size() != 3) throw InputError(where + "." + key + ": expected three numbers");
  Vector3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) throw InputError(where + "." + key + ": expected numbers");
    out[i] = v[static_cast<std::size_t>(i)].get<double>();
  }
  return out;
}

}  // namespace

ScenarioConfig parse_config(const json& doc) {
  require_keys(doc, "config",
               {"params", "subsystem", "constants", "initial", "branch_bits", "t_span", "tolerances", "seed",
                "output", "region", "verify"});
  ScenarioConfig cfg;

  if (doc.contains("params")) {
    const json& p = doc.at("params");
    require_keys(p, "params", {"a", "b"});
    cfg.a = number(p, "a", "params");
    cfg.b = number(p, "b", "params");
  }
  try {
    cfg.params();
  } catch (const DomainError& e) {
    throw InputError(std::string("params: ") + e.what());
  }

  if (doc.contains("subsystem")) {
    if (!doc.at("subsystem").is_string()) throw InputError("subsystem: expected \"M\", \"N\", \"O\" or \"general\"");
    const std::string s = doc.at("subsystem").get<std::string>();
    if (s == "M") {
      cfg.subsystem = Subsystem::M;
    } else if (s == "N") {
      cfg.subsystem = Subsystem::N;
    } else if (s == "O") {
      cfg.subsystem = Subsystem::O;
    } else if (s == "general") {
      cfg.subsystem = Subsystem::General;
    } else {
      throw InputError("subsystem: expected \"M\", \"N\", \"O\" or \"general\", got \"" + s + "\"");
    }
  }
  if ((cfg.subsystem == Subsystem::N || cfg.subsystem == Subsystem::O) && cfg.b == 0.0) {
    throw InputError("subsystem " + subsystem_name(cfg.subsystem) +
                     " needs two independent fields: b = 0 is the classical one-field case");
  }

  if (doc.contains("constants")) {
    const json& c = doc.at("constants");
    if (cfg.subsystem == Subsystem::N) {
      require_keys(c, "constants", {"m", "ell"});
      cfg.n = {number(c, "m", "constants"), number(c, "ell", "constants")};
      if (std::abs(cfg.n.m) < 1e-12) throw InputError("constants.m must be nonzero");
    } else if (cfg.subsystem == Subsystem::O) {
      require_keys(c, "constants", {"s", "tau"});
      cfg.o = {number(c, "s", "constants"), number(c, "tau", "constants")};
      if (cfg.o.s == 0.0 || cfg.o.tau == 0.0) throw InputError("constants: s and tau must be nonzero");
    } else {
      throw InputError("constants: only subsystems N and O take constants");
    }
  }

  if (doc.contains("initial")) {
    const json& ini = doc.at("initial");
    if (!ini.is_object()) throw InputError("initial: expected an object");
    if (ini.contains("omega") || ini.contains("alpha") || ini.contains("beta")) {
      require_keys(ini, "initial", {"omega", "alpha", "beta"});
      PhaseState y;
      y.omega = vec3(ini, "omega", "initial");
      y.alpha = vec3(ini, "alpha", "initial");
      y.beta = vec3(ini, "beta", "initial");
      cfg.phase = y;
    } else if (cfg.subsystem == Subsystem::N) {
      require_keys(ini, "initial", {"s1", "s2"});
      cfg.separated = std::array<double, 2>{number(ini, "s1", "initial"), number(ini, "s2", "initial")};
    } else if (cfg.subsystem == Subsystem::O) {
      require_keys(ini, "initial", {"t1", "t2"});
      cfg.separated = std::array<double, 2>{number(ini, "t1", "initial"), number(ini, "t2", "initial")};
    } else {
      throw InputError("initial: subsystems M and general need a phase state {omega, alpha, beta}");
    }
  }

  if (doc.contains("branch_bits")) {
    const json& bb = doc.at("branch_bits");
    if (!bb.is_array()) throw InputError("branch_bits: expected an array of +1/-1");
    std::vector<int> bits;
    for (const json& v : bb) {
      if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != -1)) {
        throw InputError("branch_bits: entries must be +1 or -1");
      }
      bits.push_back(v.get<int>());
    }
    const std::size_t want = cfg.subsystem == Subsystem::N ? 4 : (cfg.subsystem == Subsystem::O ? 11 : 0);
    if (want == 0) throw InputError("branch_bits: only subsystems N and O have branches");
    if (bits.size() != want) {
      throw InputError("branch_bits: subsystem " + subsystem_name(cfg.subsystem) + " needs " + std::to_string(want) +
                       " entries");
    }
    cfg.branch_bits = bits;
  }

  if (doc.contains("t_span")) {
    const json& ts = doc.at("t_span");
    if (!ts.is_array() || ts.size() != 2 || !ts[0].is_number() || !ts[1].is_number()) {
      throw InputError("t_span: expected [t_begin, t_end]");
    }
    cfg.t_begin = ts[0].get<double>();
    cfg.t_end = ts[1].get<double>();
  }
  if (!std::isfinite(cfg.t_begin) || !std::isfinite(cfg.t_end) || !(cfg.t_end > cfg.t_begin)) {
    throw InputError("t_span: need finite t_begin < t_end (zero-length spans are rejected)");
  }

  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    require_keys(t, "tolerances", {"rel", "abs", "drift", "deviation"});
    cfg.tol.rel = number_or(t, "rel", cfg.tol.rel, "tolerances");
    cfg.tol.abs = number_or(t, "abs", cfg.tol.abs, "tolerances");
    cfg.tol.drift = number_or(t, "drift", cfg.tol.drift, "tolerances");
    cfg.tol.deviation = number_or(t, "deviation", cfg.tol.deviation, "tolerances");
    if (!(cfg.tol.rel > 0.0) || !(cfg.tol.abs > 0.0) || !(cfg.tol.drift > 0.0) || !(cfg.tol.deviation > 0.0)) {
      throw InputError("tolerances: all entries must be positive");
    }
  }

  if (doc.contains("seed")) {
    const json& s = doc.at("seed");
    if (!s.is_number_unsigned()) throw InputError("seed: expected an unsigned 64-bit integer");
    cfg.seed = s.get<std::uint64_t>();
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    require_keys(o, "output", {"dir", "samples"});
    if (o.contains("dir")) {
      if (!o.at("dir").is_string()) throw InputError("output.dir: expected a string");
      cfg.output_dir = o.at("dir").get<std::string>();
    }
    if (o.contains("samples")) {
      if (!o.at("samples").is_number_integer() || o.at("samples").get<int>() < 2) {
        throw InputError("output.samples: expected an integer >= 2");
      }
      cfg.samples = o.at("samples").get<int>();
    }
  }

  if (doc.contains("region")) {
    const json& r = doc.at("region");
    require_keys(r, "region", {"grid", "s1", "s2"});
    if (r.contains("grid")) {
      if (!r.at("grid").is_number_integer() || r.at("grid").get<int>() < 1 || r.at("grid").get<int>() > 10000) {
        throw InputError("region.grid: expected an integer in [1, 10000]");
      }
      cfg.region.grid = r.at("grid").get<int>();
    }
    if (r.contains("s1")) cfg.region.s1_range = pair(r.at("s1"), "region.s1");
    if (r.contains("s2")) cfg.region.s2_range = pair(r.at("s2"), "region.s2");
  }

  if (doc.contains("verify")) {
    const json& v = doc.at("verify");
    require_keys(v, "verify", {"draws", "fault"});
    if (v.contains("draws")) {
      if (!v.at("draws").is_number_integer() || v.at("draws").get<long>() < 0) {
        throw InputError("verify.draws: expected a nonnegative integer");
      }
      cfg.verify.draws = v.at("draws").get<long>();
    }
    if (v.contains("fault")) {
      if (!v.at("fault").is_string() || v.at("fault").get<std::string>() != "phi2_sign") {
        throw InputError("verify.fault: the only fault hook is \"phi2_sign\"");
      }
      cfg.verify.fault = v.at("fault").get<std::string>();
    }
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw InputError("config file " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

nlohmann::ordered_json config_summary(const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["params"] = {{"a", cfg.a}, {"b", cfg.b}};
  j["subsystem"] = subsystem_name(cfg.subsystem);
  if (cfg.subsystem == Subsystem::N) j["constants"] = {{"m", cfg.n.m}, {"ell", cfg.n.ell}};
  if (cfg.subsystem == Subsystem::O) j["constants"] = {{"s", cfg.o.s}, {"tau", cfg.o.tau}};
  j["t_span"] = {cfg.t_begin, cfg.t_end};
  j["tolerances"] = {{"rel", cfg.tol.rel}, {"abs", cfg.tol.abs}, {"drift", cfg.tol.drift},
                     {"deviation", cfg.tol.deviation}};
  j["seed"] = cfg.seed;
  return j;
}

}  // namespace kowalevski::cli
