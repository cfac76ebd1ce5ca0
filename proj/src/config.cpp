#include "shapectl/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include "shapectl/errors.hpp"

namespace shapectl {

namespace {

void check_keys(const Json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

double number(const Json& obj, const std::string& key, double fallback,
              const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
  return x;
}

long long integer(const Json& obj, const std::string& key, long long fallback,
                  const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v.get<long long>();
}

std::string text(const Json& obj, const std::string& key, const std::string& fallback,
                 const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const Json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

Vector number_array(const Json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be an array");
  Vector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw ConfigError(where + " must hold numbers");
    out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
  }
  if (!out.allFinite()) throw ConfigError(where + " must be finite");
  return out;
}

SourceTerm::TimeFactor time_factor(const std::string& name, double T) {
  const double pi = std::numbers::pi;
  if (name == "one") return [](double) { return 1.0; };
  if (name == "sin") return [=](double t) { return std::sin(pi * t / T); };
  if (name == "cos") return [=](double t) { return std::cos(pi * t / T); };
  if (name == "exp") return [](double t) { return std::exp(-t); };
  if (name == "ramp") return [=](double t) { return t / T; };
  throw ConfigError("unknown source time factor '" + name +
                    "' (one, sin, cos, exp, ramp)");
}

SourceTerm::SpaceFactor space_factor(const std::string& name, double a, double b) {
  const double pi = std::numbers::pi;
  if (name == "one") return [](double, double) { return 1.0; };
  if (name == "sinsin") {
    return [=](double x, double y) { return std::sin(pi * x / a) * std::sin(pi * y / b); };
  }
  if (name == "x") return [=](double x, double) { return x / a; };
  if (name == "y") return [=](double, double y) { return y / b; };
  throw ConfigError("unknown source space factor '" + name + "' (one, sinsin, x, y)");
}

SourceTerm parse_source(const Json& block, const GridSpec& grid, double T, Json& resolved) {
  const std::string where = "source";
  if (!block.is_object()) throw ConfigError("source must be an object");
  const std::string type = text(block, "type", "constant", where);
  if (type == "zero") {
    check_keys(block, {"type"}, where);
    resolved = Json{{"type", "zero"}};
    return SourceTerm::zero();
  }
  if (type == "constant") {
    check_keys(block, {"type", "value"}, where);
    const double value = number(block, "value", 1.0, where);
    resolved = Json{{"type", "constant"}, {"value", value}};
    return value == 0.0 ? SourceTerm::zero() : SourceTerm::constant(value);
  }
  if (type == "separable") {
    check_keys(block, {"type", "time", "space", "amplitude"}, where);
    const std::string tname = text(block, "time", "one", where);
    const std::string sname = text(block, "space", "one", where);
    const double amp = number(block, "amplitude", 1.0, where);
    resolved = Json{{"type", "separable"}, {"time", tname}, {"space", sname},
                    {"amplitude", amp}};
    auto g = time_factor(tname, T);
    return SourceTerm::separable([=](double t) { return amp * g(t); },
                                 space_factor(sname, grid.a(), grid.b()),
                                 tname + "*" + sname);
  }
  if (type == "table") {
    check_keys(block, {"type", "times", "values"}, where);
    if (!block.contains("times") || !block.contains("values")) {
      throw ConfigError("table source needs 'times' and 'values'");
    }
    const Vector t = number_array(block.at("times"), "source.times");
    const Json& rows = block.at("values");
    if (!rows.is_array() || rows.size() != static_cast<std::size_t>(t.size())) {
      throw ConfigError("source.values needs one row per time");
    }
    std::vector<double> times(t.data(), t.data() + t.size());
    std::vector<Vector> samples;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      samples.push_back(number_array(rows[k], "source.values"));
      if (samples.back().size() != grid.interior_size()) {
        throw ConfigError("source.values rows need " +
                          std::to_string(grid.interior_size()) + " entries");
      }
    }
    resolved = Json{{"type", "table"}, {"times", block.at("times")}, {"values", rows}};
    return SourceTerm::tabulated(std::move(times), std::move(samples));
  }
  throw ConfigError("unknown source type '" + type +
                    "' (zero, constant, separable, table)");
}

void parse_initial(const Json& block, RunConfig& cfg, Json& resolved) {
  const std::string where = "initial";
  if (!block.is_object()) throw ConfigError("initial must be an object");
  const int n = cfg.grid.interior_size();
  const std::string type = text(block, "type", "zero", where);
  cfg.u0 = Vector::Zero(n);
  cfg.u1 = Vector::Zero(n);
  if (type == "zero") {
    check_keys(block, {"type"}, where);
    resolved = Json{{"type", "zero"}};
  } else if (type == "eigenmode") {
    check_keys(block, {"type", "p", "q", "amplitude"}, where);
    const long long p = integer(block, "p", 1, where);
    const long long q = integer(block, "q", 1, where);
    if (p < 1 || p >= cfg.grid.M() || q < 1 || q >= cfg.grid.N()) {
      throw ConfigError("initial eigenmode indices out of range");
    }
    const double amp = number(block, "amplitude", 1.0, where);
    cfg.u0 = amp * eigenmode(cfg.grid, static_cast<int>(p), static_cast<int>(q));
    resolved = Json{{"type", "eigenmode"}, {"p", p}, {"q", q}, {"amplitude", amp}};
  } else if (type == "values") {
    check_keys(block, {"type", "u0", "u1"}, where);
    if (block.contains("u0")) cfg.u0 = number_array(block.at("u0"), "initial.u0");
    if (block.contains("u1")) cfg.u1 = number_array(block.at("u1"), "initial.u1");
    if (cfg.u0.size() != n || cfg.u1.size() != n) {
      throw ConfigError("initial values need " + std::to_string(n) + " entries");
    }
    resolved = Json{{"type", "values"}, {"u0", to_json(cfg.u0)}, {"u1", to_json(cfg.u1)}};
  } else {
    throw ConfigError("unknown initial type '" + type + "' (zero, eigenmode, values)");
  }
}

int default_steps(EquationKind kind, const GridSpec& grid, double T) {
  if (kind == EquationKind::Heat) return 200;
  // A quarter of the mesh width per step keeps well inside the CFL limit for
  // every admissible path.
  return std::max(200, static_cast<int>(std::ceil(T / (0.25 * grid.h()))));
}

RunConfig parse_unchecked(const Json& doc) {
  check_keys(doc, {"grid", "kind", "T", "steps", "K", "seed", "source", "initial", "ndd",
                   "uc", "sensitivity", "norm_bound", "control", "adjoint"},
             "config");
  RunConfig cfg;
  Json& out = cfg.resolved;

  if (!doc.contains("grid")) throw ConfigError("config.grid is required");
  const Json& g = doc.at("grid");
  check_keys(g, {"a", "b", "M", "N"}, "grid");
  for (const char* key : {"a", "b", "M", "N"}) {
    if (!g.contains(key)) throw ConfigError(std::string("grid.") + key + " is required");
  }
  cfg.grid = GridSpec(number(g, "a", 0, "grid"), number(g, "b", 0, "grid"),
                      static_cast<int>(integer(g, "M", 0, "grid")),
                      static_cast<int>(integer(g, "N", 0, "grid")));
  out["grid"] = to_json(cfg.grid);

  cfg.kind = parse_kind(text(doc, "kind", "heat", "config"));
  out["kind"] = kind_name(cfg.kind);
  const bool heat = cfg.kind == EquationKind::Heat;

  const double default_T =
      heat ? 0.1 : 2.0 * std::hypot(cfg.grid.a(), cfg.grid.b());
  cfg.T = number(doc, "T", default_T, "config");
  if (!(cfg.T > 0.0)) throw ConfigError("config.T must be positive");
  out["T"] = cfg.T;

  const long long default_K = heat ? cfg.grid.M() - 1 : 2 * (cfg.grid.M() - 1);
  const long long K = integer(doc, "K", default_K, "config");
  if (K < 1 || K > 100000) throw ConfigError("config.K must be in [1, 100000]");
  cfg.K = static_cast<int>(K);

  const long long steps =
      integer(doc, "steps", default_steps(cfg.kind, cfg.grid, cfg.T), "config");
  if (steps < 1 || steps > 100000000) throw ConfigError("config.steps must be positive");
  cfg.steps = aligned_steps(static_cast<int>(steps), cfg.K);
  out["steps"] = cfg.steps;
  out["K"] = cfg.K;

  const long long seed = integer(doc, "seed", 0, "config");
  if (seed < 0) throw ConfigError("config.seed must be non-negative");
  cfg.seed = static_cast<std::uint64_t>(seed);
  out["seed"] = cfg.seed;

  Json resolved_source;
  cfg.source = parse_source(doc.value("source", Json{{"type", "constant"}, {"value", 1.0}}),
                            cfg.grid, cfg.T, resolved_source);
  out["source"] = resolved_source;

  Json resolved_initial;
  parse_initial(doc.value("initial", Json{{"type", "zero"}}), cfg, resolved_initial);
  out["initial"] = resolved_initial;

  const Json ndd = doc.value("ndd", Json::object());
  check_keys(ndd, {"threshold", "t_lo", "t_hi"}, "ndd");
  if (ndd.contains("threshold") && !ndd.at("threshold").is_null()) {
    cfg.ndd.threshold = number(ndd, "threshold", 0.0, "ndd");
    if (*cfg.ndd.threshold < 0.0) throw ConfigError("ndd.threshold must be >= 0");
  }
  cfg.ndd.t_lo = number(ndd, "t_lo", kNddWindowFraction * cfg.T, "ndd");
  cfg.ndd.t_hi = number(ndd, "t_hi", cfg.T, "ndd");
  if (!(cfg.ndd.t_lo >= 0.0 && cfg.ndd.t_lo <= cfg.ndd.t_hi && cfg.ndd.t_hi <= cfg.T)) {
    throw ConfigError("ndd window must satisfy 0 <= t_lo <= t_hi <= T");
  }
  out["ndd"] = Json{{"threshold", cfg.ndd.threshold ? Json(*cfg.ndd.threshold) : Json(nullptr)},
                    {"t_lo", cfg.ndd.t_lo},
                    {"t_hi", cfg.ndd.t_hi}};

  const Json uc = doc.value("uc", Json::object());
  check_keys(uc, {"trials", "rank_tolerance"}, "uc");
  cfg.uc.trials = static_cast<int>(integer(uc, "trials", 20, "uc"));
  cfg.uc.rank_tolerance = number(uc, "rank_tolerance", 1e-6, "uc");
  if (cfg.uc.trials < 1) throw ConfigError("uc.trials must be positive");
  if (!(cfg.uc.rank_tolerance > 0.0)) throw ConfigError("uc.rank_tolerance must be positive");
  out["uc"] = Json{{"trials", cfg.uc.trials}, {"rank_tolerance", cfg.uc.rank_tolerance}};

  const Json sens = doc.value("sensitivity", Json::object());
  check_keys(sens, {"eps", "directions"}, "sensitivity");
  if (sens.contains("eps")) {
    const Vector e = number_array(sens.at("eps"), "sensitivity.eps");
    cfg.sensitivity.eps.assign(e.data(), e.data() + e.size());
  }
  if (cfg.sensitivity.eps.size() < 2) throw ConfigError("sensitivity.eps needs two values");
  for (double e : cfg.sensitivity.eps) {
    if (!(e > 0.0)) throw ConfigError("sensitivity.eps must be positive");
  }
  cfg.sensitivity.directions = static_cast<int>(integer(sens, "directions", 3, "sensitivity"));
  if (cfg.sensitivity.directions < 1) throw ConfigError("sensitivity.directions must be positive");
  out["sensitivity"] = Json{{"eps", cfg.sensitivity.eps},
                            {"directions", cfg.sensitivity.directions}};

  const Json nb = doc.value("norm_bound", Json::object());
  check_keys(nb, {"trials"}, "norm_bound");
  cfg.norm_bound.trials = static_cast<int>(integer(nb, "trials", 1000, "norm_bound"));
  if (cfg.norm_bound.trials < 1) throw ConfigError("norm_bound.trials must be positive");
  out["norm_bound"] = Json{{"trials", cfg.norm_bound.trials}};

  const Json ctl = doc.value("control", Json::object());
  check_keys(ctl, {"tol", "max_iter", "amplitude", "target"}, "control");
  cfg.control.tol = number(ctl, "tol", heat ? 1e-6 : 1e-5, "control");
  cfg.control.max_iter = static_cast<int>(integer(ctl, "max_iter", heat ? 20 : 30, "control"));
  cfg.control.amplitude = number(ctl, "amplitude", 0.1, "control");
  if (!(cfg.control.tol > 0.0)) throw ConfigError("control.tol must be positive");
  if (cfg.control.max_iter < 1) throw ConfigError("control.max_iter must be positive");
  if (!(cfg.control.amplitude >= 0.0 && cfg.control.amplitude < kLambdaBound)) {
    throw ConfigError("control.amplitude must lie in [0, 0.5)");
  }
  if (ctl.contains("target") && !ctl.at("target").is_null()) cfg.control.target = text(ctl, "target", "", "control");
  out["control"] = Json{{"tol", cfg.control.tol},
                        {"max_iter", cfg.control.max_iter},
                        {"amplitude", cfg.control.amplitude},
                        {"target", cfg.control.target ? Json(*cfg.control.target) : Json(nullptr)}};

  const Json adj = doc.value("adjoint", Json::object());
  check_keys(adj, {"c"}, "adjoint");
  if (adj.contains("c") && !adj.at("c").is_null()) {
    cfg.adjoint_c = number_array(adj.at("c"), "adjoint.c");
    const int dim = heat ? cfg.grid.interior_size() : 2 * cfg.grid.interior_size();
    if (cfg.adjoint_c->size() != dim) {
      throw ConfigError("adjoint.c needs " + std::to_string(dim) + " entries");
    }
  }
  out["adjoint"] = Json{{"c", cfg.adjoint_c ? to_json(*cfg.adjoint_c) : Json(nullptr)}};
  return cfg;
}

}  // namespace

ForwardSetup RunConfig::setup() const {
  return ForwardSetup{kind, grid, source, u0, u1, T, steps};
}

ControlProblem RunConfig::problem(Vector target) const {
  return ControlProblem{setup(), K, std::move(target)};
}

ControlOptions RunConfig::control_options() const {
  ControlOptions o;
  o.tol = control.tol;
  o.max_iter = control.max_iter;
  return o;
}

RunConfig parse_config(const Json& doc) {
  try {
    return parse_unchecked(doc);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

}  // namespace shapectl
