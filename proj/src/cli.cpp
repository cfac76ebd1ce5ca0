#include "shapectl/cli.hpp"

#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <Eigen/LU>

#include "shapectl/config.hpp"
#include "shapectl/domain_map.hpp"
#include "shapectl/errors.hpp"

namespace shapectl {

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string target;
  std::string path;
  std::int64_t seed = -1;
  bool quiet = false;
  double j11 = 1.0, j12 = 0.0, j21 = 0.0, j22 = 1.0;
};

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path);
}

RunConfig config_for(const Options& o) {
  if (o.config.empty()) throw ConfigError("--config is required");
  RunConfig cfg = load_config(o.config);
  if (o.seed >= 0) {
    cfg.seed = static_cast<std::uint64_t>(o.seed);
    cfg.resolved["seed"] = cfg.seed;
  }
  return cfg;
}

Json envelope(const RunConfig& cfg, const std::string& command) {
  return Json{{"version", kArtifactVersion}, {"command", command}, {"config", cfg.resolved}};
}

/// Document to --out when given, otherwise to stdout.
void emit(const Options& o, std::ostream& out, const std::string& content) {
  if (o.out.empty()) {
    out << content;
  } else {
    write_file(o.out, content);
  }
}

DeformationPath path_for(const Options& o, const RunConfig& cfg) {
  if (o.path.empty()) return DeformationPath::zero(cfg.grid, cfg.kind, cfg.T, cfg.K);
  std::ifstream in(o.path);
  if (!in) throw ConfigError("cannot open path " + o.path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("path file is not valid JSON: ") + e.what());
  }
  DeformationPath p = [&] {
    try {
      return path_from_json(j, cfg.grid);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(e.what());
    }
  }();
  if (p.kind() != cfg.kind || p.T() != cfg.T || p.K() != cfg.K) {
    throw ConfigError("path kind, T or K does not match the config");
  }
  return p;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  const RunConfig cfg = config_for(o);
  const DeformationPath path = path_for(o, cfg);
  const StateTrajectory traj = simulate(cfg.setup(), path);
  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  if (o.out.empty()) {
    out << csv.str();
    return kExitOk;
  }
  Json doc = envelope(cfg, "simulate");
  doc["path"] = to_json(path);
  doc["summary"] = trajectory_summary(traj);
  write_file(o.out, csv.str());
  write_file(o.out + ".summary.json", dump(doc));
  if (!o.quiet) out << dump(doc["summary"]);
  return kExitOk;
}

std::vector<DeformationPath> random_directions(const RunConfig& cfg, int count) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<DeformationPath> dirs;
  for (int d = 0; d < count; ++d) {
    Matrix c(cfg.grid.layer_size(), cfg.K);
    for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = dist(rng);
    dirs.push_back(DeformationPath::direction(cfg.grid, cfg.kind, cfg.T, c));
  }
  return dirs;
}

int cmd_sensitivity(const Options& o, std::ostream& out) {
  const RunConfig cfg = config_for(o);
  const FrechetReport report = frechet_residual(
      cfg.setup(), random_directions(cfg, cfg.sensitivity.directions), cfg.sensitivity.eps);
  Json doc = envelope(cfg, "sensitivity");
  doc["frechet"] = to_json(report);
  emit(o, out, dump(doc));
  return kExitOk;
}

int cmd_adjoint(const Options& o, std::ostream& out) {
  const RunConfig cfg = config_for(o);
  const ControlProblem problem = cfg.problem(Vector::Zero(
      cfg.kind == EquationKind::Heat ? cfg.grid.interior_size() : 2 * cfg.grid.interior_size()));
  Vector c;
  if (cfg.adjoint_c) {
    c = *cfg.adjoint_c;
  } else {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    c.resize(problem.state_dim());
    for (Eigen::Index k = 0; k < c.size(); ++k) c(k) = normal(rng);
    c.normalize();
  }
  const ForwardSetup setup = problem.aligned_setup();
  const StateTrajectory ref = simulate(setup, problem.zero_path());
  const AdjointTrajectory X = solve_adjoint(cfg.kind, c, setup.T, setup.steps, cfg.grid);
  const Layer1Pairing pairing = layer1_pairing(X, ref);

  Json doc = envelope(cfg, "adjoint");
  doc["c"] = to_json(c);
  doc["initial_state"] = to_json(X.states.front());
  doc["pairing_sup_abs"] = pairing.sup_abs();
  doc["control_map_transpose_c"] = to_json(adjoint_transpose_apply(problem, c));
  emit(o, out, dump(doc));
  return kExitOk;
}

int cmd_uc_check(const Options& o, std::ostream& out) {
  const RunConfig cfg = config_for(o);
  ForwardSetup setup = cfg.setup();
  const StateTrajectory ref =
      simulate(setup, DeformationPath::zero(cfg.grid, cfg.kind, cfg.T, cfg.K));
  const NDDReport ndd = check_ndd(ref, cfg.ndd.threshold, cfg.ndd.t_lo, cfg.ndd.t_hi);
  const UniqueContinuationReport uc =
      unique_continuation_check(ref, ndd, cfg.uc.trials, cfg.seed);
  Json doc = envelope(cfg, "uc-check");
  doc["ndd"] = to_json(ndd);
  doc["unique_continuation"] = to_json(uc);
  doc["verdict"] = uc.certified ? "surjective" : "deficient";
  emit(o, out, dump(doc));
  return kExitOk;
}

int cmd_control(const Options& o, std::ostream& out) {
  const RunConfig cfg = config_for(o);
  const int dim =
      cfg.kind == EquationKind::Heat ? cfg.grid.interior_size() : 2 * cfg.grid.interior_size();
  ControlProblem problem = cfg.problem(Vector::Zero(dim));

  Json truth = nullptr;
  std::string target_file = o.target;
  if (target_file.empty() && cfg.control.target) target_file = *cfg.control.target;
  if (!target_file.empty()) {
    problem.target = read_vector_csv_file(target_file);
    if (problem.target.size() != dim) {
      throw ConfigError("target has " + std::to_string(problem.target.size()) +
                        " values, expected " + std::to_string(dim));
    }
  } else {
    const DeformationPath star = manufactured_path(problem, cfg.control.amplitude, cfg.seed);
    problem.target = trace_map(star, problem);
    truth = to_json(star);
  }

  SurjectivityOptions sopt;
  sopt.rank_tolerance = cfg.uc.rank_tolerance;
  sopt.uc_trials = cfg.uc.trials;
  sopt.seed = cfg.seed;
  const SurjectivityReport surj = surjectivity_report(problem, sopt);

  const std::string prefix = o.out.empty() ? "control" : o.out;
  Json report = envelope(cfg, "control");
  report["target_source"] = target_file.empty() ? Json("manufactured") : Json(target_file);
  report["manufactured_path"] = truth;
  report["surjectivity"] = to_json(surj);
  try {
    const ControlResult result = solve_control(problem, cfg.control_options());
    Json path_doc = envelope(cfg, "control");
    path_doc["path"] = to_json(result.path);
    std::ostringstream residuals;
    write_series_csv(residuals, "residual", result.residual_history);
    report["iterations"] = result.iterations;
    report["relative_residual"] = result.relative_residual;
    report["converged"] = true;
    write_file(prefix + ".path.json", dump(path_doc));
    write_file(prefix + ".residuals.csv", residuals.str());
    write_file(prefix + ".report.json", dump(report));
    if (!o.quiet) {
      out << dump(Json{{"iterations", result.iterations},
                       {"relative_residual", result.relative_residual},
                       {"verdict", surj.verdict}});
    }
    return kExitOk;
  } catch (const NonConvergenceError& e) {
    std::ostringstream residuals;
    write_series_csv(residuals, "residual", e.residual_history());
    report["converged"] = false;
    report["failure"] = e.what();
    write_file(prefix + ".residuals.csv", residuals.str());
    write_file(prefix + ".report.json", dump(report));
    throw;
  }
}

int cmd_bmatrix(const Options& o, std::ostream& out) {
  Matrix J(2, 2);
  J << o.j11, o.j12, o.j21, o.j22;
  const Matrix B = transport_matrix(J);
  auto rows = [](const Matrix& m) {
    Json r = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      r.push_back(Json::array({m(i, 0), m(i, 1)}));
    }
    return r;
  };
  const Json doc{{"version", kArtifactVersion},
                 {"command", "bmatrix"},
                 {"J", rows(J)},
                 {"det_J", J.determinant()},
                 {"B", rows(B)}};
  emit(o, out, dump(doc));
  return kExitOk;
}

int cmd_report(const Options& o, std::ostream& out) {
  const RunConfig cfg = config_for(o);
  const int dim =
      cfg.kind == EquationKind::Heat ? cfg.grid.interior_size() : 2 * cfg.grid.interior_size();
  const ControlProblem problem = cfg.problem(Vector::Zero(dim));
  const StateTrajectory ref = simulate(problem.aligned_setup(), problem.zero_path());

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dist(-0.49, 0.49);
  Matrix c(cfg.grid.layer_size(), cfg.K);
  for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = dist(rng);
  if (cfg.kind == EquationKind::Wave) c = project_admissible(c, cfg.kind, cfg.T, 0.49);
  const DeformationPath probe(cfg.grid, cfg.kind, cfg.T, c);

  SurjectivityOptions sopt;
  sopt.rank_tolerance = cfg.uc.rank_tolerance;
  sopt.uc_trials = cfg.uc.trials;
  sopt.seed = cfg.seed;

  Json doc = envelope(cfg, "report");
  doc["reference"] = trajectory_summary(ref);
  doc["norm_bound"] = to_json(operator_norm_bound_check(probe, cfg.norm_bound.trials, cfg.seed));
  doc["ndd"] = to_json(check_ndd(ref, cfg.ndd.threshold, cfg.ndd.t_lo, cfg.ndd.t_hi));
  doc["surjectivity"] = to_json(surjectivity_report(problem, sopt));
  emit(o, out, dump(doc));
  return kExitOk;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  err << Json{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shape controllability toolkit for semi-discrete heat and wave equations",
               "shapectl"};
  app.require_subcommand(1);
  Options o;

  auto common = [&o](CLI::App* sub, bool needs_config) {
    auto* cfg = sub->add_option("--config", o.config, "Run configuration (JSON)");
    if (needs_config) cfg->required();
    sub->add_option("--out", o.out, "Output file (or prefix for control)");
    sub->add_option("--seed", o.seed, "Override the configured seed")->check(CLI::NonNegativeNumber);
    sub->add_flag("--quiet", o.quiet, "Suppress informational output");
  };

  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate the forward problem, CSV trajectory");
  common(simulate_cmd, true);
  simulate_cmd->add_option("--path", o.path, "Deformation path JSON (default: zero)");
  auto* sensitivity_cmd = app.add_subcommand("sensitivity", "First-order remainder report");
  common(sensitivity_cmd, true);
  auto* adjoint_cmd = app.add_subcommand("adjoint", "Backward adjoint solve and pairings");
  common(adjoint_cmd, true);
  auto* uc_cmd = app.add_subcommand("uc-check", "Non-degeneracy and unique-continuation trials");
  common(uc_cmd, true);
  auto* control_cmd = app.add_subcommand("control", "Gauss-Newton shape control to a target trace");
  common(control_cmd, true);
  control_cmd->add_option("--target", o.target, "Target trace CSV (default: manufactured)");
  auto* bmatrix_cmd = app.add_subcommand("bmatrix", "Transport matrix B for a 2x2 Jacobian");
  common(bmatrix_cmd, false);
  bmatrix_cmd->add_option("--j11", o.j11);
  bmatrix_cmd->add_option("--j12", o.j12);
  bmatrix_cmd->add_option("--j21", o.j21);
  bmatrix_cmd->add_option("--j22", o.j22);
  auto* report_cmd = app.add_subcommand("report", "Operator, NDD and surjectivity diagnostics");
  common(report_cmd, true);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kExitConfig;
  }

  try {
    if (simulate_cmd->parsed()) return cmd_simulate(o, out);
    if (sensitivity_cmd->parsed()) return cmd_sensitivity(o, out);
    if (adjoint_cmd->parsed()) return cmd_adjoint(o, out);
    if (uc_cmd->parsed()) return cmd_uc_check(o, out);
    if (control_cmd->parsed()) return cmd_control(o, out);
    if (bmatrix_cmd->parsed()) return cmd_bmatrix(o, out);
    if (report_cmd->parsed()) return cmd_report(o, out);
  } catch (const ConfigError& e) {
    report_error(err, "config", e.what());
    return kExitConfig;
  } catch (const NonConvergenceError& e) {
    report_error(err, "non_convergence", e.what());
    return kExitNonConvergence;
  } catch (const DeficiencyError& e) {
    report_error(err, "deficiency", e.what());
    return kExitNonConvergence;
  } catch (const AdmissibilityError& e) {
    report_error(err, "admissibility", e.what());
    return kExitAdmissibility;
  } catch (const SingularityError& e) {
    report_error(err, "singularity", e.what());
    return kExitFailure;
  } catch (const ResolutionError& e) {
    report_error(err, "resolution", e.what());
    return kExitFailure;
  } catch (const DivergenceError& e) {
    report_error(err, "divergence", e.what());
    return kExitFailure;
  } catch (const DomainError& e) {
    report_error(err, "domain", e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    report_error(err, "error", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace shapectl
