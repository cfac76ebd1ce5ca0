#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shapectl/control.hpp"
#include "shapectl/io.hpp"

namespace shapectl {

/// Fully resolved run configuration. Every field has a value after parsing;
/// `resolved` is the same content as JSON, embedded in every output.
struct RunConfig {
  GridSpec grid{1.0, 1.0, 4, 4};
  EquationKind kind = EquationKind::Heat;
  double T = 1.0;
  int steps = 200;  // already a multiple of K
  int K = 3;
  std::uint64_t seed = 0;

  SourceTerm source;
  Vector u0;
  Vector u1;

  struct Ndd {
    std::optional<double> threshold;
    double t_lo = 0.0;
    double t_hi = 0.0;
  } ndd;
  struct Uc {
    int trials = 20;
    double rank_tolerance = 1e-6;
  } uc;
  struct Sensitivity {
    std::vector<double> eps{1e-2, 1e-3, 1e-4};
    int directions = 3;
  } sensitivity;
  struct NormBound {
    int trials = 1000;
  } norm_bound;
  struct Control {
    double tol = 1e-6;
    int max_iter = 20;
    double amplitude = 0.1;
    std::optional<std::string> target;
  } control;
  std::optional<Vector> adjoint_c;

  Json resolved;

  ForwardSetup setup() const;
  ControlProblem problem(Vector target) const;
  ControlOptions control_options() const;
};

/// Validates the whole document before anything is solved. Unknown keys,
/// wrong types and out-of-range values raise ConfigError.
RunConfig parse_config(const Json& doc);
RunConfig load_config(const std::string& path);

}  // namespace shapectl
