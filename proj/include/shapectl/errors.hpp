#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace shapectl {

/// Index or dimension outside the valid range.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller violated a precondition that is not a range problem (e.g. a field
/// that should vanish on the boundary does not).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Deformation coefficients outside the admissible set.
class AdmissibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration, including time steps violating the wave CFL
/// limit.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int step)
      : std::runtime_error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

class SingularityError : public std::runtime_error {
 public:
  SingularityError(const std::string& what, double abs_det)
      : std::runtime_error(what), abs_det_(abs_det) {}
  double abs_det() const { return abs_det_; }

 private:
  double abs_det_;
};

/// Time series too coarse for the finite-difference time derivative.
class ResolutionError : public std::runtime_error {
 public:
  ResolutionError(const std::string& what, double relative_change)
      : std::runtime_error(what), relative_change_(relative_change) {}
  double relative_change() const { return relative_change_; }

 private:
  double relative_change_;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const { return history_; }

 private:
  std::vector<double> history_;
};

}  // namespace shapectl
