#include "shapectl/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "shapectl/errors.hpp"

namespace shapectl {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trajectory_csv_header(const StateTrajectory& traj) {
  const GridSpec& g = traj.grid;
  std::string header = "t";
  const std::vector<char> prefixes =
      traj.kind == EquationKind::Heat ? std::vector<char>{'u'} : std::vector<char>{'u', 'v'};
  for (const char p : prefixes) {
    for (int i = 1; i < g.M(); ++i) {
      for (int j = 1; j < g.N(); ++j) {
        header += ',';
        header += p;
        header += '_' + std::to_string(i) + '_' + std::to_string(j);
      }
    }
  }
  return header;
}

void write_trajectory_csv(std::ostream& out, const StateTrajectory& traj) {
  out << trajectory_csv_header(traj) << '\n';
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    out << format_double(traj.times[s]);
    const Vector& x = traj.states[s];
    for (Eigen::Index k = 0; k < x.size(); ++k) out << ',' << format_double(x(k));
    out << '\n';
  }
}

void write_vector_csv(std::ostream& out, const std::string& header, const Vector& v) {
  out << header << '\n';
  for (Eigen::Index k = 0; k < v.size(); ++k) out << format_double(v(k)) << '\n';
}

void write_series_csv(std::ostream& out, const std::string& header,
                      const std::vector<double>& values) {
  write_vector_csv(out, header,
                   Eigen::Map<const Vector>(values.data(),
                                            static_cast<Eigen::Index>(values.size())));
}

namespace {

bool parse_number(const std::string& field, double& value) {
  std::size_t start = field.find_first_not_of(" \t\r");
  if (start == std::string::npos) return false;
  std::size_t end = field.find_last_not_of(" \t\r");
  const std::string s = field.substr(start, end - start + 1);
  std::istringstream is(s);
  is.imbue(std::locale::classic());
  is >> value;
  return !is.fail() && is.eof();
}

}  // namespace

Vector read_vector_csv(std::istream& in) {
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<double> row;
    bool numeric = true;
    while (std::getline(ss, field, ',')) {
      double v = 0.0;
      if (!parse_number(field, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (values.empty() && line_no == 1) continue;  // header
      throw ConfigError("CSV line " + std::to_string(line_no) + " is not numeric");
    }
    values.insert(values.end(), row.begin(), row.end());
  }
  Vector out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) out(static_cast<Eigen::Index>(k)) = values[k];
  return out;
}

Vector read_vector_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return read_vector_csv(in);
}

std::string kind_name(EquationKind kind) {
  return kind == EquationKind::Heat ? "heat" : "wave";
}

EquationKind parse_kind(const std::string& name) {
  if (name == "heat") return EquationKind::Heat;
  if (name == "wave") return EquationKind::Wave;
  throw ConfigError("unknown equation kind '" + name + "'");
}

Json to_json(const GridSpec& grid) {
  return Json{{"a", grid.a()}, {"b", grid.b()}, {"M", grid.M()}, {"N", grid.N()}};
}

GridSpec grid_from_json(const Json& j) {
  return GridSpec(j.at("a").get<double>(), j.at("b").get<double>(), j.at("M").get<int>(),
                  j.at("N").get<int>());
}

Json to_json(const DeformationPath& path) {
  Json lambda = Json::array();
  const Matrix& c = path.coeffs();
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < c.cols(); ++k) row.push_back(c(j, k));
    lambda.push_back(std::move(row));
  }
  return Json{{"kind", kind_name(path.kind())},
              {"T", path.T()},
              {"K", path.K()},
              {"lambda", std::move(lambda)}};
}

DeformationPath path_from_json(const Json& j, const GridSpec& grid) {
  const EquationKind kind = parse_kind(j.at("kind").get<std::string>());
  const int K = j.at("K").get<int>();
  const Json& lambda = j.at("lambda");
  if (static_cast<int>(lambda.size()) != grid.layer_size()) {
    throw ConfigError("path lambda needs " + std::to_string(grid.layer_size()) + " rows");
  }
  Matrix c(grid.layer_size(), K);
  for (int r = 0; r < grid.layer_size(); ++r) {
    if (static_cast<int>(lambda[r].size()) != K) {
      throw ConfigError("path lambda row " + std::to_string(r) + " needs " +
                        std::to_string(K) + " entries");
    }
    for (int k = 0; k < K; ++k) c(r, k) = lambda[r][k].get<double>();
  }
  return DeformationPath(grid, kind, j.at("T").get<double>(), c);
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

Vector vector_from_json(const Json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  return v;
}

namespace {

// JSON has no infinities; they are written as null.
Json finite_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double read_maybe_inf(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

}  // namespace

Json to_json(const NDDReport& r) {
  return Json{{"min_abs", finite_or_null(r.min_abs)},
              {"argmin_t", r.argmin_t},
              {"argmin_j", r.argmin_j},
              {"threshold", r.threshold},
              {"scale", r.scale},
              {"t_lo", r.t_lo},
              {"t_hi", r.t_hi},
              {"satisfied", r.satisfied}};
}

NDDReport ndd_from_json(const Json& j) {
  NDDReport r;
  r.min_abs = read_maybe_inf(j.at("min_abs"));
  r.argmin_t = j.at("argmin_t").get<double>();
  r.argmin_j = j.at("argmin_j").get<int>();
  r.threshold = j.at("threshold").get<double>();
  r.scale = j.at("scale").get<double>();
  r.t_lo = j.at("t_lo").get<double>();
  r.t_hi = j.at("t_hi").get<double>();
  r.satisfied = j.at("satisfied").get<bool>();
  return r;
}

Json to_json(const UniqueContinuationReport& r) {
  return Json{{"trials", r.trials},
              {"zero_pairing_level", r.zero_pairing_level},
              {"tolerance", r.tolerance},
              {"max_residual_c", r.max_residual_c},
              {"max_chain_residual", r.max_chain_residual},
              {"max_reconstruction_error", r.max_reconstruction_error},
              {"min_pairing_ratio", finite_or_null(r.min_pairing_ratio)},
              {"annihilating_found", r.annihilating_found},
              {"annihilating_c", to_json(r.annihilating_c)},
              {"certified", r.certified}};
}

UniqueContinuationReport uc_from_json(const Json& j) {
  UniqueContinuationReport r;
  r.trials = j.at("trials").get<int>();
  r.zero_pairing_level = j.at("zero_pairing_level").get<double>();
  r.tolerance = j.at("tolerance").get<double>();
  r.max_residual_c = j.at("max_residual_c").get<double>();
  r.max_chain_residual = j.at("max_chain_residual").get<double>();
  r.max_reconstruction_error = j.at("max_reconstruction_error").get<double>();
  r.min_pairing_ratio = read_maybe_inf(j.at("min_pairing_ratio"));
  r.annihilating_found = j.at("annihilating_found").get<bool>();
  r.annihilating_c = vector_from_json(j.at("annihilating_c"));
  r.certified = j.at("certified").get<bool>();
  return r;
}

Json to_json(const SurjectivityReport& r) {
  return Json{{"kind", kind_name(r.kind)},
              {"rows", r.rows},
              {"cols", r.cols},
              {"singular_values", r.singular_values},
              {"sigma_max", r.sigma_max},
              {"sigma_min", r.sigma_min},
              {"condition", finite_or_null(r.condition)},
              {"rank_tolerance", r.rank_tolerance},
              {"ndd", to_json(r.ndd)},
              {"unique_continuation", to_json(r.unique_continuation)},
              {"svd_surjective", r.svd_surjective},
              {"uc_surjective", r.uc_surjective},
              {"agree", r.agree},
              {"verdict", r.verdict}};
}

SurjectivityReport surjectivity_from_json(const Json& j) {
  SurjectivityReport r;
  r.kind = parse_kind(j.at("kind").get<std::string>());
  r.rows = j.at("rows").get<int>();
  r.cols = j.at("cols").get<int>();
  r.singular_values = j.at("singular_values").get<std::vector<double>>();
  r.sigma_max = j.at("sigma_max").get<double>();
  r.sigma_min = j.at("sigma_min").get<double>();
  r.condition = read_maybe_inf(j.at("condition"));
  r.rank_tolerance = j.at("rank_tolerance").get<double>();
  r.ndd = ndd_from_json(j.at("ndd"));
  r.unique_continuation = uc_from_json(j.at("unique_continuation"));
  r.svd_surjective = j.at("svd_surjective").get<bool>();
  r.uc_surjective = j.at("uc_surjective").get<bool>();
  r.agree = j.at("agree").get<bool>();
  r.verdict = j.at("verdict").get<std::string>();
  return r;
}

Json to_json(const FrechetReport& r) {
  Json dirs = Json::array();
  for (const FrechetDirection& d : r.directions) {
    dirs.push_back(Json{{"direction", to_json(d.direction)},
                        {"remainders", d.remainders},
                        {"slope", d.slope}});
  }
  return Json{{"kind", kind_name(r.kind)},
              {"eps", r.eps},
              {"directions", std::move(dirs)},
              {"min_slope", r.min_slope}};
}

Json to_json(const NormBoundReport& r) {
  return Json{{"max_ratio", r.max_ratio},
              {"bound", r.bound},
              {"trials", r.trials},
              {"within_bound", r.within_bound()}};
}

Json trajectory_summary(const StateTrajectory& traj) {
  const Vector& last = traj.final_state();
  double max_norm = 0.0;
  for (const Vector& x : traj.states) max_norm = std::max(max_norm, x.lpNorm<Eigen::Infinity>());
  Json out{{"kind", kind_name(traj.kind)},
           {"samples", traj.times.size()},
           {"T", traj.times.back()},
           {"final_position", to_json(traj.position(traj.size() - 1))}};
  if (traj.kind == EquationKind::Wave) {
    out["final_velocity"] = to_json(traj.velocity(traj.size() - 1));
    out["final_energy"] = wave_energy(traj.grid, last);
    out["initial_energy"] = wave_energy(traj.grid, traj.states.front());
  }
  out["final_norm_2"] = last.norm();
  out["final_norm_inf"] = last.lpNorm<Eigen::Infinity>();
  out["max_norm_inf"] = max_norm;
  return out;
}

}  // namespace shapectl
