#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "shapectl/adjoint.hpp"
#include "shapectl/control.hpp"
#include "shapectl/dynamics.hpp"
#include "shapectl/operators.hpp"
#include "shapectl/sensitivity.hpp"

namespace shapectl {

using Json = nlohmann::ordered_json;

inline constexpr const char* kArtifactVersion = "shapectl 0.1.0";

/// %.17g, which round-trips every double.
std::string format_double(double x);

/// Header "t,u_1_1,u_1_2,..." in interior ordering (i outer, j inner); wave
/// trajectories append the velocity columns "v_i_j".
std::string trajectory_csv_header(const StateTrajectory& traj);
void write_trajectory_csv(std::ostream& out, const StateTrajectory& traj);

/// One value per line under a single-word header.
void write_vector_csv(std::ostream& out, const std::string& header, const Vector& v);
void write_series_csv(std::ostream& out, const std::string& header,
                      const std::vector<double>& values);
/// Reads every numeric field of a CSV (commas or newlines), skipping a
/// non-numeric header line. Throws ConfigError on malformed numbers.
Vector read_vector_csv(std::istream& in);
Vector read_vector_csv_file(const std::string& path);

std::string kind_name(EquationKind kind);
/// Throws ConfigError for anything but "heat" or "wave".
EquationKind parse_kind(const std::string& name);

Json to_json(const GridSpec& grid);
GridSpec grid_from_json(const Json& j);

/// {"kind", "T", "K", "lambda": [[...] per boundary node]}.
Json to_json(const DeformationPath& path);
DeformationPath path_from_json(const Json& j, const GridSpec& grid);

Json to_json(const Vector& v);
Vector vector_from_json(const Json& j);

Json to_json(const NDDReport& r);
NDDReport ndd_from_json(const Json& j);
Json to_json(const UniqueContinuationReport& r);
UniqueContinuationReport uc_from_json(const Json& j);
Json to_json(const SurjectivityReport& r);
SurjectivityReport surjectivity_from_json(const Json& j);

Json to_json(const FrechetReport& r);
Json to_json(const NormBoundReport& r);
Json trajectory_summary(const StateTrajectory& traj);

}  // namespace shapectl
