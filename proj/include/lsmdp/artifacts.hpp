#pragma once

// On-disk formats. Matrices and policies are JSON documents carrying a
// `schema_version` and a `kind`; time series are CSV with a header row.
//
// JSON is written with sorted keys and shortest round-trip number formatting,
// so load followed by save reproduces a file byte for byte.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lsmdp/ensemble_model.hpp"
#include "lsmdp/zlearn.hpp"

namespace lsmdp::artifacts {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kMatrixKind = "lsmdp.transition_matrix";
inline constexpr const char* kPolicyKind = "lsmdp.policy";
inline constexpr const char* kZLearnRunKind = "lsmdp.zlearn_run";

struct MatrixArtifact {
  StateSpace states;
  TransitionMatrix matrix;
};

nlohmann::json to_json(const MatrixArtifact& artifact);
// Throws ValidationError on a wrong kind, unknown schema version, or any
// violated invariant.
MatrixArtifact matrix_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const Policy& policy);
Policy policy_from_json(const nlohmann::json& doc);

struct ZLearnSummary {
  double sigma = 0.0;
  std::size_t ensemble_size = 1;
  std::optional<std::uint64_t> iterations_to_10pct;
};
nlohmann::json to_json(const LearningRun& run, const ZLearnSummary& summary);

// Canonical text: two-space indent, trailing newline.
std::string dump(const nlohmann::json& doc);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

// utility.csv: header `t,<one column per state>`, one row per period with
// t = 1 .. T in order.
UtilitySchedule read_utility_csv(std::istream& in);
UtilitySchedule read_utility_csv_file(const std::filesystem::path& path);
void write_utility_csv(std::ostream& out, const UtilitySchedule& utility);

// values.csv: header `t,state,z,phi`, rows ordered by t then state, t 1-based
// and state 0-based.
void write_values_csv(std::ostream& out, const DesirabilityTable& z);
DesirabilityTable read_values_csv(std::istream& in, double gamma);
DesirabilityTable read_values_csv_file(const std::filesystem::path& path, double gamma);

// rho.csv: header `state,probability`, one row per state in order.
std::vector<double> read_occupancy_csv(std::istream& in);
std::vector<double> read_occupancy_csv_file(const std::filesystem::path& path);

// error_curve.csv: header `iteration,T1,...,T{T-1}`.
void write_error_curve_csv(std::ostream& out, const LearningRun& run);

struct DispatchColumn {
  std::string label;
  OccupancyTrajectory occupancy;
  std::vector<double> power_kw;
};

// dispatch.csv: `t`, then `power_kw_<label>` for every column, then
// `rho_<label>_<state>` for every column and state.
void write_dispatch_csv(std::ostream& out, std::span<const DispatchColumn> columns);

}  // namespace lsmdp::artifacts
