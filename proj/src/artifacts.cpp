#include "lsmdp/artifacts.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "lsmdp/csv.hpp"

namespace lsmdp::artifacts {

using nlohmann::json;

namespace {

void require_header(const json& doc, const char* kind) {
  if (!doc.is_object()) throw ValidationError("artifact is not a JSON object");
  if (!doc.contains("kind") || doc["kind"] != kind) {
    throw ValidationError(fmt::format("expected an artifact of kind '{}'", kind));
  }
  if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
    throw ValidationError("artifact has no integer schema_version");
  }
  const auto version = doc["schema_version"].get<long long>();
  if (version != kSchemaVersion) {
    throw ValidationError(fmt::format("unsupported schema_version {} (this build reads {})",
                                      version, kSchemaVersion));
  }
}

// Runs `f`, translating JSON access errors into ValidationError.
template <typename F>
auto guarded(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("malformed {}: {}", what, e.what()));
  }
}

json matrix_rows(const DenseMatrix& m) { return m.to_rows(); }

DenseMatrix matrix_from_rows(const json& rows) {
  return DenseMatrix::from_rows(rows.get<std::vector<std::vector<double>>>());
}

std::string trimmed(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::size_t parse_index(const std::string& field, std::string_view context) {
  const double v = csv::parse_double(field, context);
  if (v < 0.0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
    throw ValidationError(fmt::format("{}: '{}' is not a non-negative integer", context, field));
  }
  return static_cast<std::size_t>(v);
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  return in;
}

}  // namespace

// ---------------------------------------------------------------------------

json to_json(const MatrixArtifact& artifact) {
  return json{
      {"kind", kMatrixKind},
      {"schema_version", kSchemaVersion},
      {"state_space",
       {{"n_states", artifact.states.n_states()},
        {"bin_edges", artifact.states.bin_edges()},
        {"rated_power", artifact.states.rated_power()}}},
      {"matrix", matrix_rows(artifact.matrix.matrix())},
  };
}

MatrixArtifact matrix_from_json(const json& doc) {
  require_header(doc, kMatrixKind);
  return guarded("matrix artifact", [&] {
    const auto& ss = doc.at("state_space");
    auto states = StateSpace::make(ss.at("bin_edges").get<std::vector<double>>(),
                                   ss.at("rated_power").get<std::vector<double>>());
    if (ss.at("n_states").get<std::size_t>() != states.n_states()) {
      throw ValidationError("state_space.n_states disagrees with rated_power");
    }
    auto matrix = TransitionMatrix::make(matrix_from_rows(doc.at("matrix")));
    if (matrix.n_states() != states.n_states()) {
      throw ValidationError(fmt::format("matrix is {}x{} but the state space has {} states",
                                        matrix.n_states(), matrix.n_states(),
                                        states.n_states()));
    }
    return MatrixArtifact{std::move(states), std::move(matrix)};
  });
}

json to_json(const Policy& policy) {
  json slices = json::array();
  for (const auto& s : policy.slices()) slices.push_back(matrix_rows(s.matrix()));
  return json{
      {"kind", kPolicyKind},
      {"schema_version", kSchemaVersion},
      {"n_states", policy.n_states()},
      {"horizon_length", policy.n_slices() + 1},
      {"slices", std::move(slices)},
  };
}

Policy policy_from_json(const json& doc) {
  require_header(doc, kPolicyKind);
  return guarded("policy artifact", [&] {
    std::vector<TransitionMatrix> slices;
    for (const auto& s : doc.at("slices")) {
      slices.push_back(TransitionMatrix::make(matrix_from_rows(s)));
    }
    auto policy = Policy::make(std::move(slices));
    if (doc.at("n_states").get<std::size_t>() != policy.n_states() ||
        doc.at("horizon_length").get<std::size_t>() != policy.n_slices() + 1) {
      throw ValidationError("policy header disagrees with its slices");
    }
    return policy;
  });
}

json to_json(const LearningRun& run, const ZLearnSummary& summary) {
  const auto& cfg = run.config;
  json doc{
      {"kind", kZLearnRunKind},
      {"schema_version", kSchemaVersion},
      {"converged", run.converged},
      {"iterations", run.iterations},
      {"last_delta", run.last_delta},
      {"gamma", cfg.gamma},
      {"horizon_length", cfg.horizon_length},
      {"convergence_eps", cfg.convergence_eps},
      {"max_iterations", cfg.max_iterations},
      {"learning_rate", {{"form", "scale/(scale+k)"}, {"scale", cfg.learning_rate.scale}}},
      {"seed", cfg.rng_seed},
      {"sigma", summary.sigma},
      {"ensemble_size", summary.ensemble_size},
      {"z_hat", matrix_rows(run.z_hat.z_matrix())},
      {"phi_hat", matrix_rows(run.z_hat.value_table().values)},
  };
  doc["iterations_to_10pct_error"] =
      summary.iterations_to_10pct ? json(*summary.iterations_to_10pct) : json(nullptr);
  return doc;
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

json read_json_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(fmt::format("{}: invalid JSON: {}", path.string(), e.what()));
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw IoError(fmt::format("write to {} failed", path.string()));
}

// ---------------------------------------------------------------------------

UtilitySchedule read_utility_csv(std::istream& in) {
  const auto rows = csv::read(in);
  if (rows.size() < 2) throw ValidationError("utility CSV needs a header and at least one row");
  const auto& header = rows.front();
  if (header.size() < 3 || trimmed(header[0]) != "t") {
    throw ValidationError("utility CSV header must be 't' followed by one column per state");
  }
  const std::size_t n = header.size() - 1;
  DenseMatrix values(rows.size() - 1, n);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto context = fmt::format("utility CSV line {}", r + 1);
    if (rows[r].size() != header.size()) {
      throw ValidationError(fmt::format("{}: expected {} fields, got {}", context, header.size(),
                                        rows[r].size()));
    }
    if (parse_index(rows[r][0], context) != r) {
      throw ValidationError(fmt::format("{}: periods must be numbered 1, 2, ... in order", context));
    }
    for (std::size_t s = 0; s < n; ++s) values(r - 1, s) = csv::parse_double(rows[r][s + 1], context);
  }
  return UtilitySchedule::make(std::move(values));
}

UtilitySchedule read_utility_csv_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_utility_csv(in);
}

void write_utility_csv(std::ostream& out, const UtilitySchedule& utility) {
  out << 't';
  for (std::size_t s = 0; s < utility.n_states(); ++s) out << ",s" << s;
  out << '\n';
  for (std::size_t t = 0; t < utility.horizon_length(); ++t) {
    out << t + 1;
    for (double u : utility.slice(t)) out << ',' << csv::format_double(u);
    out << '\n';
  }
}

void write_values_csv(std::ostream& out, const DesirabilityTable& z) {
  out << "t,state,z,phi\n";
  for (std::size_t t = 0; t < z.horizon_length(); ++t) {
    for (std::size_t s = 0; s < z.n_states(); ++s) {
      out << t + 1 << ',' << s << ',' << csv::format_double(z.z(t, s)) << ','
          << csv::format_double(z.phi(t, s)) << '\n';
    }
  }
}

DesirabilityTable read_values_csv(std::istream& in, double gamma) {
  const auto rows = csv::read(in);
  if (rows.size() < 2) throw ValidationError("values CSV needs a header and data rows");
  const auto& h = rows.front();
  if (h.size() != 4 || trimmed(h[0]) != "t" || trimmed(h[1]) != "state" || trimmed(h[2]) != "z" ||
      trimmed(h[3]) != "phi") {
    throw ValidationError("values CSV header must be 't,state,z,phi'");
  }
  std::size_t horizon = 0;
  std::size_t n = 0;
  std::vector<std::tuple<std::size_t, std::size_t, double>> cells;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto context = fmt::format("values CSV line {}", r + 1);
    if (rows[r].size() != 4) throw ValidationError(fmt::format("{}: expected 4 fields", context));
    const auto t = parse_index(rows[r][0], context);
    const auto s = parse_index(rows[r][1], context);
    if (t == 0) throw ValidationError(fmt::format("{}: periods start at 1", context));
    cells.emplace_back(t - 1, s, csv::parse_double(rows[r][2], context));
    horizon = std::max(horizon, t);
    n = std::max(n, s + 1);
  }
  if (cells.size() != horizon * n) {
    throw ValidationError(fmt::format("values CSV has {} rows, expected {} x {}", cells.size(),
                                      horizon, n));
  }
  DenseMatrix z(horizon, n, 0.0);
  std::vector<bool> seen(horizon * n, false);
  for (const auto& [t, s, v] : cells) {
    if (seen[t * n + s]) throw ValidationError(fmt::format("values CSV repeats t={} state={}", t + 1, s));
    seen[t * n + s] = true;
    z(t, s) = v;
  }
  return DesirabilityTable::make(std::move(z), gamma);
}

DesirabilityTable read_values_csv_file(const std::filesystem::path& path, double gamma) {
  auto in = open_input(path);
  return read_values_csv(in, gamma);
}

std::vector<double> read_occupancy_csv(std::istream& in) {
  const auto rows = csv::read(in);
  if (rows.size() < 2) throw ValidationError("occupancy CSV needs a header and data rows");
  const auto& h = rows.front();
  if (h.size() != 2 || trimmed(h[0]) != "state" || trimmed(h[1]) != "probability") {
    throw ValidationError("occupancy CSV header must be 'state,probability'");
  }
  std::vector<double> rho;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto context = fmt::format("occupancy CSV line {}", r + 1);
    if (rows[r].size() != 2) throw ValidationError(fmt::format("{}: expected 2 fields", context));
    if (parse_index(rows[r][0], context) != r - 1) {
      throw ValidationError(fmt::format("{}: states must be listed 0, 1, ... in order", context));
    }
    rho.push_back(csv::parse_double(rows[r][1], context));
  }
  require_simplex(rho, "initial occupancy");
  return rho;
}

std::vector<double> read_occupancy_csv_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_occupancy_csv(in);
}

void write_error_curve_csv(std::ostream& out, const LearningRun& run) {
  out << "iteration";
  for (std::size_t t = 1; t < run.config.horizon_length; ++t) out << ",T" << t;
  out << '\n';
  for (std::size_t k = 0; k < run.error_history.size(); ++k) {
    out << k + 1;
    for (double e : run.error_history[k]) out << ',' << csv::format_double(e);
    out << '\n';
  }
}

void write_dispatch_csv(std::ostream& out, std::span<const DispatchColumn> columns) {
  if (columns.empty()) throw ValidationError("dispatch needs at least one policy");
  const std::size_t horizon = columns.front().power_kw.size();
  const std::size_t n = columns.front().occupancy.n_states();
  std::vector<std::string> header{"t"};
  for (const auto& c : columns) {
    if (c.power_kw.size() != horizon || c.occupancy.n_states() != n) {
      throw ValidationError("dispatch columns differ in shape");
    }
    header.push_back("power_kw_" + c.label);
  }
  for (const auto& c : columns) {
    for (std::size_t s = 0; s < n; ++s) header.push_back(fmt::format("rho_{}_{}", c.label, s));
  }
  csv::write_row(out, header);
  std::vector<std::string> row;
  for (std::size_t t = 0; t < horizon; ++t) {
    row.assign({std::to_string(t + 1)});
    for (const auto& c : columns) row.push_back(csv::format_double(c.power_kw[t]));
    for (const auto& c : columns) {
      for (double p : c.occupancy.slice(t)) row.push_back(csv::format_double(p));
    }
    csv::write_row(out, row);
  }
}

}  // namespace lsmdp::artifacts
