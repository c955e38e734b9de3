#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace lsmdp::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInputValidation = 2,
  kNumerical = 3,
  kIo = 4,
};

// Seed used when --seed is absent.
inline constexpr const char* kSeedEnvVar = "LSMDP_SEED";

struct EstimateOptions {
  std::filesystem::path trace;
  std::filesystem::path out;
  std::size_t n_states = 12;
  double smoothing = 0.0;
  std::optional<std::string> season_from;
  std::optional<std::string> season_to;
};

struct SolveOptions {
  std::filesystem::path matrix;
  std::filesystem::path utility;
  double gamma = 1.0;
  std::filesystem::path policy_out;
  std::filesystem::path values_out;
};

struct LearnOptions {
  std::filesystem::path matrix;
  std::filesystem::path utility;
  double gamma = 1.0;
  double sigma = 0.0;
  std::size_t ensemble = 1;
  double eps = 1e-6;
  std::uint64_t max_iters = 10000;
  std::uint64_t seed = 0;
  double eta_scale = 1000.0;
  std::optional<std::filesystem::path> reference;
  std::filesystem::path run_out;
  std::filesystem::path curve_out;
  std::optional<std::filesystem::path> policy_out;
};

struct DispatchOptions {
  std::filesystem::path matrix;
  std::vector<std::filesystem::path> policies;
  std::filesystem::path initial;
  std::filesystem::path out;
  std::optional<std::filesystem::path> utility;
  std::optional<double> gamma;
  std::optional<std::filesystem::path> summary_out;
};

struct SynthOptions {
  std::string season = "summer";
  std::string start = "2013-07-01";
  std::size_t days = 92;
  std::size_t houses = 100;
  double noise = 0.2;
  std::uint64_t seed = 0;
  std::filesystem::path out;
};

// Each command throws lsmdp::Error subclasses on failure and returns kOk.
int cmd_estimate(const EstimateOptions& opt);
int cmd_solve(const SolveOptions& opt);
int cmd_learn(const LearnOptions& opt);
int cmd_dispatch(const DispatchOptions& opt);
int cmd_synth_trace(const SynthOptions& opt);

// Full entry point: parses arguments, runs the command, maps errors to exit
// codes, and reports them on stderr.
int run(int argc, const char* const* argv);

}  // namespace lsmdp::cli
