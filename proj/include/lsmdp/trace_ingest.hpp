#pragma once

// Power-trace ingestion: CSV loading, synthetic neighborhoods, discretization
// into power states, and estimation of the passive transition matrix with its
// noisy variants.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lsmdp/ensemble_model.hpp"

namespace lsmdp {

using Timestamp = std::chrono::sys_seconds;

class PowerTrace {
 public:
  // Throws ValidationError unless timestamps strictly increase, the lengths
  // agree, and every power sample is finite and non-negative.
  static PowerTrace make(std::vector<Timestamp> timestamps, std::vector<double> power_kw,
                         std::optional<std::string> season = std::nullopt);

  std::size_t size() const { return power_kw_.size(); }
  bool empty() const { return power_kw_.empty(); }
  const std::vector<Timestamp>& timestamps() const { return timestamps_; }
  const std::vector<double>& power_kw() const { return power_kw_; }
  const std::optional<std::string>& season() const { return season_; }

 private:
  PowerTrace(std::vector<Timestamp> ts, std::vector<double> p, std::optional<std::string> s)
      : timestamps_(std::move(ts)), power_kw_(std::move(p)), season_(std::move(s)) {}

  std::vector<Timestamp> timestamps_;
  std::vector<double> power_kw_;
  std::optional<std::string> season_;
};

// Accepts epoch seconds, YYYY-MM-DD, or YYYY-MM-DD[T ]HH:MM[:SS][Z] (UTC).
Timestamp parse_timestamp(std::string_view text);
std::chrono::sys_days parse_date(std::string_view text);
std::string format_timestamp(Timestamp ts);

// Reads a `timestamp,power_kw` CSV with a mandatory header row.
PowerTrace read_trace_csv(std::istream& in);
PowerTrace read_trace_csv_file(const std::filesystem::path& path);
void write_trace_csv(std::ostream& out, const PowerTrace& trace);

// Keeps samples whose calendar date lies in [from, to], both inclusive.
PowerTrace filter_dates(const PowerTrace& trace, std::optional<std::chrono::sys_days> from,
                        std::optional<std::chrono::sys_days> to);

// Sum of n_houses copies of `base`, each sample scaled by an independent
// uniform factor in [1 - noise_frac, 1 + noise_frac].
PowerTrace synthesize_neighborhood(const PowerTrace& base, std::size_t n_houses,
                                   double noise_frac, std::uint64_t seed);

enum class Season { kSummer, kWinter };

// Hourly single-house HVAC profile with a diurnal cycle: cooling that peaks in
// the afternoon for summer, heating that peaks before dawn for winter.
PowerTrace synthetic_hvac_trace(std::chrono::sys_days start, std::size_t days, Season season,
                                std::uint64_t seed);

struct Discretization {
  StateSpace states;
  std::vector<std::size_t> sequence;
};

// Equal-width bins over [min, max] of the trace; rated power is the bin
// midpoint and the top edge is inclusive.
Discretization discretize(const PowerTrace& trace, std::size_t n_states);

// Maximum-likelihood transition counts with additive smoothing on observed
// rows. Rows that never occur as a source become self-loops.
TransitionMatrix estimate_matrix(std::span<const std::size_t> state_sequence,
                                 std::size_t n_states, double smoothing = 0.0);

struct NoisyEnsemble {
  TransitionMatrix base;
  std::vector<TransitionMatrix> members;
  double sigma = 0.0;
  std::uint64_t rng_seed = 0;
};

// Each member is `base` plus zero-row-sum Gaussian noise restricted to the
// support of each row, clipped at zero and renormalized. Member m draws from a
// stream seeded by (seed, m).
NoisyEnsemble perturb_ensemble(const TransitionMatrix& base, std::size_t n_members, double sigma,
                               std::uint64_t seed);

// Elementwise mean of the ensemble members.
DenseMatrix ensemble_mean(const NoisyEnsemble& ensemble);

}  // namespace lsmdp
