#pragma once

// Core value types for a discretized load ensemble. Everything here is
// immutable after construction and validated by its factory.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lsmdp/errors.hpp"

namespace lsmdp {

// Rows of a stochastic matrix and slices of an occupancy trajectory must sum
// to one within this tolerance.
inline constexpr double kRowSumTolerance = 1e-9;

// Dense row-major matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);

  // Throws ValidationError on ragged input.
  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  std::vector<std::vector<double>> to_rows() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Discretized power levels of the ensemble. State i covers the interval
// [bin_edges[i], bin_edges[i+1]] and draws rated_power[i] kW.
class StateSpace {
 public:
  static StateSpace make(std::vector<double> bin_edges, std::vector<double> rated_power);

  // n equal-width bins over [lo, hi] with midpoint rated power.
  static StateSpace equal_width(double lo, double hi, std::size_t n_states);

  std::size_t n_states() const { return rated_power_.size(); }
  const std::vector<double>& bin_edges() const { return bin_edges_; }
  const std::vector<double>& rated_power() const { return rated_power_; }

  // Bin lookup by edge comparison. Bins are half-open except the last, whose
  // top edge is inclusive. Values outside [front, back] are rejected.
  std::size_t state_of(double power_kw) const;

  bool operator==(const StateSpace&) const = default;

 private:
  StateSpace(std::vector<double> edges, std::vector<double> rated)
      : bin_edges_(std::move(edges)), rated_power_(std::move(rated)) {}

  std::vector<double> bin_edges_;
  std::vector<double> rated_power_;
};

struct Violation {
  std::optional<std::size_t> row;
  std::string message;
};

// First violated stochastic-matrix invariant (square shape, entries in
// [0, 1], rows summing to one), or nullopt.
std::optional<Violation> validate(const DenseMatrix& matrix);

// Row-stochastic matrix over a state space.
//
// Storage is source-row-major: entry (from, to) is the probability of moving
// from state `from` to state `to`. In the superscript notation P^{αβ} used
// for the ensemble dynamics, α is the destination and β the source, so
// P^{αβ} == prob(β, α).
class TransitionMatrix {
 public:
  // Throws ValidationError carrying the message of the first violation.
  static TransitionMatrix make(DenseMatrix matrix);
  static TransitionMatrix identity(std::size_t n_states);
  static TransitionMatrix uniform(std::size_t n_states);

  std::size_t n_states() const { return matrix_.rows(); }
  double prob(std::size_t from, std::size_t to) const { return matrix_(from, to); }
  std::span<const double> row(std::size_t from) const { return matrix_.row(from); }
  const DenseMatrix& matrix() const { return matrix_; }

  bool operator==(const TransitionMatrix&) const = default;

 private:
  explicit TransitionMatrix(DenseMatrix m) : matrix_(std::move(m)) {}
  DenseMatrix matrix_;
};

std::optional<Violation> validate(const TransitionMatrix& matrix);

// True when every nonzero of `inner` is also nonzero in `outer`.
bool support_within(const TransitionMatrix& inner, const TransitionMatrix& outer);

// Utility U_t^β per period (rows) and state (columns).
class UtilitySchedule {
 public:
  static UtilitySchedule make(DenseMatrix values);
  static UtilitySchedule zeros(std::size_t horizon_length, std::size_t n_states);

  std::size_t horizon_length() const { return values_.rows(); }
  std::size_t n_states() const { return values_.cols(); }
  double at(std::size_t t, std::size_t state) const { return values_(t, state); }
  std::span<const double> slice(std::size_t t) const { return values_.row(t); }
  const DenseMatrix& values() const { return values_; }

 private:
  explicit UtilitySchedule(DenseMatrix v) : values_(std::move(v)) {}
  DenseMatrix values_;
};

// Cost-to-go φ_t^β per period and state.
struct ValueTable {
  DenseMatrix values;
};

// Desirability z_t^β = exp(-φ_t^β / γ). z is the stored quantity; φ is always
// derived from it.
class DesirabilityTable {
 public:
  // Throws ValidationError unless every entry is finite and strictly positive.
  static DesirabilityTable make(DenseMatrix z, double gamma);
  static DesirabilityTable from_values(const ValueTable& phi, double gamma);

  std::size_t horizon_length() const { return z_.rows(); }
  std::size_t n_states() const { return z_.cols(); }
  double gamma() const { return gamma_; }

  double z(std::size_t t, std::size_t state) const { return z_(t, state); }
  std::span<const double> z_slice(std::size_t t) const { return z_.row(t); }
  const DenseMatrix& z_matrix() const { return z_; }

  double phi(std::size_t t, std::size_t state) const;
  ValueTable value_table() const;

 private:
  DesirabilityTable(DenseMatrix z, double gamma) : z_(std::move(z)), gamma_(gamma) {}
  DenseMatrix z_;
  double gamma_ = 1.0;
};

// Controlled dynamics, one transition matrix per period t = 0 .. T-2.
class Policy {
 public:
  static Policy make(std::vector<TransitionMatrix> slices);
  static Policy constant(const TransitionMatrix& matrix, std::size_t n_slices);

  std::size_t n_slices() const { return slices_.size(); }
  std::size_t n_states() const { return slices_.front().n_states(); }
  const TransitionMatrix& operator[](std::size_t t) const { return slices_[t]; }
  const std::vector<TransitionMatrix>& slices() const { return slices_; }

  bool operator==(const Policy&) const = default;

 private:
  explicit Policy(std::vector<TransitionMatrix> s) : slices_(std::move(s)) {}
  std::vector<TransitionMatrix> slices_;
};

// Occupancy ρ_t, one probability vector per period.
class OccupancyTrajectory {
 public:
  static OccupancyTrajectory make(DenseMatrix rho);

  std::size_t horizon_length() const { return rho_.rows(); }
  std::size_t n_states() const { return rho_.cols(); }
  std::span<const double> slice(std::size_t t) const { return rho_.row(t); }
  const DenseMatrix& matrix() const { return rho_; }

 private:
  explicit OccupancyTrajectory(DenseMatrix r) : rho_(std::move(r)) {}
  DenseMatrix rho_;
};

// Throws ValidationError unless `v` is non-negative and sums to one.
void require_simplex(std::span<const double> v, const std::string& what);

// η_k = scale / (scale + k) for iteration k >= 1.
struct LearningRateSchedule {
  double scale = 1000.0;

  double eta(std::uint64_t k) const { return scale / (scale + static_cast<double>(k)); }
};

struct ControlConfig {
  double gamma = 1.0;
  std::size_t horizon_length = 10;
  double convergence_eps = 1e-6;
  LearningRateSchedule learning_rate{};
  std::uint64_t max_iterations = 10000;
  std::uint64_t rng_seed = 0;
  // Initial-state weights for sampled trajectories; empty means uniform.
  std::vector<double> initial_state_weights;

  // Throws ValidationError.
  void validate() const;
};

}  // namespace lsmdp
