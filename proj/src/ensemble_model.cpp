#include "lsmdp/ensemble_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

namespace lsmdp {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix DenseMatrix::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  DenseMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw ValidationError(
          fmt::format("row {} has {} entries, expected {}", r, rows[r].size(), cols));
    }
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<std::vector<double>> DenseMatrix::to_rows() const {
  std::vector<std::vector<double>> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r].assign(row(r).begin(), row(r).end());
  return out;
}

// ---------------------------------------------------------------------------

StateSpace StateSpace::make(std::vector<double> bin_edges, std::vector<double> rated_power) {
  if (rated_power.size() < 2) {
    throw ValidationError(fmt::format("state space needs at least 2 states, got {}",
                                      rated_power.size()));
  }
  if (bin_edges.size() != rated_power.size() + 1) {
    throw ValidationError(fmt::format("{} bin edges for {} states", bin_edges.size(),
                                      rated_power.size()));
  }
  for (std::size_t i = 0; i < bin_edges.size(); ++i) {
    if (!std::isfinite(bin_edges[i])) {
      throw ValidationError(fmt::format("bin edge {} is not finite", i));
    }
    if (i > 0 && !(bin_edges[i] > bin_edges[i - 1])) {
      throw ValidationError(fmt::format("bin edges not strictly increasing at {}", i));
    }
  }
  for (std::size_t i = 0; i < rated_power.size(); ++i) {
    if (!(rated_power[i] >= bin_edges[i] && rated_power[i] <= bin_edges[i + 1])) {
      throw ValidationError(fmt::format("rated power {} of state {} outside [{}, {}]",
                                        rated_power[i], i, bin_edges[i], bin_edges[i + 1]));
    }
  }
  return StateSpace(std::move(bin_edges), std::move(rated_power));
}

StateSpace StateSpace::equal_width(double lo, double hi, std::size_t n_states) {
  if (n_states < 2) {
    throw ValidationError(fmt::format("state space needs at least 2 states, got {}", n_states));
  }
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ValidationError(fmt::format("power range [{}, {}] is empty", lo, hi));
  }
  const double width = (hi - lo) / static_cast<double>(n_states);
  std::vector<double> edges(n_states + 1);
  for (std::size_t i = 0; i <= n_states; ++i) edges[i] = lo + width * static_cast<double>(i);
  edges.back() = hi;
  std::vector<double> rated(n_states);
  for (std::size_t i = 0; i < n_states; ++i) rated[i] = 0.5 * (edges[i] + edges[i + 1]);
  return make(std::move(edges), std::move(rated));
}

std::size_t StateSpace::state_of(double power_kw) const {
  if (!(power_kw >= bin_edges_.front() && power_kw <= bin_edges_.back())) {
    throw ValidationError(fmt::format("power {} outside state range [{}, {}]", power_kw,
                                      bin_edges_.front(), bin_edges_.back()));
  }
  const auto it = std::upper_bound(bin_edges_.begin(), bin_edges_.end(), power_kw);
  const auto idx = static_cast<std::size_t>(it - bin_edges_.begin());
  return std::min(idx, n_states()) - 1;
}

// ---------------------------------------------------------------------------

std::optional<Violation> validate(const DenseMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) {
    return Violation{std::nullopt,
                     fmt::format("matrix is {}x{}, not square", matrix.rows(), matrix.cols())};
  }
  if (matrix.rows() == 0) return Violation{std::nullopt, "matrix is empty"};
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < matrix.cols(); ++c) {
      const double p = matrix(r, c);
      if (!(p >= 0.0 && p <= 1.0)) {
        return Violation{r, fmt::format("row {} entry {} = {} outside [0, 1]", r, c, p)};
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      return Violation{r, fmt::format("row {} sums to {}", r, sum)};
    }
  }
  return std::nullopt;
}

std::optional<Violation> validate(const TransitionMatrix& matrix) {
  return validate(matrix.matrix());
}

TransitionMatrix TransitionMatrix::make(DenseMatrix matrix) {
  if (auto v = validate(matrix)) throw ValidationError(v->message);
  return TransitionMatrix(std::move(matrix));
}

TransitionMatrix TransitionMatrix::identity(std::size_t n_states) {
  DenseMatrix m(n_states, n_states);
  for (std::size_t i = 0; i < n_states; ++i) m(i, i) = 1.0;
  return make(std::move(m));
}

TransitionMatrix TransitionMatrix::uniform(std::size_t n_states) {
  return make(DenseMatrix(n_states, n_states, 1.0 / static_cast<double>(n_states)));
}

bool support_within(const TransitionMatrix& inner, const TransitionMatrix& outer) {
  if (inner.n_states() != outer.n_states()) return false;
  const auto a = inner.matrix().data();
  const auto b = outer.matrix().data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > 0.0 && !(b[i] > 0.0)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

UtilitySchedule UtilitySchedule::make(DenseMatrix values) {
  if (values.rows() < 2) {
    throw ValidationError(
        fmt::format("utility schedule needs a horizon of at least 2, got {}", values.rows()));
  }
  if (values.cols() < 2) {
    throw ValidationError(
        fmt::format("utility schedule needs at least 2 states, got {}", values.cols()));
  }
  for (std::size_t t = 0; t < values.rows(); ++t) {
    for (std::size_t s = 0; s < values.cols(); ++s) {
      if (!std::isfinite(values(t, s))) {
        throw ValidationError(fmt::format("utility at t={} state={} is not finite", t, s));
      }
    }
  }
  return UtilitySchedule(std::move(values));
}

UtilitySchedule UtilitySchedule::zeros(std::size_t horizon_length, std::size_t n_states) {
  return make(DenseMatrix(horizon_length, n_states, 0.0));
}

// ---------------------------------------------------------------------------

namespace {

void require_positive_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ValidationError(fmt::format("gamma must be positive and finite, got {}", gamma));
  }
}

}  // namespace

DesirabilityTable DesirabilityTable::make(DenseMatrix z, double gamma) {
  require_positive_gamma(gamma);
  for (std::size_t t = 0; t < z.rows(); ++t) {
    for (std::size_t s = 0; s < z.cols(); ++s) {
      const double v = z(t, s);
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(
            fmt::format("desirability at t={} state={} is {}, must be positive", t, s, v));
      }
    }
  }
  return DesirabilityTable(std::move(z), gamma);
}

DesirabilityTable DesirabilityTable::from_values(const ValueTable& phi, double gamma) {
  require_positive_gamma(gamma);
  DenseMatrix z(phi.values.rows(), phi.values.cols());
  for (std::size_t t = 0; t < z.rows(); ++t) {
    for (std::size_t s = 0; s < z.cols(); ++s) z(t, s) = std::exp(-phi.values(t, s) / gamma);
  }
  return make(std::move(z), gamma);
}

double DesirabilityTable::phi(std::size_t t, std::size_t state) const {
  return -gamma_ * std::log(z_(t, state));
}

ValueTable DesirabilityTable::value_table() const {
  DenseMatrix phi_m(z_.rows(), z_.cols());
  for (std::size_t t = 0; t < z_.rows(); ++t) {
    for (std::size_t s = 0; s < z_.cols(); ++s) phi_m(t, s) = phi(t, s);
  }
  return ValueTable{std::move(phi_m)};
}

// ---------------------------------------------------------------------------

Policy Policy::make(std::vector<TransitionMatrix> slices) {
  if (slices.empty()) throw ValidationError("policy has no time slices");
  const std::size_t n = slices.front().n_states();
  for (std::size_t t = 0; t < slices.size(); ++t) {
    if (slices[t].n_states() != n) {
      throw ValidationError(fmt::format("policy slice {} has {} states, expected {}", t,
                                        slices[t].n_states(), n));
    }
  }
  return Policy(std::move(slices));
}

Policy Policy::constant(const TransitionMatrix& matrix, std::size_t n_slices) {
  return make(std::vector<TransitionMatrix>(n_slices, matrix));
}

// ---------------------------------------------------------------------------

void require_simplex(std::span<const double> v, const std::string& what) {
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0 && v[i] <= 1.0)) {
      throw ValidationError(fmt::format("{} entry {} = {} outside [0, 1]", what, i, v[i]));
    }
    sum += v[i];
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    throw ValidationError(fmt::format("{} sums to {}", what, sum));
  }
}

OccupancyTrajectory OccupancyTrajectory::make(DenseMatrix rho) {
  for (std::size_t t = 0; t < rho.rows(); ++t) {
    require_simplex(rho.row(t), fmt::format("occupancy at t={}", t));
  }
  return OccupancyTrajectory(std::move(rho));
}

// ---------------------------------------------------------------------------

void ControlConfig::validate() const {
  require_positive_gamma(gamma);
  if (horizon_length < 2) {
    throw ValidationError(fmt::format("horizon must be at least 2, got {}", horizon_length));
  }
  if (!(convergence_eps > 0.0)) {
    throw ValidationError(fmt::format("convergence_eps must be positive, got {}", convergence_eps));
  }
  // η_1 <= 1 keeps every update a convex combination.
  if (!(learning_rate.scale > 0.0) || learning_rate.eta(1) > 1.0) {
    throw ValidationError(
        fmt::format("learning-rate scale {} gives eta outside (0, 1]", learning_rate.scale));
  }
  if (!initial_state_weights.empty()) {
    double total = 0.0;
    for (double w : initial_state_weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw ValidationError("initial-state weights must be non-negative and finite");
      }
      total += w;
    }
    if (!(total > 0.0)) throw ValidationError("initial-state weights sum to zero");
  }
}

}  // namespace lsmdp
