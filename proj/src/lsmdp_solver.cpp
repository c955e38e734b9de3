#include "lsmdp/lsmdp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace lsmdp {

namespace {

void require_dimensions(const TransitionMatrix& passive, std::size_t n_states,
                        std::string_view what) {
  if (passive.n_states() != n_states) {
    throw ValidationError(fmt::format("{} has {} states but the passive matrix has {}", what,
                                      n_states, passive.n_states()));
  }
}

}  // namespace

DesirabilityTable backward_z(const TransitionMatrix& passive, const UtilitySchedule& utility,
                             double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ValidationError(fmt::format("gamma must be positive and finite, got {}", gamma));
  }
  require_dimensions(passive, utility.n_states(), "utility schedule");
  const std::size_t horizon = utility.horizon_length();
  const std::size_t n = passive.n_states();

  DenseMatrix log_z(horizon, n);
  for (std::size_t s = 0; s < n; ++s) log_z(horizon - 1, s) = utility.at(horizon - 1, s) / gamma;

  for (std::size_t t = horizon - 1; t-- > 0;) {
    const auto next = log_z.row(t + 1);
    for (std::size_t from = 0; from < n; ++from) {
      const auto row = passive.row(from);
      double shift = -std::numeric_limits<double>::infinity();
      for (std::size_t to = 0; to < n; ++to) {
        if (row[to] > 0.0) shift = std::max(shift, next[to]);
      }
      double acc = 0.0;
      for (std::size_t to = 0; to < n; ++to) {
        if (row[to] > 0.0) acc += row[to] * std::exp(next[to] - shift);
      }
      log_z(t, from) = utility.at(t, from) / gamma + shift + std::log(acc);
    }
  }

  DenseMatrix z(horizon, n);
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      const double v = std::exp(log_z(t, s));
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw NumericalError(fmt::format(
            "desirability at t={} state={} is exp({}), outside double range; increase gamma", t,
            s, log_z(t, s)));
      }
      z(t, s) = v;
    }
  }
  return DesirabilityTable::make(std::move(z), gamma);
}

Policy compute_policy(const TransitionMatrix& passive, const DesirabilityTable& z) {
  require_dimensions(passive, z.n_states(), "desirability table");
  if (z.horizon_length() < 2) throw ValidationError("desirability table needs at least 2 slices");
  const std::size_t n = passive.n_states();

  std::vector<TransitionMatrix> slices;
  slices.reserve(z.horizon_length() - 1);
  std::vector<double> log_next(n);
  for (std::size_t t = 0; t + 1 < z.horizon_length(); ++t) {
    const auto next = z.z_slice(t + 1);
    for (std::size_t s = 0; s < n; ++s) log_next[s] = std::log(next[s]);
    DenseMatrix m(n, n, 0.0);
    for (std::size_t from = 0; from < n; ++from) {
      const auto row = passive.row(from);
      auto out = m.row(from);
      // Only ratios of z matter; shift by the row's largest log z on the
      // support so the exponentials stay in range.
      double shift = -std::numeric_limits<double>::infinity();
      for (std::size_t to = 0; to < n; ++to) {
        if (row[to] > 0.0) shift = std::max(shift, log_next[to]);
      }
      double norm = 0.0;
      for (std::size_t to = 0; to < n; ++to) {
        if (row[to] > 0.0) {
          out[to] = row[to] * std::exp(log_next[to] - shift);
          norm += out[to];
        }
      }
      for (double& p : out) p /= norm;
    }
    slices.push_back(TransitionMatrix::make(std::move(m)));
  }
  return Policy::make(std::move(slices));
}

double max_bellman_residual(const TransitionMatrix& passive, const UtilitySchedule& utility,
                            const DesirabilityTable& z) {
  require_dimensions(passive, utility.n_states(), "utility schedule");
  require_dimensions(passive, z.n_states(), "desirability table");
  if (utility.horizon_length() != z.horizon_length()) {
    throw ValidationError("utility and desirability horizons differ");
  }
  const double gamma = z.gamma();
  const std::size_t horizon = z.horizon_length();
  const std::size_t n = z.n_states();
  double worst = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    worst = std::max(worst,
                     std::abs(std::log(z.z(horizon - 1, s)) - utility.at(horizon - 1, s) / gamma));
  }
  for (std::size_t t = 0; t + 1 < horizon; ++t) {
    for (std::size_t from = 0; from < n; ++from) {
      double g = 0.0;
      for (std::size_t to = 0; to < n; ++to) g += passive.prob(from, to) * z.z(t + 1, to);
      const double residual =
          -std::log(z.z(t, from)) - (-utility.at(t, from) / gamma - std::log(g));
      worst = std::max(worst, std::abs(residual));
    }
  }
  return worst;
}

}  // namespace lsmdp
