#pragma once

// Random instance generators for property and acceptance tests.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "lsmdp/ensemble_model.hpp"
#include "lsmdp/rng.hpp"

namespace lsmdp::testing {

// Row-stochastic matrix. Each off-row entry is zeroed with probability
// `zero_prob`; every row keeps at least one nonzero entry.
inline TransitionMatrix random_stochastic(std::size_t n, Rng& rng, double zero_prob = 0.0,
                                          double floor = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DenseMatrix m(n, n);
  for (std::size_t r = 0; r < n; ++r) {
    double total = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      const double w = u(rng) < zero_prob ? 0.0 : floor + u(rng);
      m(r, c) = w;
      total += w;
    }
    if (total == 0.0) {
      m(r, std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)) = 1.0;
      total = 1.0;
    }
    for (double& p : m.row(r)) p /= total;
  }
  return TransitionMatrix::make(std::move(m));
}

inline UtilitySchedule random_utility(std::size_t horizon, std::size_t n, Rng& rng,
                                      double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  DenseMatrix v(horizon, n);
  for (std::size_t t = 0; t < horizon; ++t) {
    for (double& x : v.row(t)) x = u(rng);
  }
  return UtilitySchedule::make(std::move(v));
}

inline std::vector<double> random_simplex(std::size_t n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(n);
  double total = 0.0;
  for (double& x : v) {
    x = e(rng);
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

// Random policy whose support lies inside the support of `passive`.
inline Policy random_policy_on_support(const TransitionMatrix& passive, std::size_t n_slices,
                                       Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  const std::size_t n = passive.n_states();
  std::vector<TransitionMatrix> slices;
  for (std::size_t t = 0; t < n_slices; ++t) {
    DenseMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      double total = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        if (passive.prob(r, c) > 0.0) {
          m(r, c) = e(rng);
          total += m(r, c);
        }
      }
      for (double& p : m.row(r)) p /= total;
    }
    slices.push_back(TransitionMatrix::make(std::move(m)));
  }
  return Policy::make(std::move(slices));
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  }
  return worst;
}

}  // namespace lsmdp::testing
