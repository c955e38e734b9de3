#include "lsmdp/dispatch_eval.hpp"

#include <cmath>

#include <fmt/format.h>

namespace lsmdp {

OccupancyTrajectory propagate_occupancy(std::span<const double> initial, const Policy& policy) {
  const std::size_t n = policy.n_states();
  if (initial.size() != n) {
    throw ValidationError(
        fmt::format("initial occupancy has {} entries for {} states", initial.size(), n));
  }
  require_simplex(initial, "initial occupancy");

  DenseMatrix rho(policy.n_slices() + 1, n, 0.0);
  std::copy(initial.begin(), initial.end(), rho.row(0).begin());
  for (std::size_t t = 0; t < policy.n_slices(); ++t) {
    const auto& p = policy[t];
    const auto now = rho.row(t);
    auto next = rho.row(t + 1);
    for (std::size_t from = 0; from < n; ++from) {
      if (now[from] == 0.0) continue;
      const auto row = p.row(from);
      for (std::size_t to = 0; to < n; ++to) next[to] += now[from] * row[to];
    }
  }
  return OccupancyTrajectory::make(std::move(rho));
}

std::vector<double> expected_power(const OccupancyTrajectory& rho, const StateSpace& states) {
  if (rho.n_states() != states.n_states()) {
    throw ValidationError(fmt::format("occupancy has {} states, state space has {}",
                                      rho.n_states(), states.n_states()));
  }
  const auto& rated = states.rated_power();
  std::vector<double> power(rho.horizon_length(), 0.0);
  for (std::size_t t = 0; t < power.size(); ++t) {
    const auto slice = rho.slice(t);
    for (std::size_t s = 0; s < slice.size(); ++s) power[t] += rated[s] * slice[s];
  }
  return power;
}

ObjectiveBreakdown evaluate_objective_breakdown(const Policy& policy,
                                                const TransitionMatrix& passive,
                                                const UtilitySchedule& utility, double gamma,
                                                std::span<const double> initial) {
  const std::size_t n = passive.n_states();
  if (policy.n_states() != n || utility.n_states() != n) {
    throw ValidationError("policy, passive matrix and utility schedule differ in state count");
  }
  if (policy.n_slices() + 1 != utility.horizon_length()) {
    throw ValidationError(fmt::format("policy has {} slices but the utility horizon is {}",
                                      policy.n_slices(), utility.horizon_length()));
  }
  if (!(gamma > 0.0)) throw ValidationError(fmt::format("gamma must be positive, got {}", gamma));

  const auto rho = propagate_occupancy(initial, policy);
  ObjectiveBreakdown out;
  for (std::size_t t = 0; t < policy.n_slices(); ++t) {
    const auto now = rho.slice(t);
    for (std::size_t from = 0; from < n; ++from) {
      double kl = 0.0;
      for (std::size_t to = 0; to < n; ++to) {
        const double p = policy[t].prob(from, to);
        if (p == 0.0) continue;
        const double q = passive.prob(from, to);
        if (q == 0.0) {
          throw ValidationError(fmt::format(
              "policy slice {} moves {} -> {} where the passive dynamics cannot (infinite KL)", t,
              from, to));
        }
        kl += p * std::log(p / q);
      }
      out.control_cost += now[from] * gamma * kl;
    }
    const auto next = rho.slice(t + 1);
    for (std::size_t to = 0; to < n; ++to) out.expected_cost -= next[to] * utility.at(t + 1, to);
  }
  out.total = out.expected_cost + out.control_cost;
  return out;
}

double evaluate_objective(const Policy& policy, const TransitionMatrix& passive,
                          const UtilitySchedule& utility, double gamma,
                          std::span<const double> initial) {
  return evaluate_objective_breakdown(policy, passive, utility, gamma, initial).total;
}

}  // namespace lsmdp
