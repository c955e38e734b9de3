#pragma once

// Forward evaluation of a dispatch policy: occupancy propagation, expected
// ensemble power, and the KL-regularized objective.

#include <span>
#include <vector>

#include "lsmdp/ensemble_model.hpp"

namespace lsmdp {

// ρ_0 = initial, ρ_{t+1}[to] = Σ_from ρ_t[from] · policy[t](from → to).
// The trajectory has policy.n_slices() + 1 slices.
OccupancyTrajectory propagate_occupancy(std::span<const double> initial, const Policy& policy);

// p_t = Σ_β rated_power[β] · ρ_t[β], in kW.
std::vector<double> expected_power(const OccupancyTrajectory& rho, const StateSpace& states);

struct ObjectiveBreakdown {
  double total = 0.0;
  // Σ_t Σ_α ρ_{t+1}^α · (-U_{t+1}^α)
  double expected_cost = 0.0;
  // Σ_t Σ_β ρ_t^β · γ · KL(policy[t] row β ‖ passive row β)
  double control_cost = 0.0;
};

// Objective accumulated over t = 0 .. T-2: the next-slice negative utility
// weighted by ρ_{t+1}, plus γ times the row KL divergence from the passive
// dynamics weighted by ρ_t. Entries with zero policy probability contribute
// nothing. Throws ValidationError when the policy puts mass where the passive
// matrix has none (infinite KL) or when the shapes disagree.
ObjectiveBreakdown evaluate_objective_breakdown(const Policy& policy,
                                                const TransitionMatrix& passive,
                                                const UtilitySchedule& utility, double gamma,
                                                std::span<const double> initial);

double evaluate_objective(const Policy& policy, const TransitionMatrix& passive,
                          const UtilitySchedule& utility, double gamma,
                          std::span<const double> initial);

}  // namespace lsmdp
