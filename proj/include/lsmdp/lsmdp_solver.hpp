#pragma once

// Exact finite-horizon solution of the KL-regularized ensemble dispatch
// problem through the linear desirability recursion.

#include "lsmdp/ensemble_model.hpp"

namespace lsmdp {

// Backward recursion
//
//   z_{T-1}^β = exp(U_{T-1}^β / γ)
//   z_t^β     = exp(U_t^β / γ) · Σ_α P̄(β → α) z_{t+1}^α,   t = T-2 .. 0
//
// evaluated in the log domain with a log-sum-exp reduction over the support
// of each passive row, then exponentiated. Throws ValidationError on
// mismatched dimensions or non-positive γ, and NumericalError when a
// desirability value leaves the double range (scale γ up).
DesirabilityTable backward_z(const TransitionMatrix& passive, const UtilitySchedule& utility,
                             double gamma);

// Optimal controlled dynamics: row β of slice t is the passive row β tilted
// by z_{t+1} and renormalized. Zeros of the passive matrix stay zero.
Policy compute_policy(const TransitionMatrix& passive, const DesirabilityTable& z);

// Largest |log z_t^β - U_t^β/γ - log Σ_α P̄(β → α) z_{t+1}^α| over interior
// slices, plus |log z_{T-1} - U_{T-1}/γ| at the terminal slice. The sum is
// taken in the linear domain.
double max_bellman_residual(const TransitionMatrix& passive, const UtilitySchedule& utility,
                            const DesirabilityTable& z);

}  // namespace lsmdp
