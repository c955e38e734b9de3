#pragma once

// Brute-force reference for the KL-regularized Bellman recursion. For every
// (t, state) it searches all rows p with entries k/R, k integer, summing to
// one, and minimizes
//
//   -U_t^β + Σ_α p_α (γ log(p_α / P̄(β → α)) + φ_{t+1}^α)
//
// backward in time from φ_{T-1} = -U_{T-1}. It never uses desirability
// values, so it is independent of the linear recursion it checks.

#include <cstddef>
#include <vector>

#include "lsmdp/ensemble_model.hpp"

namespace lsmdp::testing {

struct OracleSolution {
  DenseMatrix values;                 // φ, horizon x n_states
  std::vector<DenseMatrix> policy;    // horizon-1 slices, source-row-major
};

// Throws ValidationError when n_states > 4 or horizon > 4.
OracleSolution bellman_oracle(const TransitionMatrix& passive, const UtilitySchedule& utility,
                              double gamma, std::size_t grid_resolution);

}  // namespace lsmdp::testing
