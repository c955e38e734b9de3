#pragma once

// Model-free estimation of the desirability table from trajectories sampled
// under the passive dynamics (Z-learning), with an optional ensemble of noisy
// passive models.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lsmdp/ensemble_model.hpp"
#include "lsmdp/rng.hpp"
#include "lsmdp/trace_ingest.hpp"

namespace lsmdp {

// One stochastic approximation step toward exp(U/γ)·z_next_observed:
//   (1 - η)·z_prev + η·exp(U/γ)·z_next_observed
double z_update(double z_prev, double z_next_observed, double utility, double gamma, double eta);

// Source of passive transitions: a single clean matrix, or a set of noisy
// members one of which is drawn uniformly for each trajectory.
class PassiveSampler {
 public:
  static PassiveSampler clean(TransitionMatrix passive);
  static PassiveSampler noisy(const NoisyEnsemble& ensemble);

  std::size_t n_states() const { return members_.front().n_states(); }
  std::size_t n_members() const { return members_.size(); }
  const TransitionMatrix& member(std::size_t i) const { return members_[i]; }

  // Draws an initial state from `initial_weights` (uniform when empty), then
  // chains categorical draws from one member's rows. With more than one member
  // the member index is drawn first; a single member consumes no draw for it.
  std::vector<std::size_t> sample_trajectory(std::size_t horizon, Rng& rng,
                                             std::span<const double> initial_weights = {}) const;

  // Continues a trajectory from a fixed start state using member `member`.
  std::vector<std::size_t> sample_from(std::size_t start, std::size_t horizon, std::size_t member,
                                       Rng& rng) const;

 private:
  explicit PassiveSampler(std::vector<TransitionMatrix> members);
  std::size_t draw_next(std::size_t member, std::size_t from, Rng& rng) const;

  std::vector<TransitionMatrix> members_;
  // Row-wise cumulative sums for each member.
  std::vector<DenseMatrix> cumulative_;
};

// Relative L1 error between a reference and an estimated value slice:
//   Σ_β |φ_ref^β - φ_est^β| / Σ_β φ_ref^β
// Throws ValidationError on size mismatch or a non-positive denominator.
double value_error(std::span<const double> reference, std::span<const double> estimate);

// Root-mean-square difference over every (t, from, to) entry.
double policy_rms_diff(const Policy& a, const Policy& b);

struct LearningRun {
  DesirabilityTable z_hat;
  std::uint64_t iterations = 0;
  bool converged = false;
  // Max-abs change of ẑ in the last iteration.
  double last_delta = 0.0;
  // error_history[k-1][t] is value_error at slice t after iteration k, for
  // t = 0 .. T-2. Empty when no reference was supplied.
  std::vector<std::vector<double>> error_history;
  ControlConfig config;
};

// Algorithm: ẑ ≡ 1, terminal slice fixed at exp(U_{T-1}/γ). Each iteration k
// samples one passive trajectory and, for t = T-2 down to 0, moves
// ẑ_t[s_t] toward exp(U_t[s_t]/γ)·ẑ_{t+1}[s_{t+1}] using the previous
// iteration's ẑ_{t+1} and η_k from the schedule. Stops when the max-abs
// change falls below convergence_eps or after max_iterations; hitting the
// budget is reported through `converged`, not thrown.
LearningRun run_zlearning(const PassiveSampler& sampler, const UtilitySchedule& utility,
                          const ControlConfig& config,
                          const std::optional<DesirabilityTable>& reference = std::nullopt);

// First iteration (1-based) at which every slice's error is at or below
// `threshold`, or nullopt.
std::optional<std::uint64_t> iterations_to_threshold(
    const std::vector<std::vector<double>>& error_history, double threshold);

}  // namespace lsmdp
