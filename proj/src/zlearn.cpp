#include "lsmdp/zlearn.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace lsmdp {

double z_update(double z_prev, double z_next_observed, double utility, double gamma, double eta) {
  return (1.0 - eta) * z_prev + eta * std::exp(utility / gamma) * z_next_observed;
}

// ---------------------------------------------------------------------------

PassiveSampler::PassiveSampler(std::vector<TransitionMatrix> members)
    : members_(std::move(members)) {
  if (members_.empty()) throw ValidationError("passive sampler needs at least one matrix");
  const std::size_t n = members_.front().n_states();
  cumulative_.reserve(members_.size());
  for (const auto& m : members_) {
    if (m.n_states() != n) throw ValidationError("ensemble members differ in size");
    DenseMatrix cum(n, n);
    for (std::size_t r = 0; r < n; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        acc += m.prob(r, c);
        cum(r, c) = acc;
      }
    }
    cumulative_.push_back(std::move(cum));
  }
}

PassiveSampler PassiveSampler::clean(TransitionMatrix passive) {
  return PassiveSampler({std::move(passive)});
}

PassiveSampler PassiveSampler::noisy(const NoisyEnsemble& ensemble) {
  return PassiveSampler(ensemble.members);
}

std::size_t PassiveSampler::draw_next(std::size_t member, std::size_t from, Rng& rng) const {
  const auto cum = cumulative_[member].row(from);
  const auto row = members_[member].row(from);
  // Scale by the row total so rounding in the sum never leaves u uncovered.
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng) * cum.back();
  for (std::size_t c = 0; c < cum.size(); ++c) {
    if (u < cum[c] && row[c] > 0.0) return c;
  }
  // u landed on the total itself; return the last state with mass.
  for (std::size_t c = cum.size(); c-- > 0;) {
    if (row[c] > 0.0) return c;
  }
  return from;
}

std::vector<std::size_t> PassiveSampler::sample_from(std::size_t start, std::size_t horizon,
                                                     std::size_t member, Rng& rng) const {
  if (start >= n_states()) throw ValidationError("start state out of range");
  if (member >= members_.size()) throw ValidationError("ensemble member out of range");
  std::vector<std::size_t> states;
  states.reserve(horizon);
  if (horizon == 0) return states;
  states.push_back(start);
  while (states.size() < horizon) states.push_back(draw_next(member, states.back(), rng));
  return states;
}

std::vector<std::size_t> PassiveSampler::sample_trajectory(
    std::size_t horizon, Rng& rng, std::span<const double> initial_weights) const {
  const std::size_t n = n_states();
  std::size_t member = 0;
  if (members_.size() > 1) {
    member = std::uniform_int_distribution<std::size_t>(0, members_.size() - 1)(rng);
  }
  std::size_t start = 0;
  if (initial_weights.empty()) {
    start = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  } else {
    if (initial_weights.size() != n) {
      throw ValidationError(fmt::format("{} initial-state weights for {} states",
                                        initial_weights.size(), n));
    }
    start = std::discrete_distribution<std::size_t>(initial_weights.begin(),
                                                    initial_weights.end())(rng);
  }
  return sample_from(start, horizon, member, rng);
}

// ---------------------------------------------------------------------------

double value_error(std::span<const double> reference, std::span<const double> estimate) {
  if (reference.size() != estimate.size()) {
    throw ValidationError(fmt::format("value slices differ in size ({} vs {})", reference.size(),
                                      estimate.size()));
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    num += std::abs(reference[i] - estimate[i]);
    den += reference[i];
  }
  if (!(den > 0.0)) {
    throw ValidationError(
        fmt::format("reference values sum to {}; relative error needs a positive total", den));
  }
  return num / den;
}

double policy_rms_diff(const Policy& a, const Policy& b) {
  if (a.n_slices() != b.n_slices() || a.n_states() != b.n_states()) {
    throw ValidationError("policies differ in shape");
  }
  double sum_sq = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < a.n_slices(); ++t) {
    const auto da = a[t].matrix().data();
    const auto db = b[t].matrix().data();
    for (std::size_t i = 0; i < da.size(); ++i) {
      const double d = da[i] - db[i];
      sum_sq += d * d;
    }
    count += da.size();
  }
  return std::sqrt(sum_sq / static_cast<double>(count));
}

// ---------------------------------------------------------------------------

LearningRun run_zlearning(const PassiveSampler& sampler, const UtilitySchedule& utility,
                          const ControlConfig& config,
                          const std::optional<DesirabilityTable>& reference) {
  config.validate();
  const std::size_t horizon = utility.horizon_length();
  const std::size_t n = utility.n_states();
  if (config.horizon_length != horizon) {
    throw ValidationError(fmt::format("config horizon {} does not match utility horizon {}",
                                      config.horizon_length, horizon));
  }
  if (sampler.n_states() != n) {
    throw ValidationError(fmt::format("sampler has {} states, utility schedule has {}",
                                      sampler.n_states(), n));
  }
  if (!config.initial_state_weights.empty() && config.initial_state_weights.size() != n) {
    throw ValidationError("initial-state weights do not match the state count");
  }

  std::optional<ValueTable> reference_phi;
  if (reference) {
    if (reference->horizon_length() != horizon || reference->n_states() != n) {
      throw ValidationError("reference table shape does not match the utility schedule");
    }
    reference_phi = reference->value_table();
  }

  const double gamma = config.gamma;
  DenseMatrix z(horizon, n, 1.0);
  for (std::size_t s = 0; s < n; ++s) {
    z(horizon - 1, s) = std::exp(utility.at(horizon - 1, s) / gamma);
    if (!(z(horizon - 1, s) > 0.0) || !std::isfinite(z(horizon - 1, s))) {
      throw NumericalError("terminal desirability left the double range; increase gamma");
    }
  }

  LearningRun run{DesirabilityTable::make(z, gamma), 0, false, 0.0, {}, config};
  auto rng = make_rng(config.rng_seed);
  std::vector<double> phi_slice(n);

  for (std::uint64_t k = 1; k <= config.max_iterations; ++k) {
    const auto path = sampler.sample_trajectory(horizon, rng, config.initial_state_weights);
    const double eta = config.learning_rate.eta(k);
    double delta = 0.0;
    // ẑ_{t+1}[s_{t+1}] as it stood at iteration k-1; the terminal slice is fixed.
    double next_prev = z(horizon - 1, path[horizon - 1]);
    for (std::size_t t = horizon - 1; t-- > 0;) {
      const std::size_t from = path[t];
      const double before = z(t, from);
      const double after = z_update(before, next_prev, utility.at(t, from), gamma, eta);
      if (!(after > 0.0) || !std::isfinite(after)) {
        throw NumericalError(
            fmt::format("z estimate at t={} state={} left the double range; increase gamma", t,
                        from));
      }
      z(t, from) = after;
      delta = std::max(delta, std::abs(after - before));
      next_prev = before;
    }
    run.iterations = k;
    run.last_delta = delta;

    if (reference_phi) {
      std::vector<double> errors(horizon - 1);
      for (std::size_t t = 0; t + 1 < horizon; ++t) {
        for (std::size_t s = 0; s < n; ++s) phi_slice[s] = -gamma * std::log(z(t, s));
        errors[t] = value_error(reference_phi->values.row(t), phi_slice);
      }
      run.error_history.push_back(std::move(errors));
    }
    if (delta < config.convergence_eps) {
      run.converged = true;
      break;
    }
  }
  run.z_hat = DesirabilityTable::make(std::move(z), gamma);
  return run;
}

std::optional<std::uint64_t> iterations_to_threshold(
    const std::vector<std::vector<double>>& error_history, double threshold) {
  for (std::size_t k = 0; k < error_history.size(); ++k) {
    const auto& e = error_history[k];
    if (std::all_of(e.begin(), e.end(), [&](double v) { return v <= threshold; })) return k + 1;
  }
  return std::nullopt;
}

}  // namespace lsmdp
