// Randomized structural properties. Each property runs kCases independent
// instances drawn from a fixed seed.

#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "lsmdp/dispatch_eval.hpp"
#include "lsmdp/lsmdp_solver.hpp"
#include "lsmdp/trace_ingest.hpp"
#include "lsmdp/zlearn.hpp"

using namespace lsmdp;

namespace {

constexpr int kCases = 250;

std::size_t draw(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

double draw_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

bool stochastic(const TransitionMatrix& m) { return !validate(m.matrix()).has_value(); }

}  // namespace

TEST_CASE("estimated matrices are row-stochastic") {
  auto rng = make_rng(101);
  for (int i = 0; i < kCases; ++i) {
    const std::size_t n = draw(rng, 2, 16);
    std::vector<std::size_t> seq(draw(rng, 2, 300));
    for (auto& s : seq) s = draw(rng, 0, n - 1);
    CHECK(stochastic(estimate_matrix(seq, n, draw_real(rng, 0.0, 2.0) * (i % 2))));
  }
}

TEST_CASE("perturbed members are row-stochastic and keep the base support") {
  auto rng = make_rng(102);
  for (int i = 0; i < kCases; ++i) {
    const auto base = testing::random_stochastic(draw(rng, 2, 10), rng, 0.4);
    const auto e = perturb_ensemble(base, draw(rng, 1, 4), draw_real(rng, 0.0, 0.5), i);
    for (const auto& m : e.members) {
      CHECK(stochastic(m));
      CHECK(support_within(m, base));
    }
  }
}

TEST_CASE("computed policies are row-stochastic and keep the passive support") {
  auto rng = make_rng(103);
  for (int i = 0; i < kCases; ++i) {
    const std::size_t n = draw(rng, 2, 12);
    const auto p = testing::random_stochastic(n, rng, 0.5);
    const auto u = testing::random_utility(draw(rng, 2, 8), n, rng, -5.0, 5.0);
    const auto policy = compute_policy(p, backward_z(p, u, draw_real(rng, 0.05, 5.0)));
    for (const auto& slice : policy.slices()) {
      CHECK(stochastic(slice));
      CHECK(support_within(slice, p));
    }
  }
}

TEST_CASE("optimal rows match the tilted passive rows") {
  // KL(policy row ‖ P̄ row ⊙ z_{t+1} / G) = 0.
  auto rng = make_rng(104);
  for (int i = 0; i < kCases; ++i) {
    const std::size_t n = draw(rng, 2, 8);
    const auto p = testing::random_stochastic(n, rng, 0.3);
    const auto z = backward_z(p, testing::random_utility(3, n, rng), draw_real(rng, 0.2, 3.0));
    const auto policy = compute_policy(p, z);
    double worst = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      double g = 0.0;
      for (std::size_t c = 0; c < n; ++c) g += p.prob(r, c) * z.z(1, c);
      double kl = 0.0;
      for (std::size_t c = 0; c < n; ++c) {
        const double q = policy[0].prob(r, c);
        if (q > 0.0) kl += q * std::log(q / (p.prob(r, c) * z.z(1, c) / g));
      }
      worst = std::max(worst, std::abs(kl));
    }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("propagation keeps every slice on the simplex") {
  auto rng = make_rng(105);
  for (int i = 0; i < kCases; ++i) {
    const std::size_t n = draw(rng, 2, 12);
    const auto p = testing::random_stochastic(n, rng, 0.3);
    const auto policy = testing::random_policy_on_support(p, draw(rng, 1, 12), rng);
    const auto rho = propagate_occupancy(testing::random_simplex(n, rng), policy);
    for (std::size_t t = 0; t < rho.horizon_length(); ++t) {
      double total = 0.0;
      for (double v : rho.slice(t)) {
        CHECK(v >= 0.0);
        total += v;
      }
      CHECK(std::abs(total - 1.0) < 1e-9);
    }
  }
}

TEST_CASE("learned desirability stays positive") {
  auto rng = make_rng(106);
  for (int i = 0; i < kCases; ++i) {
    const std::size_t n = draw(rng, 2, 6);
    const std::size_t T = draw(rng, 2, 6);
    const auto p = testing::random_stochastic(n, rng, 0.3);
    ControlConfig cfg;
    cfg.gamma = draw_real(rng, 0.1, 3.0);
    cfg.horizon_length = T;
    cfg.max_iterations = 60;
    cfg.rng_seed = static_cast<std::uint64_t>(i);
    cfg.learning_rate.scale = draw_real(rng, 1.0, 2000.0);
    const auto sampler = i % 2 ? PassiveSampler::clean(p)
                               : PassiveSampler::noisy(perturb_ensemble(p, 3, 0.1, i));
    const auto run =
        run_zlearning(sampler, testing::random_utility(T, n, rng, -20.0, 20.0), cfg);
    for (double v : run.z_hat.z_matrix().data()) CHECK(v > 0.0);
  }
}

TEST_CASE("policy depends on utility and gamma only through their ratio") {
  auto rng = make_rng(107);
  for (int i = 0; i < kCases; ++i) {
    const std::size_t n = draw(rng, 2, 10);
    const std::size_t T = draw(rng, 2, 8);
    const auto p = testing::random_stochastic(n, rng, 0.3);
    const auto u = testing::random_utility(T, n, rng);
    const double gamma = draw_real(rng, 0.1, 4.0);
    const double c = draw_real(rng, 0.01, 100.0);
    DenseMatrix scaled = u.values();
    for (double& v : scaled.data()) v *= c;
    const auto a = compute_policy(p, backward_z(p, u, gamma));
    const auto b = compute_policy(p, backward_z(p, UtilitySchedule::make(scaled), c * gamma));
    for (std::size_t t = 0; t < a.n_slices(); ++t) {
      CHECK(testing::max_abs_diff(a[t].matrix(), b[t].matrix()) < 1e-10);
    }
  }
}
