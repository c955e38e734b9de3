#include "cli.hpp"

#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lsmdp/artifacts.hpp"
#include "lsmdp/dispatch_eval.hpp"
#include "lsmdp/lsmdp_solver.hpp"
#include "lsmdp/trace_ingest.hpp"
#include "lsmdp/zlearn.hpp"

namespace lsmdp::cli {

namespace art = lsmdp::artifacts;

namespace {

// Offset separating the ensemble-noise streams from the trajectory stream.
constexpr std::uint64_t kEnsembleSeedSalt = 0x9E3779B97F4A7C15ULL;

std::uint64_t default_seed() {
  if (const char* env = std::getenv(kSeedEnvVar)) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ValidationError(fmt::format("{}='{}' is not an unsigned integer", kSeedEnvVar, env));
    }
  }
  return 0;
}

template <typename Write>
void write_stream_file(const std::filesystem::path& path, Write&& write) {
  std::ostringstream buf;
  write(buf);
  art::write_text_file(path, buf.str());
}

}  // namespace

int cmd_estimate(const EstimateOptions& opt) {
  auto trace = read_trace_csv_file(opt.trace);
  if (opt.season_from || opt.season_to) {
    std::optional<std::chrono::sys_days> from, to;
    if (opt.season_from) from = parse_date(*opt.season_from);
    if (opt.season_to) to = parse_date(*opt.season_to);
    trace = filter_dates(trace, from, to);
  }
  const auto disc = discretize(trace, opt.n_states);
  auto matrix = estimate_matrix(disc.sequence, opt.n_states, opt.smoothing);
  art::write_text_file(opt.out, art::dump(art::to_json(art::MatrixArtifact{disc.states, matrix})));
  std::cout << fmt::format("estimated {}x{} transition matrix from {} samples -> {}\n",
                           opt.n_states, opt.n_states, trace.size(), opt.out.string());
  return kOk;
}

int cmd_solve(const SolveOptions& opt) {
  const auto model = art::matrix_from_json(art::read_json_file(opt.matrix));
  const auto utility = art::read_utility_csv_file(opt.utility);
  const auto z = backward_z(model.matrix, utility, opt.gamma);
  const auto policy = compute_policy(model.matrix, z);
  art::write_text_file(opt.policy_out, art::dump(art::to_json(policy)));
  write_stream_file(opt.values_out, [&](std::ostream& o) { art::write_values_csv(o, z); });
  std::cout << fmt::format("solved horizon {} over {} states; max Bellman residual {:.3g}\n",
                           utility.horizon_length(), utility.n_states(),
                           max_bellman_residual(model.matrix, utility, z));
  return kOk;
}

int cmd_learn(const LearnOptions& opt) {
  const auto model = art::matrix_from_json(art::read_json_file(opt.matrix));
  const auto utility = art::read_utility_csv_file(opt.utility);

  ControlConfig config;
  config.gamma = opt.gamma;
  config.horizon_length = utility.horizon_length();
  config.convergence_eps = opt.eps;
  config.learning_rate.scale = opt.eta_scale;
  config.max_iterations = opt.max_iters;
  config.rng_seed = opt.seed;
  config.validate();

  const auto ensemble =
      perturb_ensemble(model.matrix, opt.ensemble, opt.sigma, opt.seed ^ kEnsembleSeedSalt);
  const auto sampler = PassiveSampler::noisy(ensemble);

  std::optional<DesirabilityTable> reference;
  if (opt.reference) reference = art::read_values_csv_file(*opt.reference, opt.gamma);

  const auto run = run_zlearning(sampler, utility, config, reference);

  art::ZLearnSummary summary{opt.sigma, opt.ensemble, std::nullopt};
  if (reference) summary.iterations_to_10pct = iterations_to_threshold(run.error_history, 0.10);
  art::write_text_file(opt.run_out, art::dump(art::to_json(run, summary)));
  write_stream_file(opt.curve_out, [&](std::ostream& o) { art::write_error_curve_csv(o, run); });
  if (opt.policy_out) {
    art::write_text_file(*opt.policy_out,
                         art::dump(art::to_json(compute_policy(model.matrix, run.z_hat))));
  }
  std::cout << fmt::format("z-learning {} after {} iterations (last change {:.3g})\n",
                           run.converged ? "converged" : "did not converge", run.iterations,
                           run.last_delta);
  return kOk;
}

int cmd_dispatch(const DispatchOptions& opt) {
  const auto model = art::matrix_from_json(art::read_json_file(opt.matrix));
  const auto initial = art::read_occupancy_csv_file(opt.initial);
  if (opt.utility.has_value() != opt.gamma.has_value()) {
    throw ValidationError("--utility and --gamma must be given together");
  }
  std::optional<UtilitySchedule> utility;
  if (opt.utility) utility = art::read_utility_csv_file(*opt.utility);

  std::vector<art::DispatchColumn> columns;
  nlohmann::json objectives = nlohmann::json::object();
  std::map<std::string, int> label_uses;
  std::size_t horizon = 0;
  for (const auto& path : opt.policies) {
    const auto policy = art::policy_from_json(art::read_json_file(path));
    if (policy.n_states() != model.states.n_states()) {
      throw ValidationError(fmt::format("{} has {} states, the state space has {}", path.string(),
                                        policy.n_states(), model.states.n_states()));
    }
    horizon = policy.n_slices() + 1;
    auto rho = propagate_occupancy(initial, policy);
    auto power = expected_power(rho, model.states);
    std::string label = path.stem().string();
    if (label_uses[label]++ > 0) label += fmt::format("_{}", label_uses[label] - 1);
    if (utility) {
      objectives[label] = evaluate_objective(policy, model.matrix, *utility, *opt.gamma, initial);
    }
    columns.push_back({std::move(label), std::move(rho), std::move(power)});
  }
  write_stream_file(opt.out, [&](std::ostream& o) { art::write_dispatch_csv(o, columns); });

  if (utility) {
    const auto passive_policy = Policy::constant(model.matrix, horizon - 1);
    const double passive =
        evaluate_objective(passive_policy, model.matrix, *utility, *opt.gamma, initial);
    nlohmann::json summary{{"objectives", objectives}, {"passive_objective", passive},
                           {"gamma", *opt.gamma}};
    std::cout << art::dump(summary);
    if (opt.summary_out) art::write_text_file(*opt.summary_out, art::dump(summary));
  }
  return kOk;
}

int cmd_synth_trace(const SynthOptions& opt) {
  Season season;
  if (opt.season == "summer") {
    season = Season::kSummer;
  } else if (opt.season == "winter") {
    season = Season::kWinter;
  } else {
    throw ValidationError(fmt::format("unknown season '{}'", opt.season));
  }
  const auto house = synthetic_hvac_trace(parse_date(opt.start), opt.days, season, opt.seed);
  const auto hood = synthesize_neighborhood(house, opt.houses, opt.noise, opt.seed + 1);
  write_stream_file(opt.out, [&](std::ostream& o) { write_trace_csv(o, hood); });
  return kOk;
}

// ---------------------------------------------------------------------------

int run(int argc, const char* const* argv) {
  CLI::App app{"KL-regularized dispatch of load ensembles: estimate, solve, learn, dispatch"};
  app.require_subcommand(1);

  EstimateOptions est;
  auto* estimate = app.add_subcommand("estimate", "estimate the passive transition matrix");
  estimate->add_option("trace", est.trace, "CSV with columns timestamp,power_kw")->required();
  estimate->add_option("-o,--out", est.out, "output matrix.json")->required();
  estimate->add_option("--states", est.n_states, "number of power states")
      ->check(CLI::Range(std::size_t{2}, std::size_t{4096}));
  estimate->add_option("--smoothing", est.smoothing, "additive count smoothing")
      ->check(CLI::NonNegativeNumber);
  estimate->add_option("--season-from", est.season_from, "first date kept (YYYY-MM-DD)");
  estimate->add_option("--season-to", est.season_to, "last date kept (YYYY-MM-DD)");

  SolveOptions sol;
  auto* solve = app.add_subcommand("solve", "solve for the optimal policy by backward recursion");
  solve->add_option("matrix", sol.matrix, "matrix.json")->required();
  solve->add_option("utility", sol.utility, "utility.csv")->required();
  solve->add_option("--gamma", sol.gamma, "KL weight")->check(CLI::PositiveNumber);
  solve->add_option("--policy-out", sol.policy_out, "output policy.json")->required();
  solve->add_option("--values-out", sol.values_out, "output values.csv")->required();

  LearnOptions lrn;
  std::optional<std::uint64_t> learn_seed;
  auto* learn = app.add_subcommand("learn", "learn the desirability table by Z-learning");
  learn->add_option("matrix", lrn.matrix, "matrix.json")->required();
  learn->add_option("utility", lrn.utility, "utility.csv")->required();
  learn->add_option("--gamma", lrn.gamma, "KL weight")->check(CLI::PositiveNumber);
  learn->add_option("--sigma", lrn.sigma, "std-dev of passive-model noise")
      ->check(CLI::NonNegativeNumber);
  learn->add_option("--ensemble", lrn.ensemble, "number of noisy passive models")
      ->check(CLI::PositiveNumber);
  learn->add_option("--eps", lrn.eps, "stop when max |change| of z falls below this")
      ->check(CLI::PositiveNumber);
  learn->add_option("--max-iters", lrn.max_iters, "iteration budget");
  learn->add_option("--seed", learn_seed, fmt::format("RNG seed (default ${} or 0)", kSeedEnvVar));
  learn->add_option("--eta-scale", lrn.eta_scale, "learning rate eta_k = a/(a+k)")
      ->check(CLI::PositiveNumber);
  learn->add_option("--reference", lrn.reference, "values.csv from solve, for error tracking");
  learn->add_option("--run-out", lrn.run_out, "output zlearn_run.json")->required();
  learn->add_option("--curve-out", lrn.curve_out, "output error_curve.csv")->required();
  learn->add_option("--policy-out", lrn.policy_out, "output policy.json built from learned z");

  DispatchOptions dis;
  auto* dispatch = app.add_subcommand("dispatch", "propagate occupancy and expected power");
  dispatch->add_option("matrix", dis.matrix, "matrix.json (state space and passive dynamics)")
      ->required();
  dispatch->add_option("policies", dis.policies, "one or more policy.json files")->required();
  dispatch->add_option("--initial", dis.initial, "rho.csv with columns state,probability")
      ->required();
  dispatch->add_option("-o,--out", dis.out, "output dispatch.csv")->required();
  dispatch->add_option("--utility", dis.utility, "utility.csv, enables the objective summary");
  dispatch->add_option("--gamma", dis.gamma, "KL weight for the objective summary")
      ->check(CLI::PositiveNumber);
  dispatch->add_option("--summary-out", dis.summary_out, "also write the summary JSON here");

  SynthOptions syn;
  std::optional<std::uint64_t> synth_seed;
  auto* synth = app.add_subcommand("synth-trace", "write a synthetic neighborhood HVAC trace");
  synth->add_option("--season", syn.season, "summer or winter");
  synth->add_option("--start", syn.start, "first date (YYYY-MM-DD)");
  synth->add_option("--days", syn.days, "number of days")->check(CLI::PositiveNumber);
  synth->add_option("--houses", syn.houses, "houses in the neighborhood")
      ->check(CLI::PositiveNumber);
  synth->add_option("--noise", syn.noise, "per-sample multiplicative noise bound")
      ->check(CLI::Range(0.0, 0.999999));
  synth->add_option("--seed", synth_seed, "RNG seed");
  synth->add_option("-o,--out", syn.out, "output trace.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*estimate) return cmd_estimate(est);
    if (*solve) return cmd_solve(sol);
    if (*learn) {
      lrn.seed = learn_seed ? *learn_seed : default_seed();
      return cmd_learn(lrn);
    }
    if (*dispatch) return cmd_dispatch(dis);
    if (*synth) {
      syn.seed = synth_seed ? *synth_seed : default_seed();
      return cmd_synth_trace(syn);
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}

}  // namespace lsmdp::cli
