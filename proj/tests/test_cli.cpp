#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "generators.hpp"
#include "lsmdp/artifacts.hpp"
#include "lsmdp/csv.hpp"
#include "lsmdp/zlearn.hpp"

using namespace lsmdp;
namespace art = lsmdp::artifacts;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
  static const fs::path dir = [] {
    const char* env = std::getenv("LSMDP_TEST_TMP");
    fs::path d = env ? fs::path(env) : fs::temp_directory_path() / "lsmdp_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "lsmdp_cli");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const std::string& p, const std::string& text) { std::ofstream(p) << text; }

// Synthetic trace and a 12-state matrix shared by the tests below.
void ensure_matrix() {
  if (fs::exists(path("matrix.json"))) return;
  REQUIRE(run({"synth-trace", "--season", "summer", "--days", "30", "--houses", "100", "--noise",
               "0.2", "--seed", "7", "-o", path("trace.csv")}) == cli::kOk);
  REQUIRE(run({"estimate", path("trace.csv"), "--states", "12", "-o", path("matrix.json")}) ==
          cli::kOk);
}

void write_utility(const std::string& p, double scale, std::size_t n = 12, std::size_t T = 10) {
  std::ostringstream s;
  s << "t";
  for (std::size_t j = 0; j < n; ++j) s << ",s" << j;
  s << "\n";
  for (std::size_t t = 1; t <= T; ++t) {
    s << t;
    for (std::size_t j = 0; j < n; ++j) {
      s << "," << csv::format_double(scale * -0.01 * static_cast<double>((t % 4 + 1) * j));
    }
    s << "\n";
  }
  write(p, s.str());
}

void write_uniform_rho(const std::string& p, std::size_t n = 12) {
  std::ostringstream s;
  s << "state,probability\n";
  for (std::size_t j = 0; j < n; ++j) s << j << "," << csv::format_double(1.0 / n) << "\n";
  write(p, s.str());
}

}  // namespace

TEST_CASE("estimate produces a valid 12-state matrix that round-trips") {
  ensure_matrix();
  const auto text = slurp(path("matrix.json"));
  const auto m = art::matrix_from_json(nlohmann::json::parse(text));
  CHECK(m.matrix.n_states() == 12);
  CHECK_FALSE(validate(m.matrix).has_value());
  CHECK(art::dump(art::to_json(m)) == text);
}

TEST_CASE("estimate honours the season window") {
  ensure_matrix();
  CHECK(run({"estimate", path("trace.csv"), "--states", "4", "--season-from", "2013-07-05",
             "--season-to", "2013-07-10", "-o", path("window.json")}) == cli::kOk);
  CHECK(run({"estimate", path("trace.csv"), "--season-from", "2099-01-01", "-o",
             path("empty.json")}) == cli::kInputValidation);
}

TEST_CASE("exit codes") {
  ensure_matrix();
  CHECK(run({"estimate", path("trace.csv"), "--states", "1", "-o", path("x.json")}) ==
        cli::kUsage);
  CHECK(run({"no-such-command"}) == cli::kUsage);
  CHECK(run({}) == cli::kUsage);
  CHECK(run({"estimate", path("missing.csv"), "-o", path("x.json")}) == cli::kIo);

  write(path("bad_trace.csv"), "time,kw\n1,2\n");
  CHECK(run({"estimate", path("bad_trace.csv"), "-o", path("x.json")}) == cli::kInputValidation);

  write_utility(path("u_small.csv"), 1.0, 3, 4);
  CHECK(run({"solve", path("matrix.json"), path("u_small.csv"), "--policy-out", path("p.json"),
             "--values-out", path("v.csv")}) == cli::kInputValidation);

  // exp(U/γ) far beyond the double range.
  write_utility(path("u_huge.csv"), 1e6);
  CHECK(run({"learn", path("matrix.json"), path("u_huge.csv"), "--gamma", "0.001", "--run-out",
             path("r.json"), "--curve-out", path("c.csv")}) == cli::kNumerical);
}

TEST_CASE("solve with zero utility returns the passive matrix") {
  ensure_matrix();
  write_utility(path("u_zero.csv"), 0.0);
  REQUIRE(run({"solve", path("matrix.json"), path("u_zero.csv"), "--policy-out",
               path("p_zero.json"), "--values-out", path("v_zero.csv")}) == cli::kOk);
  const auto m = art::matrix_from_json(art::read_json_file(path("matrix.json")));
  const auto policy = art::policy_from_json(art::read_json_file(path("p_zero.json")));
  REQUIRE(policy.n_slices() == 9);
  for (const auto& slice : policy.slices()) {
    CHECK(testing::max_abs_diff(slice.matrix(), m.matrix.matrix()) < 1e-15);
  }
}

TEST_CASE("solve is invariant to scaling utility and gamma together") {
  ensure_matrix();
  write_utility(path("u1.csv"), 1.0);
  write_utility(path("u2.csv"), 2.0);
  REQUIRE(run({"solve", path("matrix.json"), path("u1.csv"), "--gamma", "0.5", "--policy-out",
               path("p1.json"), "--values-out", path("v1.csv")}) == cli::kOk);
  REQUIRE(run({"solve", path("matrix.json"), path("u2.csv"), "--gamma", "1", "--policy-out",
               path("p2.json"), "--values-out", path("v2.csv")}) == cli::kOk);
  const auto a = art::policy_from_json(art::read_json_file(path("p1.json")));
  const auto b = art::policy_from_json(art::read_json_file(path("p2.json")));
  for (std::size_t t = 0; t < a.n_slices(); ++t) {
    CHECK(testing::max_abs_diff(a[t].matrix(), b[t].matrix()) < 1e-10);
  }
}

TEST_CASE("learn is deterministic and tracks the reference") {
  ensure_matrix();
  write_utility(path("u1.csv"), 1.0);
  REQUIRE(run({"solve", path("matrix.json"), path("u1.csv"), "--gamma", "0.5", "--policy-out",
               path("p1.json"), "--values-out", path("v1.csv")}) == cli::kOk);
  const std::vector<std::string> common{"learn",       path("matrix.json"), path("u1.csv"),
                                        "--gamma",     "0.5",               "--sigma",
                                        "0",           "--ensemble",        "1",
                                        "--max-iters", "400",               "--seed",
                                        "42",          "--reference",       path("v1.csv")};
  auto with = [&](const std::string& tag) {
    auto args = common;
    args.insert(args.end(), {"--run-out", path("run_" + tag + ".json"), "--curve-out",
                             path("curve_" + tag + ".csv"), "--policy-out",
                             path("lp_" + tag + ".json")});
    return args;
  };
  REQUIRE(run(with("a")) == cli::kOk);
  REQUIRE(run(with("b")) == cli::kOk);
  CHECK(slurp(path("run_a.json")) == slurp(path("run_b.json")));
  CHECK(slurp(path("curve_a.csv")) == slurp(path("curve_b.csv")));
  CHECK(slurp(path("lp_a.json")) == slurp(path("lp_b.json")));

  const auto curve = csv::read_file(path("curve_a.csv"));
  REQUIRE(curve.size() == 401);
  CHECK(curve.front().front() == "iteration");
  CHECK(curve.front().size() == 10);
  CHECK(curve.front().back() == "T9");

  const auto doc = art::read_json_file(path("run_a.json"));
  CHECK(doc["kind"] == art::kZLearnRunKind);
  CHECK(doc["iterations"] == 400);

  // Zero noise with one member follows the clean sampler exactly.
  const auto m = art::matrix_from_json(art::read_json_file(path("matrix.json")));
  const auto u = art::read_utility_csv_file(path("u1.csv"));
  ControlConfig cfg;
  cfg.gamma = 0.5;
  cfg.horizon_length = u.horizon_length();
  cfg.max_iterations = 400;
  cfg.rng_seed = 42;
  const auto clean = run_zlearning(PassiveSampler::clean(m.matrix), u, cfg);
  CHECK(doc["z_hat"].get<std::vector<std::vector<double>>>() == clean.z_hat.z_matrix().to_rows());

  // The seed falls back to the environment variable.
  auto no_seed = with("env");
  no_seed.erase(no_seed.begin() + 11, no_seed.begin() + 13);
  ::setenv(cli::kSeedEnvVar, "42", 1);
  REQUIRE(run(no_seed) == cli::kOk);
  ::unsetenv(cli::kSeedEnvVar);
  CHECK(slurp(path("run_env.json")) == slurp(path("run_a.json")));
}

TEST_CASE("learn with a zero budget reports an unconverged run") {
  ensure_matrix();
  write_utility(path("u1.csv"), 1.0);
  REQUIRE(run({"learn", path("matrix.json"), path("u1.csv"), "--max-iters", "0", "--run-out",
               path("run0.json"), "--curve-out", path("curve0.csv")}) == cli::kOk);
  const auto doc = art::read_json_file(path("run0.json"));
  CHECK(doc["converged"] == false);
  CHECK(doc["iterations"] == 0);
  CHECK(csv::read_file(path("curve0.csv")).size() == 1);
}

TEST_CASE("dispatch writes curves and an objective summary") {
  ensure_matrix();
  write_utility(path("u1.csv"), 1.0);
  write_utility(path("u_zero.csv"), 0.0);
  write_uniform_rho(path("rho.csv"));
  REQUIRE(run({"solve", path("matrix.json"), path("u_zero.csv"), "--policy-out",
               path("p_zero.json"), "--values-out", path("v_zero.csv")}) == cli::kOk);
  REQUIRE(run({"solve", path("matrix.json"), path("u1.csv"), "--gamma", "0.5", "--policy-out",
               path("optimal.json"), "--values-out", path("v1.csv")}) == cli::kOk);
  REQUIRE(run({"dispatch", path("matrix.json"), path("optimal.json"), path("p_zero.json"),
               "--initial", path("rho.csv"), "-o", path("dispatch.csv"), "--utility",
               path("u1.csv"), "--gamma", "0.5", "--summary-out", path("summary.json")}) ==
          cli::kOk);
  const auto rows = csv::read_file(path("dispatch.csv"));
  REQUIRE(rows.size() == 11);
  CHECK(rows[0][0] == "t");
  CHECK(rows[0][1] == "power_kw_optimal");
  CHECK(rows[0][2] == "power_kw_p_zero");
  CHECK(rows[0].size() == 3 + 2 * 12);

  const auto summary = art::read_json_file(path("summary.json"));
  const double optimal = summary["objectives"]["optimal"];
  const double passive = summary["passive_objective"];
  CHECK(passive >= optimal);
  CHECK(summary["objectives"]["p_zero"].get<double>() == doctest::Approx(passive));

  CHECK(run({"dispatch", path("matrix.json"), path("optimal.json"), "--initial", path("rho.csv"),
             "-o", path("d.csv"), "--utility", path("u1.csv")}) == cli::kInputValidation);
}

TEST_CASE("dispatch of the identity policy is flat") {
  ensure_matrix();
  const auto id = Policy::constant(TransitionMatrix::identity(12), 5);
  art::write_text_file(path("identity.json"), art::dump(art::to_json(id)));
  write_uniform_rho(path("rho.csv"));
  REQUIRE(run({"dispatch", path("matrix.json"), path("identity.json"), "--initial",
               path("rho.csv"), "-o", path("flat.csv")}) == cli::kOk);
  const auto rows = csv::read_file(path("flat.csv"));
  REQUIRE(rows.size() == 7);
  for (std::size_t t = 2; t < rows.size(); ++t) CHECK(rows[t][1] == rows[1][1]);
}
