#include "sprox.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace sprox;
namespace fs = std::filesystem;

namespace {

std::vector<TraceRow> synthetic(double scale, Index rows) {
  std::vector<TraceRow> tr;
  for (Index t = 1; t <= rows; ++t) {
    TraceRow r;
    r.t = t;
    r.cert_norm = scale / std::sqrt(double(t));
    r.eq_res = 0.5 * r.cert_norm;
    tr.push_back(r);
  }
  return tr;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "sprox_tests";
  fs::create_directories(dir);
  return dir / name;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SPROX_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(RateFit, InverseSqrt) {
  const RateFit f = fit_rate(synthetic(1.0, 1000));
  ASSERT_TRUE(f.slope);
  EXPECT_NEAR(*f.slope, -0.5, 1e-12);
  EXPECT_NEAR(f.predicted_B, 1.0, 1e-12);
  EXPECT_NEAR(f.envelope_spread, 1.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_EQ(f.rows_used, 901);
}

TEST(RateFit, ScaledInverseSqrt) {
  EXPECT_NEAR(fit_rate(synthetic(2.0, 500)).predicted_B, 4.0, 1e-12);
}

TEST(RateFit, AllZeroResiduals) {
  const RateFit f = fit_rate(synthetic(0.0, 300));
  EXPECT_FALSE(f.slope);
  EXPECT_EQ(f.predicted_B, 0.0);
  EXPECT_EQ(to_json(f)["slope"], "n/a");
}

TEST(RateFit, NeedsTwoHundredRows) { EXPECT_THROW(fit_rate(synthetic(1.0, 199)), Error); }

TEST(RateFit, BestSoFarIsNonincreasing) {
  std::vector<TraceRow> tr = synthetic(1.0, 300);
  for (size_t i = 0; i < tr.size(); i += 7) tr[i].cert_norm *= 50;
  const std::vector<double> eps = best_so_far_eps(tr);
  for (size_t i = 1; i < eps.size(); ++i) EXPECT_LE(eps[i], eps[i - 1]);
}

TEST(Experiment, FixedInstanceGoldenRun) {
  const fs::path prob = scratch("one.json");
  write_problem(prob.string(), fixed_instance_1d());
  ExperimentConfig cfg;
  cfg.problem_path = prob.string();
  cfg.mode = SolverMode::theoretical;
  cfg.max_iters = 10000;
  cfg.target_eps = 1e-12;
  cfg.trace_path = scratch("one.csv").string();
  const ExperimentResult r = run_experiment(cfg);
  EXPECT_LE(r.summary["best_eps"].get<double>(), 1e-4);
  // the default start proj(0) = 0 is already the KKT point, so the run may stop early
  EXPECT_LE(r.summary["iters"].get<Index>(), 10000);
  EXPECT_NEAR(r.summary["best"]["x"][0].get<double>(), 0.0, 1e-4);
  EXPECT_TRUE(r.summary["constants"]["guaranteed"].get<bool>());
  std::ifstream in(*cfg.trace_path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,f,eq_res,cert_norm,dx,dz,phi,phi_ok");
}

TEST(Experiment, AlmOnNonconvexIsHeuristic) {
  ExperimentConfig cfg;
  cfg.generator = QpGeneratorSpec{};
  cfg.generator->neg_eigs = 5;  // more than rho A^T A (rank 3) can cover
  cfg.algorithm = Algorithm::alm;
  cfg.max_iters = 30;
  const ExperimentResult r = run_experiment(cfg);
  EXPECT_TRUE(r.summary["heuristic"].get<bool>());
}

TEST(Experiment, InvalidJsonLeavesNoTrace) {
  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << "{ not json";
  const fs::path trace = scratch("bad.csv");
  fs::remove(trace);
  ExperimentConfig cfg;
  cfg.problem_path = bad.string();
  cfg.trace_path = trace.string();
  try {
    run_experiment(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
  EXPECT_FALSE(fs::exists(trace));
}

TEST(Experiment, ConfigValidation) {
  ExperimentConfig cfg;
  EXPECT_THROW(run_experiment(cfg), Error);  // no source
  cfg.generator = QpGeneratorSpec{};
  cfg.problem_path = "x.json";
  EXPECT_THROW(run_experiment(cfg), Error);  // two sources
  cfg.problem_path.reset();
  cfg.target_eps = 0.0;
  EXPECT_THROW(run_experiment(cfg), Error);
}

TEST(Experiment, SummaryIsReproducible) {
  ExperimentConfig cfg;
  QpGeneratorSpec spec;
  spec.seed = 3;
  cfg.generator = spec;
  cfg.max_iters = 250;
  cfg.monitor_level = MonitorLevel::full;
  cfg.trace_every = 25;
  const json a = run_experiment(cfg).summary, b = run_experiment(cfg).summary;
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_TRUE(a["monitors"].contains("phi_monotone_violations"));
  EXPECT_TRUE(a["monitors"].contains("lower_bound_violations"));
}

TEST(Cli, ExitCodes) {
  const std::string prob = scratch("cli.json").string();
  EXPECT_EQ(run_cli("gen-qp --n 5 --m 2 --seed 1 --out " + prob), 0);
  EXPECT_EQ(run_cli("constants --problem " + prob), 0);
  EXPECT_EQ(run_cli("solve --problem " + prob + " --max-iters 300 --trace " + scratch("cli.csv").string()), 0);
  EXPECT_TRUE(fs::exists(scratch("cli.csv")));
  EXPECT_EQ(run_cli("solve --problem " + prob + " --algo alm --max-iters 20"), 0);
  EXPECT_EQ(run_cli("verify-eb --problem " + prob + " --samples 20 --seed 2"), 0);

  const std::string bad = scratch("cli_bad.json").string();
  std::ofstream(bad) << "[1, 2";
  EXPECT_EQ(run_cli("solve --problem " + bad), 3);
  EXPECT_EQ(run_cli("constants --problem /nonexistent.json"), 3);
  EXPECT_EQ(run_cli("gen-qp --n 3 --m 3 --out " + scratch("x.json").string()), 2);
  EXPECT_EQ(run_cli("solve --problem " + prob + " --mode theoretical --c 10"), 2);
}

TEST(Cli, VerifiersReportCheckFailures) {
  const std::string sys = scratch("sys.json").string();
  write_json_file(sys, json{{"n", 1}, {"C1", json::array()}, {"b1", json::array()}, {"C2", json::array({2.0})}, {"b2", json::array({0.0})}});
  EXPECT_EQ(run_cli("verify-hoffman --system " + sys + " --points 20 --seed 1"), 0);
  write_json_file(sys, json{{"n", 1}, {"C2", json::array({2.0})}, {"b2", json::array({0.0})}, {"theta", 0.2}});
  EXPECT_EQ(run_cli("verify-hoffman --system " + sys + " --points 20 --seed 1"), 1);

  const std::string one = scratch("cli_one.json").string();
  write_problem(one, fixed_instance_1d());
  EXPECT_EQ(run_cli("trace-segment --problem " + one + " --grid 51"), 0);
}

TEST(Cli, SolveWritesSummary) {
  const std::string out = scratch("summary.json").string();
  fs::remove(out);
  EXPECT_EQ(run_cli("solve --n 6 --m 2 --seed 4 --max-iters 200 --monitor full --trace-every 20 --out-json " + out), 0);
  const json s = read_json_file(out);
  for (const char* key : {"final_eps", "best_eps", "iters", "constants", "rate_fit", "monitors"})
    EXPECT_TRUE(s.contains(key)) << key;
  EXPECT_EQ(s["iters"].get<Index>(), 200);
}
