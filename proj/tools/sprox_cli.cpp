// sprox: solve, plan and verify linearly constrained nonconvex problems.
#include "sprox.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <random>

namespace {

using namespace sprox;

enum Exit { ok = 0, check_failed = 1, solver_error = 2, io_error = 3 };

void emit(const json& j, const std::string& out) {
  if (out.empty()) std::cout << j.dump(2) << '\n';
  else write_json_file(out, j);
}

StepOverrides overrides_from(const std::optional<double>& rho, const std::optional<double>& p,
                             const std::optional<double>& c, const std::optional<double>& alpha,
                             const std::optional<double>& beta) {
  StepOverrides ov;
  ov.rho = rho;
  ov.p = p;
  ov.c = c;
  ov.alpha = alpha;
  ov.beta = beta;
  return ov;
}

Vector feasible_center(const QpInstance& inst) {
  if (inst.meta.x_feas) return *inst.meta.x_feas;
  return project(inst.polyhedron, Vector::Zero(inst.n())).point;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"S-prox-ALM solver and error-bound verifiers"};
  app.require_subcommand(1);
  std::string out;

  // solve
  auto* solve = app.add_subcommand("solve", "run ALM or S-prox-ALM and report stationarity");
  std::string problem, algo = "sprox", mode = "practical", trace, monitor = "cheap";
  Index max_iters = 1000, trace_every = 1, exact_limit = 20;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  QpGeneratorSpec gen;
  std::optional<double> o_rho, o_p, o_c, o_alpha, o_beta;
  solve->add_option("--problem", problem, "problem JSON; omit to generate one from --seed");
  solve->add_option("--algo", algo)->check(CLI::IsMember({"alm", "sprox"}));
  solve->add_option("--mode", mode)->check(CLI::IsMember({"theoretical", "practical"}));
  solve->add_option("--max-iters", max_iters)->check(CLI::NonNegativeNumber);
  solve->add_option("--tol", tol, "stop once epsilon reaches this")->check(CLI::PositiveNumber);
  solve->add_option("--trace", trace, "trace CSV path");
  solve->add_option("--trace-every", trace_every)->check(CLI::PositiveNumber);
  solve->add_option("--monitor", monitor)->check(CLI::IsMember({"none", "cheap", "full"}));
  solve->add_option("--seed", seed, "generator seed when --problem is absent");
  solve->add_option("--n", gen.n);
  solve->add_option("--m", gen.m);
  solve->add_option("--neg-eigs", gen.neg_eigs);
  solve->add_option("--exact-limit", exact_limit, "largest row count for exact theta");
  solve->add_option("--rho", o_rho);
  solve->add_option("--p", o_p);
  solve->add_option("--c", o_c);
  solve->add_option("--alpha", o_alpha);
  solve->add_option("--beta", o_beta);

  // constants
  auto* constants = app.add_subcommand("constants", "plan step sizes and report every constant");
  constants->add_option("--problem", problem)->required();
  constants->add_option("--mode", mode)->check(CLI::IsMember({"theoretical", "practical"}));
  constants->add_option("--exact-limit", exact_limit);

  // verify-eb
  auto* veb = app.add_subcommand("verify-eb", "sample the global dual error bound");
  Index samples = 200;
  veb->add_option("--problem", problem)->required();
  veb->add_option("--samples", samples)->check(CLI::PositiveNumber);
  veb->add_option("--seed", seed);
  veb->add_option("--exact-limit", exact_limit);

  // verify-hoffman
  auto* vh = app.add_subcommand("verify-hoffman", "check the Hoffman bound on a linear system");
  std::string system;
  Index points = 100;
  vh->add_option("--system", system)->required();
  vh->add_option("--points", points)->check(CLI::PositiveNumber);
  vh->add_option("--seed", seed);
  vh->add_option("--exact-limit", exact_limit);

  // trace-segment
  auto* ts = app.add_subcommand("trace-segment", "trace x*(s r) along [0, 1] and check each piece");
  Index grid = 1001;
  double y_scale = 1.0;
  ts->add_option("--problem", problem)->required();
  ts->add_option("--grid", grid)->check(CLI::Range(Index(2), Index(1000000)));
  ts->add_option("--seed", seed, "draws y_tilde");
  ts->add_option("--y-scale", y_scale);
  ts->add_option("--p", o_p, "proximal weight, default 3 L_f");
  ts->add_option("--exact-limit", exact_limit);

  // gen-qp
  auto* gq = app.add_subcommand("gen-qp", "write a random nonconvex box QP");
  std::string gen_out;
  bool certify = false;
  gq->add_option("--n", gen.n);
  gq->add_option("--m", gen.m);
  gq->add_option("--neg-eigs", gen.neg_eigs);
  gq->add_option("--seed", gen.seed);
  gq->add_option("--lo", gen.lo);
  gq->add_option("--hi", gen.hi);
  gq->add_option("--out", gen_out)->required();
  gq->add_flag("--certify", certify, "replace f_lower by a certified interval bound");

  for (CLI::App* sub : {solve, constants, veb, vh, ts})
    sub->add_option("--out-json", out, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? Exit::ok : Exit::solver_error;
  }

  try {
    if (*solve) {
      ExperimentConfig cfg;
      if (!problem.empty()) {
        cfg.problem_path = problem;
      } else {
        gen.seed = seed;
        cfg.generator = gen;
      }
      cfg.algorithm = parse_algorithm(algo);
      cfg.mode = parse_solver_mode(mode);
      cfg.max_iters = max_iters;
      cfg.target_eps = tol;
      if (!trace.empty()) cfg.trace_path = trace;
      cfg.monitor_level = parse_monitor_level(monitor);
      cfg.seed = seed;
      cfg.trace_every = trace_every;
      cfg.exact_limit = exact_limit;
      cfg.overrides = overrides_from(o_rho, o_p, o_c, o_alpha, o_beta);
      ExperimentResult res = run_experiment(cfg);
      emit(res.summary, out);
      return res.guaranteed_run_violated ? Exit::check_failed : Exit::ok;
    }
    if (*constants) {
      const QpInstance inst = read_problem(problem);
      const StepPlan plan = plan_stepsizes(inst, parse_solver_mode(mode), {}, exact_limit);
      emit(to_json(plan.report), out);
      return Exit::ok;
    }
    if (*veb) {
      const QpInstance inst = read_problem(problem);
      const StepPlan plan = plan_stepsizes(inst, SolverMode::practical, {}, exact_limit);
      DualErrorBoundReport rep = verify_dual_error_bound(inst, plan.params, samples, seed, plan.report.sigma5_bar);
      json j = to_json(rep);
      j["theta_exact"] = plan.report.theta_exact;
      emit(j, out);
      return rep.pass ? Exit::ok : Exit::check_failed;
    }
    if (*vh) {
      const json js = read_json_file(system);
      LinearSystem sys;
      try {
        sys = linear_system_from_json(js);
      } catch (const json::exception& e) {
        throw Error(ErrorKind::io, "'" + system + "': " + e.what());
      }
      double theta = 0.0;
      bool exact = true;
      if (js.contains("theta")) {
        theta = js["theta"].get<double>();
      } else {
        HoffmanResult hr = hoffman_constant_system(sys.C1, sys.C2, exact_limit);
        theta = hr.theta;
        exact = hr.exact;
      }
      HoffmanReport rep = verify_hoffman(sys, theta, points, seed);
      json j = to_json(rep);
      j["theta_exact"] = exact;
      emit(j, out);
      return rep.pass ? Exit::ok : Exit::check_failed;
    }
    if (*ts) {
      const QpInstance inst = read_problem(problem);
      const double p = o_p.value_or(3.0 * inst.lipschitz_grad);
      const QpInstance g = prox_instance(inst, p, feasible_center(inst));
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector y(inst.m());
      for (Index i = 0; i < y.size(); ++i) y[i] = y_scale * normal(rng);
      SegmentTrace tr = trace_segment_decomposition(g, y, grid, exact_limit);
      json j = to_json(tr);
      j["y_tilde"] = detail::vector_to_json(y);
      j["p"] = p;
      emit(j, out);
      return tr.pass ? Exit::ok : Exit::check_failed;
    }
    if (*gq) {
      QpInstance inst = generate_nonconvex_qp(gen);
      if (certify) certify_lower_bound(inst);
      write_problem(gen_out, inst);
      return Exit::ok;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::io ? Exit::io_error : Exit::solver_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return Exit::solver_error;
  }
  return Exit::ok;
}
