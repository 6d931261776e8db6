#pragma once

#include "sprox/generator.hpp"
#include "sprox/io.hpp"
#include "sprox/report.hpp"

#include <fstream>
#include <iomanip>
#include <optional>
#include <string>
#include <vector>

namespace sprox {

enum class Algorithm { alm, sprox };

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "alm") return Algorithm::alm;
  if (s == "sprox") return Algorithm::sprox;
  throw Error(ErrorKind::invalid_argument, "unknown algorithm '" + s + "'");
}

struct ExperimentConfig {
  std::optional<std::string> problem_path;
  std::optional<QpGeneratorSpec> generator;
  Algorithm algorithm = Algorithm::sprox;
  SolverMode mode = SolverMode::practical;
  Index max_iters = 1000;
  double target_eps = 1e-8;
  std::optional<std::string> trace_path;
  MonitorLevel monitor_level = MonitorLevel::cheap;
  std::uint64_t seed = 0;
  Index trace_every = 1;
  Index exact_limit = 20;
  StepOverrides overrides;
};

inline void validate(const ExperimentConfig& cfg) {
  detail::require(cfg.problem_path.has_value() != cfg.generator.has_value(), ErrorKind::invalid_argument,
                  "give exactly one problem source");
  detail::require(cfg.target_eps > 0, ErrorKind::invalid_argument, "target_eps must be positive");
  detail::require(cfg.max_iters >= 0, ErrorKind::invalid_argument, "max_iters must be >= 0");
  detail::require(cfg.trace_every >= 1, ErrorKind::invalid_argument, "trace_every must be >= 1");
}

struct ExperimentResult {
  json summary;
  std::vector<TraceRow> trace;
  bool guaranteed_run_violated = false;  // theoretical mode with monitor violations
};

inline void write_trace_csv(const std::string& path, const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::io, "cannot write '" + path + "'");
  out << std::setprecision(17);
  out << "t,f,eq_res,cert_norm,dx,dz,phi,phi_ok\n";
  for (const TraceRow& r : trace) {
    out << r.t << ',' << r.f << ',' << r.eq_res << ',' << r.cert_norm << ',' << r.dx << ',' << r.dz << ',';
    if (r.phi) out << *r.phi;
    out << ',';
    if (r.phi_ok) out << (*r.phi_ok ? 1 : 0);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::io, "write to '" + path + "' failed");
}

inline QpInstance load_problem(const ExperimentConfig& cfg) {
  if (cfg.problem_path) return read_problem(*cfg.problem_path);
  QpGeneratorSpec spec = *cfg.generator;
  return generate_nonconvex_qp(spec);
}

/// Plans step sizes, runs the chosen solver and builds the summary. The trace
/// file is written only after the run finishes, so a failed load or solve
/// leaves no partial trace behind.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const QpInstance inst = load_problem(cfg);
  const StepPlan plan = plan_stepsizes(inst, cfg.mode, cfg.overrides, cfg.exact_limit);
  SolverParams params = plan.params;
  params.max_iters = cfg.max_iters;
  params.target_eps = cfg.target_eps;
  params.monitor_level = cfg.monitor_level;
  params.trace_every = cfg.trace_every;

  ExperimentResult res;
  json& s = res.summary;
  std::vector<std::string> warnings = plan.report.warnings;
  std::optional<BestIterate> best;
  std::optional<StationarityReport> last;
  Index iters = 0;
  bool heuristic = false;
  json monitors = nullptr;
  std::optional<double> phi0;

  if (cfg.algorithm == Algorithm::sprox) {
    SproxRunResult run = sprox_alm_run(inst, params, std::nullopt,
                                       [&](const IterateState&, const IterateState&, const StationarityReport& r) {
                                         last = r;
                                       });
    res.trace = std::move(run.trace);
    best = std::move(run.best);
    iters = run.iterations;
    phi0 = run.phi0;
    if (params.monitor_level == MonitorLevel::full) {
      monitors = to_json(run.monitors);
      res.guaranteed_run_violated = cfg.mode == SolverMode::theoretical && run.monitors.total_violations() > 0;
    }
    warnings.insert(warnings.end(), run.warnings.begin(), run.warnings.end());
  } else {
    AlmRunResult run = alm_run(inst, params);
    res.trace = std::move(run.trace);
    best = std::move(run.best);
    iters = run.state.t;
    heuristic = run.heuristic;
    if (iters > 0) last = certificate_minnorm(inst, run.state.x, run.state.y);
    warnings.insert(warnings.end(), run.warnings.begin(), run.warnings.end());
  }

  s["algo"] = cfg.algorithm == Algorithm::sprox ? "sprox" : "alm";
  s["mode"] = to_string(cfg.mode);
  s["iters"] = iters;
  s["final_eps"] = last ? num(last->epsilon) : json(nullptr);
  s["final"] = last ? to_json(*last) : json(nullptr);
  s["best_eps"] = best ? num(best->report.epsilon) : json(nullptr);
  s["best"] = best ? json{{"t", best->t}, {"x", detail::vector_to_json(best->x)},
                          {"y", detail::vector_to_json(best->y)}, {"report", to_json(best->report)}}
                   : json(nullptr);
  s["constants"] = to_json(plan.report);
  s["rate_fit"] = res.trace.size() >= 200 ? to_json(fit_rate(res.trace)) : json(nullptr);
  s["monitors"] = monitors;
  s["phi0"] = phi0 ? num(*phi0) : json(nullptr);
  s["heuristic"] = heuristic;
  s["warnings"] = warnings;

  if (cfg.trace_path) write_trace_csv(*cfg.trace_path, res.trace);
  return res;
}

}  // namespace sprox
