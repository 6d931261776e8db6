#pragma once

#include "sprox/potential.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sprox {

struct SproxRunResult {
  IterateState state;
  std::vector<TraceRow> trace;
  std::optional<BestIterate> best;
  MonitorSummary monitors;
  std::optional<double> phi0;  // potential at the initial state, full monitoring only
  std::vector<std::string> warnings;
  Index iterations = 0;
};

/// Called after every step with (previous state, new state, step certificate).
using StepObserver = std::function<void(const IterateState&, const IterateState&, const StationarityReport&)>;

/// Runs the smoothed proximal ALM until max_iters or until the step
/// certificate reaches target_eps. Trace row t describes the state after t
/// iterations; its certificate comes from the step t-1 -> t. The best
/// (smallest epsilon) iterate is kept regardless of the monitor level.
template <SmoothObjective F>
SproxRunResult sprox_alm_run(const ProblemInstance<F>& inst, SolverParams params,
                             std::optional<IterateState> init = std::nullopt, const StepObserver& observer = {}) {
  check_dimensions(inst);
  detail::require(params.trace_every >= 1, ErrorKind::invalid_argument, "trace_every must be >= 1");
  detail::require(params.max_iters >= 0, ErrorKind::invalid_argument, "max_iters must be >= 0");
  detail::require(params.c > 0 && params.alpha > 0 && params.beta > 0 && params.beta <= 1 && params.rho >= 0,
                  ErrorKind::invalid_argument, "step sizes out of range");
  if (params.sigma_max_A <= 0 && inst.m() > 0) params.sigma_max_A = spectral_norm(inst.A);

  SproxRunResult out;
  IterateState st = init ? *init : default_initial_state(inst, params);
  const bool full = params.monitor_level == MonitorLevel::full;

  std::optional<PotentialEvaluator<F>> ev;
  std::optional<PotentialParts> cached;  // phi parts of state cached_t, when known
  Index cached_t = -1;
  MonitorConstants mc{};
  if (full) {
    ev.emplace(inst, params, params.inner_tol);
    std::optional<double> lb;
    if (inst.has_certified_lower_bound()) lb = inst.lower_bound->value;
    mc = monitor_constants(inst.lipschitz_grad, params, params.sigma_max_A, lb);
    cached = (*ev)(st.x, st.y, st.z);
    out.phi0 = cached->phi;
    cached_t = st.t;
  }

  for (Index k = 0; k < params.max_iters; ++k) {
    IterateState next = sprox_alm_step(inst, st, params);
    if (next.y.norm() > 1e12 || next.x.norm() > 1e12)
      throw Error(ErrorKind::divergence, "iterates blew up at iteration " + std::to_string(next.t));
    StationarityReport rep = certificate_from_step_unchecked(inst, st.x, next.x, st.z, params);
    if (observer) observer(st, next, rep);
    if (!out.best || rep.epsilon < out.best->report.epsilon) out.best = BestIterate{next.t, next.x, next.y, rep};
    const bool done = params.target_eps > 0 && rep.epsilon <= params.target_eps;
    const bool row_due = params.monitor_level != MonitorLevel::none && (next.t % params.trace_every == 0 || done);

    if (row_due) {
      TraceRow row{next.t, inst.objective.value(next.x), rep.eq_residual, rep.cert_norm,
                   (next.x - st.x).norm(), (next.z - st.z).norm(), {}, {}};
      if (full) {
        const bool prev_known = cached && cached_t == st.t;
        PotentialParts pa = prev_known ? *cached : (*ev)(st.x, st.y, st.z);
        StepMonitorInput in{&st, &next, &pa, nullptr, Vector()};
        in.x_mid = ev->inner(next.y, st.z);
        PotentialParts pb = (*ev)(next.x, next.y, next.z);
        in.phi_cur = &pb;
        row.phi_ok = check_step_monitors(inst, params, mc, in, out.monitors);
        row.phi = pb.phi;
        cached = std::move(pb);
        cached_t = next.t;
      }
      out.trace.push_back(std::move(row));
    }
    st = std::move(next);
    if (done) break;
  }
  out.iterations = st.t - (init ? init->t : 0);
  if (full && params.mode == SolverMode::practical && out.monitors.total_violations() > 0)
    out.warnings.push_back("monitor violations in practical mode (no theoretical guarantee)");
  out.state = std::move(st);
  return out;
}

}  // namespace sprox
