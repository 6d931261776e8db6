#pragma once

#include "sprox/certificate.hpp"
#include "sprox/kfunction.hpp"
#include "sprox/projection.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sprox {

struct IterateState {
  Vector x;
  Vector y;
  Vector z;
  Index t = 0;
  Vector proj_mu;  // warm start for general-polyhedron projections
};

struct TraceRow {
  Index t = 0;
  double f = 0.0;
  double eq_res = 0.0;
  double cert_norm = 0.0;
  double dx = 0.0;
  double dz = 0.0;
  std::optional<double> phi;
  std::optional<bool> phi_ok;
};

struct InnerSolve {
  Vector x;
  double residual = 0.0;  // L ||x - Proj(x - grad/L)||
  Index iterations = 0;
};

/// Projected gradient with step 1/L until L ||x - T(x)|| <= tol.
template <class Grad>
InnerSolve projected_gradient(const Polyhedron& P, Grad&& grad, double L, Vector x, double tol, double proj_tol,
                              Index max_iters, Vector* mu_ws = nullptr) {
  Vector mu_local;
  Vector* mu = mu_ws ? mu_ws : &mu_local;
  Vector best = x;
  double best_res = std::numeric_limits<double>::infinity();
  for (Index it = 0; it < max_iters; ++it) {
    const Vector g = grad(x);
    if (!g.allFinite()) throw Error(ErrorKind::non_finite, "gradient is not finite");
    ProjectionResult pr = project(P, x - g / L, proj_tol, mu->size() ? mu : nullptr);
    if (pr.multipliers.size()) *mu = pr.multipliers;
    const double res = L * (x - pr.point).norm();
    if (res < best_res) {
      best_res = res;
      best = x;
    }
    if (res <= tol) return {std::move(x), res, it};
    x = std::move(pr.point);
  }
  throw IterationLimitError("projected gradient hit " + std::to_string(max_iters) + " iterations", best, best_res);
}

/// x(y, z) = argmin_{x in P} K(x, z; y). K is strongly convex when p > L_f.
template <SmoothObjective F>
InnerSolve inner_minimize_K(const ProblemInstance<F>& inst, const Vector& y, const Vector& z,
                            const SolverParams& params, double tol, const Vector* warm = nullptr,
                            Index max_iters = 1000000) {
  detail::require(params.p > inst.lipschitz_grad, ErrorKind::invalid_argument, "need p > L_f");
  detail::require(tol > 0, ErrorKind::invalid_argument, "tol must be positive");
  const double L = K_lipschitz(inst, params);
  Vector x0 = warm ? *warm : z;
  auto grad = [&](const Vector& x) { return K_gradient(inst, x, z, y, params.rho, params.p); };
  return projected_gradient(inst.polyhedron, grad, L, std::move(x0), tol, std::min(params.proj_tol, 1e-3 * tol),
                            max_iters);
}

struct AlmSolve {
  Vector x;
  Vector y;
  double eq_res = 0.0;
  double inner_res = 0.0;
  Index outer = 0;
  Index inner_total = 0;
};

/// Augmented Lagrangian loop for min g(x) s.t. Ax = b, x in P, where g is
/// smooth and strongly convex: each outer step minimizes
/// g + y^T(Ax - b) + rho/2 ||Ax - b||^2 over P to a tolerance that tightens
/// with the residual, then moves y by rho (Ax - b).
template <class Grad>
AlmSolve alm_strongly_convex(const Polyhedron& P, const Matrix& A, const Vector& b, Grad&& grad_g, double L_g,
                             double rho, Vector x, Vector y, double tol, Index max_outer = 20000) {
  const double sA = A.rows() > 0 ? spectral_norm(A) : 0.0;
  const double L = L_g + rho * sA * sA;
  AlmSolve out;
  Vector mu_ws;
  double eq = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < max_outer; ++k) {
    const double itol = std::max(tol, 1e-2 * std::min(eq, 1.0));
    auto grad = [&](const Vector& u) -> Vector {
      return grad_g(u) + A.transpose() * (y + rho * (A * u - b));
    };
    InnerSolve in = projected_gradient(P, grad, L, std::move(x), itol, std::min(1e-3 * tol, 1e-10), 1000000, &mu_ws);
    x = std::move(in.x);
    out.inner_total += in.iterations;
    const Vector r = A * x - b;
    eq = r.norm();
    y += rho * r;
    if (!y.allFinite() || y.norm() > 1e12) throw Error(ErrorKind::divergence, "ALM divergence: multiplier blew up");
    if (eq <= tol && in.residual <= tol) {
      out.x = std::move(x);
      out.y = std::move(y);
      out.eq_res = eq;
      out.inner_res = in.residual;
      out.outer = k + 1;
      return out;
    }
  }
  throw IterationLimitError("ALM hit " + std::to_string(max_outer) + " outer iterations", x, eq);
}

struct ProxSolve {
  Vector x;      // xbar*(z)
  double value;  // P(z)
  Vector y;      // equality multiplier
  Index outer = 0;
};

/// xbar*(z) = argmin_{x in P, Ax = b} f(x) + p/2 ||x - z||^2 and its value P(z).
template <SmoothObjective F>
ProxSolve solve_constrained_strongly_convex(const ProblemInstance<F>& inst, const Vector& z,
                                            const SolverParams& params, double tol, const Vector* warm_x = nullptr,
                                            const Vector* warm_y = nullptr) {
  detail::require(params.p > inst.lipschitz_grad, ErrorKind::invalid_argument, "need p > L_f");
  const double p = params.p;
  const double L_g = inst.lipschitz_grad + p;
  const double s = sigma_max_A(inst, params);
  const double rho = s > 0 ? 10.0 * L_g / (s * s) : 0.0;
  auto grad = [&](const Vector& x) -> Vector { return inst.objective.gradient(x) + p * (x - z); };
  Vector x0 = warm_x ? *warm_x : z;
  Vector y0 = warm_y ? *warm_y : Vector::Zero(inst.m());
  AlmSolve a = alm_strongly_convex(inst.polyhedron, inst.A, inst.b, grad, L_g, rho, std::move(x0),
                                         std::move(y0), tol);
  ProxSolve out;
  out.value = inst.objective.value(a.x) + 0.5 * p * (a.x - z).squaredNorm();
  out.x = std::move(a.x);
  out.y = std::move(a.y);
  out.outer = a.outer;
  return out;
}

/// One iteration of the smoothed proximal ALM:
///   y+ = y + alpha (Ax - b)
///   x+ = Proj_P(x - c grad_x K(x, z; y+))
///   z+ = z + beta (x+ - z)
template <SmoothObjective F>
IterateState sprox_alm_step(const ProblemInstance<F>& inst, const IterateState& s, const SolverParams& params) {
  detail::require(s.x.size() == inst.n() && s.z.size() == inst.n() && s.y.size() == inst.m(),
                  ErrorKind::dimension_mismatch, "state dimensions do not match the instance");
  IterateState next;
  next.y = s.y + params.alpha * (inst.A * s.x - inst.b);
  const Vector g = K_gradient(inst, s.x, s.z, next.y, params.rho, params.p);
  if (!g.allFinite()) throw Error(ErrorKind::non_finite, "gradient of K is not finite");
  ProjectionResult pr = project(inst.polyhedron, s.x - params.c * g, params.proj_tol,
                                s.proj_mu.size() ? &s.proj_mu : nullptr);
  next.x = std::move(pr.point);
  next.proj_mu = std::move(pr.multipliers);
  next.z = s.z + params.beta * (next.x - s.z);
  next.t = s.t + 1;
  return next;
}

/// x0 = Proj_P(0), z0 = x0, y0 = 0.
template <SmoothObjective F>
IterateState default_initial_state(const ProblemInstance<F>& inst, const SolverParams& params) {
  IterateState s;
  ProjectionResult pr = project(inst.polyhedron, Vector::Zero(inst.n()), params.proj_tol);
  s.x = pr.point;
  s.z = s.x;
  s.y = Vector::Zero(inst.m());
  s.proj_mu = pr.multipliers;
  return s;
}

struct BestIterate {
  Index t = 0;
  Vector x;
  Vector y;
  StationarityReport report;
};

struct AlmRunResult {
  IterateState state;
  std::vector<TraceRow> trace;
  std::optional<BestIterate> best;
  bool heuristic = false;  // L_rho(.; y) not known to be strongly convex
  std::vector<std::string> warnings;
};

/// Classical ALM on the original problem, used as a baseline. Each outer
/// step runs projected gradient on L_rho(.; y) from the previous x. When
/// L_rho is not strongly convex this only reaches a stationary point and the
/// run is flagged heuristic. Trace certificates are min-norm.
template <SmoothObjective F>
AlmRunResult alm_run(const ProblemInstance<F>& inst, const SolverParams& params,
                     std::optional<IterateState> init = std::nullopt) {
  check_dimensions(inst);
  AlmRunResult out;
  const double rho = params.rho;
  const double s = sigma_max_A(inst, params);
  const double L = inst.lipschitz_grad + rho * s * s;

  if constexpr (HasHessian<F>) {
    const Matrix H = inst.objective.hessian() + rho * inst.A.transpose() * inst.A;
    out.heuristic = eigen_range(0.5 * (H + H.transpose())).first <= 0.0;
  } else {
    out.heuristic = true;
  }
  if (out.heuristic) out.warnings.push_back("heuristic: augmented Lagrangian subproblem is nonconvex");

  IterateState st = init ? *init : default_initial_state(inst, params);
  Vector mu_ws = st.proj_mu;
  Index inner_caps = 0;
  for (Index t = 0; t < params.max_iters; ++t) {
    const Vector y = st.y;
    auto grad = [&](const Vector& u) -> Vector {
      return inst.objective.gradient(u) + inst.A.transpose() * (y + rho * (inst.A * u - inst.b));
    };
    Vector x_next;
    try {
      x_next = projected_gradient(inst.polyhedron, grad, L, st.x, params.inner_tol, params.proj_tol, 100000, &mu_ws)
                   .x;
    } catch (const IterationLimitError& e) {
      x_next = e.best();
      ++inner_caps;
    }
    IterateState next;
    next.y = st.y + rho * (inst.A * x_next - inst.b);
    next.z = x_next;
    next.t = st.t + 1;
    const double dx = (x_next - st.x).norm();
    next.x = std::move(x_next);
    if (!next.y.allFinite() || next.y.norm() > 1e12 || next.x.norm() > 1e12)
      throw Error(ErrorKind::divergence, "ALM divergence at iteration " + std::to_string(next.t));

    StationarityReport rep = certificate_minnorm(inst, next.x, next.y);
    if (!out.best || rep.epsilon < out.best->report.epsilon) out.best = BestIterate{next.t, next.x, next.y, rep};
    const bool done = params.target_eps > 0 && rep.epsilon <= params.target_eps;
    if (params.monitor_level != MonitorLevel::none &&
        (next.t % params.trace_every == 0 || done)) {
      out.trace.push_back(
          TraceRow{next.t, inst.objective.value(next.x), rep.eq_residual, rep.cert_norm, dx, 0.0, {}, {}});
    }
    st = std::move(next);
    if (done) break;
  }
  if (inner_caps > 0)
    out.warnings.push_back("inner solve hit its iteration cap " + std::to_string(inner_caps) + " times");
  out.state = std::move(st);
  return out;
}

}  // namespace sprox
