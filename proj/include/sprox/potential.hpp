#pragma once

#include "sprox/solvers.hpp"

#include <array>
#include <optional>
#include <string>

namespace sprox {

/// phi = K(x, z; y) - 2 d(y, z) + 2 P(z) with the minimizers that define d and P.
struct PotentialParts {
  double phi = 0.0;
  double K = 0.0;
  double d = 0.0;
  double P = 0.0;
  Vector x_yz;  // x(y, z)
  Vector xbar;  // xbar*(z)
  Vector ybar;  // multiplier of the proximal problem
};

/// Evaluates phi and its parts, warm-starting each inner solve from the
/// previous call.
template <SmoothObjective F>
class PotentialEvaluator {
 public:
  PotentialEvaluator(const ProblemInstance<F>& inst, const SolverParams& params, double tol)
      : inst_(inst), params_(params), tol_(tol) {}

  /// x(y, z)
  Vector inner(const Vector& y, const Vector& z) {
    InnerSolve in = inner_minimize_K(inst_, y, z, params_, tol_, last_x_ ? &*last_x_ : nullptr);
    last_x_ = in.x;
    return in.x;
  }

  ProxSolve prox(const Vector& z) {
    ProxSolve ps = solve_constrained_strongly_convex(inst_, z, params_, tol_, last_xbar_ ? &*last_xbar_ : nullptr,
                                                     last_ybar_ ? &*last_ybar_ : nullptr);
    last_xbar_ = ps.x;
    last_ybar_ = ps.y;
    return ps;
  }

  PotentialParts operator()(const Vector& x, const Vector& y, const Vector& z) {
    PotentialParts out;
    out.K = K_value(inst_, x, z, y, params_.rho, params_.p);
    out.x_yz = inner(y, z);
    out.d = K_value(inst_, out.x_yz, z, y, params_.rho, params_.p);
    ProxSolve ps = prox(z);
    out.P = ps.value;
    out.xbar = std::move(ps.x);
    out.ybar = std::move(ps.y);
    out.phi = out.K - 2.0 * out.d + 2.0 * out.P;
    return out;
  }

 private:
  const ProblemInstance<F>& inst_;
  SolverParams params_;
  double tol_;
  std::optional<Vector> last_x_, last_xbar_, last_ybar_;
};

template <SmoothObjective F>
PotentialParts potential_value(const ProblemInstance<F>& inst, const IterateState& state, const SolverParams& params,
                               double tol = 1e-10) {
  PotentialEvaluator<F> ev(inst, params, tol);
  return ev(state.x, state.y, state.z);
}

/// Runtime checks of the inequalities behind the convergence analysis.
enum class Monitor {
  potential_monotone,       // phi does not increase
  potential_descent,        // sufficient decrease with the error-bound term absorbed
  potential_descent_raw,    // sufficient decrease before absorbing it, needs only beta < 1/30
  potential_lower_bound,    // phi >= certified f_lower
  primal_error_bound_next,  // sigma2 ||x+ - x(y+, z)|| <= ||x+ - x||
  primal_error_bound_prev,  // sigma1 ||x - x(y+, z)|| <= ||x+ - x||
  dual_lipschitz,           // sigma3 ||x(y, z) - x(y', z)|| <= ||y - y'||
  prox_map_lipschitz,       // sigma4 ||xbar*(z) - xbar*(z')|| <= ||z - z'||
  inner_map_lipschitz_z,    // sigma4 ||x(y, z) - x(y, z')|| <= ||z - z'||
  primal_descent,           // K decrease along one iteration
  dual_ascent,              // d increase along one iteration
  proximal_descent,         // P change along one iteration
  count
};

inline const char* to_string(Monitor m) {
  static constexpr std::array<const char*, static_cast<size_t>(Monitor::count)> names = {
      "potential_monotone",     "potential_descent",      "potential_descent_raw",
      "potential_lower_bound",  "primal_error_bound_next", "primal_error_bound_prev",
      "dual_lipschitz",         "prox_map_lipschitz",     "inner_map_lipschitz_z",
      "primal_descent",         "dual_ascent",            "proximal_descent"};
  return names[static_cast<size_t>(m)];
}

struct MonitorStat {
  Index checked = 0;
  Index violations = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min of (rhs side slack left)
  Index first_violation_t = -1;
};

struct MonitorSummary {
  std::array<MonitorStat, static_cast<size_t>(Monitor::count)> stats{};

  MonitorStat& operator[](Monitor m) { return stats[static_cast<size_t>(m)]; }
  const MonitorStat& operator[](Monitor m) const { return stats[static_cast<size_t>(m)]; }

  /// Records `holds_by >= -slack`, where holds_by is (lhs - rhs) of an
  /// inequality written as lhs >= rhs.
  bool record(Monitor m, double holds_by, double slack, Index t) {
    MonitorStat& s = (*this)[m];
    ++s.checked;
    s.worst_margin = std::min(s.worst_margin, holds_by);
    const bool ok = holds_by >= -slack;
    if (!ok) {
      ++s.violations;
      if (s.first_violation_t < 0) s.first_violation_t = t;
    }
    return ok;
  }

  Index total_violations() const {
    Index v = 0;
    for (const auto& s : stats) v += s.violations;
    return v;
  }
};

/// Everything the monitors need about one step (prev -> cur) and the
/// constants involved.
struct StepMonitorInput {
  const IterateState* prev;
  const IterateState* cur;
  const PotentialParts* phi_prev;
  const PotentialParts* phi_cur;
  Vector x_mid;  // x(y_cur, z_prev)
};

struct MonitorConstants {
  double sigma1, sigma2, sigma3, sigma4;
  std::optional<double> f_lower;  // only when certified
};

inline MonitorConstants monitor_constants(double L_f, const SolverParams& params, double sigma_max_A,
                                          std::optional<double> certified_f_lower) {
  MonitorConstants mc;
  const double gamma = params.p - L_f;
  mc.sigma1 = params.c * gamma;
  mc.sigma2 = mc.sigma1 / (1.0 + mc.sigma1);
  mc.sigma3 = sigma_max_A > 0 ? gamma / sigma_max_A : std::numeric_limits<double>::infinity();
  mc.sigma4 = gamma / params.p;
  mc.f_lower = certified_f_lower;
  return mc;
}

/// Checks every monitored inequality for one step and returns whether the
/// sufficient-decrease inequality held.
template <SmoothObjective F>
bool check_step_monitors(const ProblemInstance<F>& inst, const SolverParams& params, const MonitorConstants& mc,
                         const StepMonitorInput& in, MonitorSummary& sum) {
  const IterateState& a = *in.prev;
  const IterateState& b = *in.cur;
  const PotentialParts& pa = *in.phi_prev;
  const PotentialParts& pb = *in.phi_cur;
  const Index t = b.t;
  const double c = params.c, alpha = params.alpha, beta = params.beta, p = params.p;
  const double slack = 1e-6 * (1.0 + std::abs(pa.phi));

  const double dx = (b.x - a.x).norm();
  const double dz = (b.z - a.z).norm();
  const double dy = (b.y - a.y).norm();
  const double res_mid = (inst.A * in.x_mid - inst.b).norm();
  const double gap_mid = (in.x_mid - pa.xbar).squaredNorm();

  const double decrease = pa.phi - pb.phi;
  sum.record(Monitor::potential_monotone, decrease, slack, t);
  const double rhs33 = dx * dx / (4 * c) + 0.5 * alpha * res_mid * res_mid + p / (3 * beta) * dz * dz;
  const bool ok33 = sum.record(Monitor::potential_descent, decrease - rhs33, slack, t);
  if (beta < 1.0 / 30.0) {
    const double rhs31 = dx * dx / (4 * c) + alpha * res_mid * res_mid + p / (3 * beta) * dz * dz - 6 * p * beta * gap_mid;
    sum.record(Monitor::potential_descent_raw, decrease - rhs31, slack, t);
  }
  if (mc.f_lower) {
    const double lb_slack = 1e-8 * (1.0 + std::abs(*mc.f_lower));
    sum.record(Monitor::potential_lower_bound, pb.phi - *mc.f_lower, lb_slack, t);
  }

  sum.record(Monitor::primal_error_bound_next, dx - mc.sigma2 * (b.x - in.x_mid).norm(), slack, t);
  sum.record(Monitor::primal_error_bound_prev, dx - mc.sigma1 * (a.x - in.x_mid).norm(), slack, t);
  if (std::isfinite(mc.sigma3))
    sum.record(Monitor::dual_lipschitz, dy - mc.sigma3 * (in.x_mid - pa.x_yz).norm(), slack, t);
  sum.record(Monitor::prox_map_lipschitz, dz - mc.sigma4 * (pa.xbar - pb.xbar).norm(), slack, t);
  sum.record(Monitor::inner_map_lipschitz_z, dz - mc.sigma4 * (in.x_mid - pb.x_yz).norm(), slack, t);

  const double ra = (inst.A * a.x - inst.b).squaredNorm();
  sum.record(Monitor::primal_descent, (pa.K - pb.K) - (dx * dx / (2 * c) + p / (2 * beta) * dz * dz - alpha * ra),
             slack, t);
  const Vector Dz = b.z - a.z;
  const double ascent_rhs = alpha * (inst.A * a.x - inst.b).dot(inst.A * in.x_mid - inst.b) +
                            0.5 * p * Dz.dot(b.z + a.z - 2.0 * pb.x_yz);
  sum.record(Monitor::dual_ascent, (pb.d - pa.d) - ascent_rhs, slack, t);
  const double prox_rhs = p * Dz.dot(a.z - pa.xbar) + p / (2 * mc.sigma4) * dz * dz;
  sum.record(Monitor::proximal_descent, prox_rhs - (pb.P - pa.P), slack, t);
  return ok33;
}

}  // namespace sprox
