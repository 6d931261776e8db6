#pragma once

#include "sprox/constants.hpp"
#include "sprox/qp_enumeration.hpp"
#include "sprox/solvers.hpp"

#include <random>
#include <string>
#include <vector>

namespace sprox {

struct ErrorBoundSample {
  Vector y;
  Vector z;
  double lhs = 0.0;         // ||x(y,z) - xbar*(z)||
  double rhs_factor = 0.0;  // ||A x(y,z) - b||
  double ratio = 0.0;
};

/// lhs / rhs, with 0/0 read as 0 and x/0 as infinity below the guards.
inline double guarded_ratio(double lhs, double rhs, double rhs_guard = 1e-12, double lhs_guard = 1e-9) {
  if (rhs <= rhs_guard) return lhs <= lhs_guard ? 0.0 : std::numeric_limits<double>::infinity();
  return lhs / rhs;
}

struct DualErrorBoundReport {
  Index samples = 0;
  Index skipped = 0;
  double max_ratio = 0.0;
  double bound = 0.0;
  bool pass = true;
  std::uint64_t seed = 0;
  Index violations = 0;
  std::optional<ErrorBoundSample> worst;
  std::vector<std::string> log;
};

/// Samples (y, z) and compares ||x(y,z) - xbar*(z)|| with
/// bound * ||A x(y,z) - b||. y is Gaussian and z is Gaussian around a
/// feasible point, each at a scale cycling through 0.1, 1 and 10.
template <SmoothObjective F>
DualErrorBoundReport verify_dual_error_bound(const ProblemInstance<F>& inst, const SolverParams& params,
                                             Index n_samples, std::uint64_t rng_seed, double bound) {
  check_dimensions(inst);
  detail::require(params.p > inst.lipschitz_grad, ErrorKind::invalid_argument, "need p > L_f");
  detail::require(n_samples >= 1, ErrorKind::invalid_argument, "need at least one sample");
  DualErrorBoundReport rep;
  rep.bound = bound;
  rep.seed = rng_seed;
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const Vector center =
      inst.meta.x_feas ? *inst.meta.x_feas : project(inst.polyhedron, Vector::Zero(inst.n()), params.proj_tol).point;
  const double yscale = 1.0 + inst.objective.gradient(center).norm();
  const double scales[] = {0.1, 1.0, 10.0};
  const double tol = std::min(params.inner_tol, 1e-10);

  for (Index s = 0; s < n_samples; ++s) {
    const double sc = scales[s % 3];
    ErrorBoundSample smp;
    smp.y = Vector(inst.m());
    for (Index i = 0; i < inst.m(); ++i) smp.y[i] = sc * yscale * normal(rng);
    smp.z = center;
    for (Index i = 0; i < inst.n(); ++i) smp.z[i] += sc * normal(rng);
    try {
      const Vector x = inner_minimize_K(inst, smp.y, smp.z, params, tol).x;
      const ProxSolve ps = solve_constrained_strongly_convex(inst, smp.z, params, tol);
      smp.lhs = (x - ps.x).norm();
      smp.rhs_factor = (inst.A * x - inst.b).norm();
      smp.ratio = guarded_ratio(smp.lhs, smp.rhs_factor);
    } catch (const Error& e) {
      ++rep.skipped;
      rep.log.push_back("sample " + std::to_string(s) + " skipped: " + e.what());
      continue;
    }
    ++rep.samples;
    if (smp.ratio > bound) ++rep.violations;
    if (!rep.worst || smp.ratio > rep.max_ratio) {
      rep.max_ratio = smp.ratio;
      rep.worst = smp;
    }
  }
  if (rep.skipped * 10 > n_samples)
    throw Error(ErrorKind::iteration_limit,
                "dual error bound check skipped " + std::to_string(rep.skipped) + " of " + std::to_string(n_samples) +
                    " samples");
  rep.pass = rep.violations == 0;
  return rep;
}

struct HoffmanPoint {
  Vector point;
  double dist_sq = 0.0;
  double residual_sq = 0.0;
  double ratio = 0.0;  // dist^2 / (theta residual^2)
};

struct HoffmanReport {
  Index points = 0;
  double theta = 0.0;
  double max_ratio = 0.0;
  Index violations = 0;
  bool pass = true;
  std::uint64_t seed = 0;
  std::optional<HoffmanPoint> worst;
};

/// Euclidean projection onto {C1 x <= b1, C2 x = b2}: exact active-set
/// enumeration for small systems, the dual method on the equivalent
/// inequality system otherwise.
inline Vector project_onto_system(const LinearSystem& sys, const Vector& x) {
  const Index n = x.size();
  const Index l1 = sys.C1.rows(), l2 = sys.C2.rows();
  if (l1 <= 16) {
    SmallQp qp{Matrix::Identity(n, n), -x, l2 ? sys.C2 : Matrix(0, n), l2 ? sys.b2 : Vector(0),
               l1 ? sys.C1 : Matrix(0, n), l1 ? sys.b1 : Vector(0)};
    try {
      return solve_qp_enumeration(qp, nullptr, 1e-11).x;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::degenerate) throw Error(ErrorKind::infeasible, "linear system has no solution");
      throw;
    }
  }
  Matrix G(l1 + 2 * l2, n);
  Vector h(l1 + 2 * l2);
  G << sys.C1, sys.C2, -sys.C2;
  h << sys.b1, sys.b2, -sys.b2;
  return project(Polyhedron::general(G, h), x, 1e-12).point;
}

/// dist(x, S)^2 and the residual side at one point.
inline HoffmanPoint hoffman_point(const LinearSystem& sys, double theta, const Vector& x) {
  HoffmanPoint hp;
  hp.point = x;
  const Vector proj = project_onto_system(sys, x);
  hp.dist_sq = (proj - x).squaredNorm();
  hp.residual_sq = sys.residual_sq(x);
  const double rhs = theta * hp.residual_sq;
  hp.ratio = rhs > 1e-24 ? hp.dist_sq / rhs : (hp.dist_sq <= 1e-18 ? 0.0 : std::numeric_limits<double>::infinity());
  return hp;
}

inline bool hoffman_holds(const HoffmanPoint& hp, double theta) {
  return hp.dist_sq <= theta * hp.residual_sq * (1.0 + 1e-9) + 1e-18;
}

/// Random points around the origin at several scales; checks
/// dist(x, S)^2 <= theta (||(C1 x - b1)_+||^2 + ||C2 x - b2||^2).
inline HoffmanReport verify_hoffman(const LinearSystem& sys, double theta, Index n_points, std::uint64_t rng_seed) {
  const Index n = sys.dim();
  detail::require(n > 0, ErrorKind::invalid_argument, "empty linear system");
  detail::require((sys.C1.rows() == 0 || sys.C1.cols() == n) && (sys.C2.rows() == 0 || sys.C2.cols() == n) &&
                      sys.b1.size() == sys.C1.rows() && sys.b2.size() == sys.C2.rows(),
                  ErrorKind::dimension_mismatch, "inconsistent linear system shapes");
  HoffmanReport rep;
  rep.theta = theta;
  rep.seed = rng_seed;
  (void)project_onto_system(sys, Vector::Zero(n));  // throws when S is empty

  double spread = 1.0;
  if (sys.b1.size()) spread = std::max(spread, sys.b1.lpNorm<Eigen::Infinity>());
  if (sys.b2.size()) spread = std::max(spread, sys.b2.lpNorm<Eigen::Infinity>());
  std::mt19937_64 rng(rng_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scales[] = {0.5, 2.0, 8.0};
  for (Index k = 0; k < n_points; ++k) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = scales[k % 3] * spread * normal(rng);
    HoffmanPoint hp = hoffman_point(sys, theta, x);
    ++rep.points;
    if (!hoffman_holds(hp, theta)) ++rep.violations;
    if (!rep.worst || hp.ratio > rep.max_ratio) {
      rep.max_ratio = hp.ratio;
      rep.worst = hp;
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

}  // namespace sprox
