#pragma once

#include "sprox/core.hpp"
#include "sprox/linalg.hpp"
#include "sprox/polyhedron.hpp"

#include <concepts>
#include <cstdint>
#include <optional>
#include <random>

namespace sprox {

/// A differentiable objective: value and gradient at any x in R^n.
template <class F>
concept SmoothObjective = requires(const F& f, const Vector& x) {
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::convertible_to<Vector>;
};

/// Objectives that expose a constant Hessian (quadratics).
template <class F>
concept HasHessian = SmoothObjective<F> && requires(const F& f) {
  { f.hessian() } -> std::convertible_to<Matrix>;
};

/// f(x) = 1/2 x^T Q x + q^T x + offset with Q symmetric, possibly indefinite.
struct QuadraticObjective {
  Matrix Q;
  Vector q;
  double offset = 0.0;

  double value(const Vector& x) const { return 0.5 * x.dot(Q * x) + q.dot(x) + offset; }
  Vector gradient(const Vector& x) const { return Q * x + q; }
  const Matrix& hessian() const { return Q; }
  Index dim() const { return q.size(); }

  /// Lipschitz constant of the gradient, sigma_max(Q).
  double lipschitz() const { return spectral_norm(Q); }
};

enum class LowerBoundKind { estimate, certified };

inline const char* to_string(LowerBoundKind k) {
  return k == LowerBoundKind::certified ? "certified" : "estimate";
}

/// Lower bound on f over the feasible set. Only a certified bound is a real
/// bound; an estimate comes from sampling and may be too high.
struct LowerBound {
  double value = 0.0;
  LowerBoundKind kind = LowerBoundKind::estimate;
};

struct InstanceMeta {
  std::optional<std::uint64_t> seed;
  std::optional<Vector> x_feas;
};

/// minimize f(x) subject to Ax = b, x in P.
template <SmoothObjective F = QuadraticObjective>
struct ProblemInstance {
  F objective;
  double lipschitz_grad = 0.0;
  Matrix A;
  Vector b;
  Polyhedron polyhedron;
  std::optional<LowerBound> lower_bound;
  InstanceMeta meta;

  Index n() const { return polyhedron.dim(); }
  Index m() const { return A.rows(); }
  Index l() const { return polyhedron.num_inequalities(); }
  bool has_certified_lower_bound() const {
    return lower_bound && lower_bound->kind == LowerBoundKind::certified;
  }
};

using QpInstance = ProblemInstance<QuadraticObjective>;

/// Throws ErrorKind::dimension_mismatch on any inconsistent shape.
template <SmoothObjective F>
void check_dimensions(const ProblemInstance<F>& inst) {
  const Index n = inst.n();
  auto mismatch = [](const std::string& what) { throw Error(ErrorKind::dimension_mismatch, what); };
  if (inst.A.cols() != n)
    mismatch("A has " + std::to_string(inst.A.cols()) + " columns, expected n = " + std::to_string(n));
  if (inst.b.size() != inst.A.rows())
    mismatch("A has " + std::to_string(inst.A.rows()) + " rows but b has length " +
             std::to_string(inst.b.size()));
  if constexpr (HasHessian<F>) {
    const Matrix& Q = inst.objective.hessian();
    if (Q.rows() != n || Q.cols() != n) mismatch("Q is not n x n");
  }
  if constexpr (requires { inst.objective.dim(); }) {
    if (inst.objective.dim() != n) mismatch("objective dimension differs from n");
  }
  if (inst.meta.x_feas && inst.meta.x_feas->size() != n) mismatch("x_feas has wrong length");
  detail::require(inst.lipschitz_grad > 0, ErrorKind::invalid_argument, "L_f must be positive");
}

struct ValidationReport {
  double max_ratio = 0.0;  // max sampled ||grad f(x) - grad f(x')|| / ||x - x'||
  Index pairs = 0;
  bool lipschitz_violation = false;
  std::optional<double> min_sampled_f;  // over sampled feasible points
  bool lower_bound_violation = false;   // min_sampled_f < f_lower
};

namespace detail {

/// Random point of P: uniform along bounded box coordinates, half-normal or
/// normal along unbounded ones. General polyhedra sample a Gaussian step from
/// `center` and shrink it until the point is feasible.
template <class Rng>
Vector sample_in_polyhedron(const Polyhedron& P, Rng& rng, const Vector& center, double scale) {
  const Index n = P.dim();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector x(n);
  if (P.is_box()) {
    const Box& b = P.as_box();
    for (Index i = 0; i < n; ++i) {
      const bool flo = std::isfinite(b.lo[i]), fhi = std::isfinite(b.hi[i]);
      if (flo && fhi) x[i] = b.lo[i] + unif(rng) * (b.hi[i] - b.lo[i]);
      else if (flo) x[i] = b.lo[i] + scale * std::abs(normal(rng));
      else if (fhi) x[i] = b.hi[i] - scale * std::abs(normal(rng));
      else x[i] = center[i] + scale * normal(rng);
    }
    return x;
  }
  Vector d(n);
  for (Index i = 0; i < n; ++i) d[i] = scale * normal(rng);
  for (int k = 0; k < 60; ++k) {
    x = center + d;
    if (P.contains(x, 0.0)) return x;
    d *= 0.5;
  }
  return center;
}

}  // namespace detail

/// Samples pairs in P to check the declared L_f, and feasible points to
/// compare against f_lower when one is set.
template <SmoothObjective F>
ValidationReport validate_instance(const ProblemInstance<F>& inst, Index samples, std::uint64_t rng_seed) {
  check_dimensions(inst);
  detail::require(samples >= 1, ErrorKind::invalid_argument, "samples must be >= 1");
  const Index n = inst.n();
  std::mt19937_64 rng(rng_seed);
  ValidationReport rep;

  const Vector center = inst.meta.x_feas ? *inst.meta.x_feas : Vector::Zero(n);

  for (Index s = 0; s < samples; ++s) {
    Vector x = detail::sample_in_polyhedron(inst.polyhedron, rng, center, 1.0);
    Vector xp = detail::sample_in_polyhedron(inst.polyhedron, rng, center, 1.0);
    const double dx = (x - xp).norm();
    if (dx < 1e-14) continue;
    const double ratio = (inst.objective.gradient(x) - inst.objective.gradient(xp)).norm() / dx;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
    ++rep.pairs;
  }
  rep.lipschitz_violation = rep.max_ratio > inst.lipschitz_grad * (1.0 + 1e-9);

  if (inst.meta.x_feas) {
    const Vector& x0 = *inst.meta.x_feas;
    Matrix N = null_space(inst.A);
    std::normal_distribution<double> normal(0.0, 1.0);
    double fmin = inst.objective.value(x0);
    for (Index s = 0; s < samples && N.cols() > 0; ++s) {
      Vector coef(N.cols());
      for (Index j = 0; j < coef.size(); ++j) coef[j] = normal(rng);
      Vector d = N * coef;
      for (int k = 0; k < 60; ++k) {
        Vector x = x0 + d;
        if (inst.polyhedron.contains(x, 0.0)) {
          fmin = std::min(fmin, inst.objective.value(x));
          break;
        }
        d *= 0.5;
      }
    }
    rep.min_sampled_f = fmin;
    if (inst.lower_bound) rep.lower_bound_violation = fmin < inst.lower_bound->value;
  }
  return rep;
}

/// f(x) = x^2/2, A = [1], b = 0, P = R. Unique KKT point x* = 0, y* = 0.
inline QpInstance fixed_instance_1d() {
  QpInstance inst;
  inst.objective = QuadraticObjective{Matrix::Identity(1, 1), Vector::Zero(1), 0.0};
  inst.lipschitz_grad = 1.0;
  inst.A = Matrix::Identity(1, 1);
  inst.b = Vector::Zero(1);
  inst.polyhedron = Polyhedron::unbounded(1);
  inst.lower_bound = LowerBound{0.0, LowerBoundKind::certified};
  inst.meta.x_feas = Vector::Zero(1);
  return inst;
}

/// Valid lower bound of a quadratic over a bounded box, by bounding each
/// diagonal term and each bilinear term separately. Ignores Ax = b.
inline double box_interval_lower_bound(const QuadraticObjective& f, const Box& box) {
  const Index n = f.q.size();
  for (Index i = 0; i < n; ++i)
    detail::require(std::isfinite(box.lo[i]) && std::isfinite(box.hi[i]), ErrorKind::invalid_argument,
                    "interval bound needs a bounded box");
  double total = f.offset;
  for (Index i = 0; i < n; ++i) {
    // 1/2 Q_ii t^2 + q_i t over [lo, hi]
    const double a = 0.5 * f.Q(i, i), c = f.q[i];
    auto g = [&](double t) { return a * t * t + c * t; };
    double best = std::min(g(box.lo[i]), g(box.hi[i]));
    if (a > 0) {
      const double t = std::clamp(-c / (2 * a), box.lo[i], box.hi[i]);
      best = std::min(best, g(t));
    }
    total += best;
    for (Index j = i + 1; j < n; ++j) {
      // bilinear term s x_i x_j attains its box minimum at a corner
      const double s = 0.5 * (f.Q(i, j) + f.Q(j, i));
      if (s == 0.0) continue;
      double mn = std::numeric_limits<double>::infinity();
      for (double xi : {box.lo[i], box.hi[i]})
        for (double xj : {box.lo[j], box.hi[j]}) mn = std::min(mn, s * xi * xj);
      total += mn;
    }
  }
  return total;
}

/// Replaces the instance's f_lower by a certified bound when the objective is
/// a quadratic over a bounded box. Returns whether it did.
inline bool certify_lower_bound(QpInstance& inst) {
  if (!inst.polyhedron.is_box()) return false;
  const Box& b = inst.polyhedron.as_box();
  if (!b.lo.allFinite() || !b.hi.allFinite()) return false;
  inst.lower_bound = LowerBound{box_interval_lower_bound(inst.objective, b), LowerBoundKind::certified};
  return true;
}

}  // namespace sprox
