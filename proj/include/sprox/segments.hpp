#pragma once

#include "sprox/constants.hpp"
#include "sprox/qp_enumeration.hpp"
#include "sprox/problem.hpp"

#include <set>
#include <vector>

namespace sprox {

/// Solution of min g(x) s.t. Ax - b = s r_tilde, x in P at one s, with its
/// multipliers and the rows binding within the active tolerance.
struct SegmentPoint {
  double s = 0.0;
  Vector x;
  Vector y;
  Vector mu;
  std::vector<Index> binding;
};

/// Consecutive breakpoints eta_{i-1} < eta_i and the checks along them.
struct SegmentPiece {
  double eta_lo = 0.0;
  double eta_hi = 0.0;
  bool share = false;  // the two ends share an active set
  double dx = 0.0;     // ||x*(r_i) - x*(r_{i-1})||
  double dr = 0.0;     // ||r_i - r_{i-1}||, measured
  double dist_M = 0.0; // distance from (y_i, mu_i) to the multiplier set at r_{i-1}
  bool lipschitz_ok = true;
  bool multiplier_ok = true;
};

struct SegmentTrace {
  Vector y_tilde;
  Vector x_tilde;  // x(y_tilde)
  Vector r_tilde;
  Vector x_star;   // x*(0)
  double sigma5 = 0.0;
  double theta = 0.0;
  bool theta_exact = false;
  std::vector<double> grid;
  std::vector<SegmentPoint> points;  // one per grid value
  std::vector<double> etas;          // 0 = eta_0 < ... < eta_R = 1
  std::vector<double> breakpoints;   // interior etas
  std::vector<SegmentPiece> pieces;
  Index distinct_active_sets = 0;
  Index grid_pairs_checked = 0;
  Index grid_pair_violations = 0;
  double telescoped = 0.0;  // sum of ||r_i - r_{i-1}||
  double r_norm = 0.0;      // ||A x(y_tilde) - b||
  double path_length = 0.0; // sum of ||x*(r_i) - x*(r_{i-1})||
  double endpoint_gap = 0.0;  // ||x(y_tilde) - x*(r_tilde)||
  bool telescoping_ok = true;
  bool triangle_ok = true;
  bool finite_ok = true;
  bool pass = true;
};

namespace detail {

class SegmentSolver {
 public:
  SegmentSolver(const QpInstance& g, double active_tol) : g_(g), active_tol_(active_tol) {
    const Index n = g.n();
    G_ = g.polyhedron.num_inequalities() ? g.polyhedron.G() : Matrix(0, n);
    h_ = g.polyhedron.num_inequalities() ? g.polyhedron.h() : Vector(0);
  }

  SegmentPoint solve(double s, const Vector& r_tilde) {
    SmallQp qp{g_.objective.Q, g_.objective.q, g_.A, g_.b + s * r_tilde, G_, h_};
    SmallQpSolution sol;
    try {
      sol = solve_qp_enumeration(qp, hint_ ? &*hint_ : nullptr, 1e-10);
    } catch (const Error& e) {
      throw Error(ErrorKind::degenerate, "no valid active set at s = " + std::to_string(s) + ": " + e.what());
    }
    hint_ = sol.active;
    SegmentPoint pt;
    pt.s = s;
    pt.x = sol.x;
    pt.y = sol.lambda;
    pt.mu = sol.mu;
    const Vector slack = G_.rows() ? Vector(G_ * pt.x - h_) : Vector(0);
    for (Index i = 0; i < slack.size(); ++i)
      if (slack[i] >= -active_tol_) pt.binding.push_back(i);
    return pt;
  }

  /// J is an active set at pt iff some (y, mu_J >= 0) satisfies stationarity.
  bool valid(const SegmentPoint& pt, const std::vector<Index>& J) const {
    const Vector grad = g_.objective.gradient(pt.x);
    Matrix C(pt.x.size(), static_cast<Index>(J.size()));
    for (size_t j = 0; j < J.size(); ++j) C.col(j) = G_.row(J[j]).transpose();
    const Matrix At = g_.A.transpose();
    MixedLsResult ls = mixed_least_squares(At, C, -grad);
    return ls.residual <= 1e-8 * (1.0 + grad.norm());
  }

  bool share(const SegmentPoint& a, const SegmentPoint& b) const {
    std::vector<Index> J;
    std::set_intersection(a.binding.begin(), a.binding.end(), b.binding.begin(), b.binding.end(),
                          std::back_inserter(J));
    return valid(a, J) && valid(b, J);
  }

  /// Distance from (y', mu') to M(r) = {(y, mu) : A^T y + G^T mu = -grad g(x*(r)),
  /// mu >= 0 on binding rows, mu = 0 elsewhere}.
  double multiplier_distance(const SegmentPoint& from, const SegmentPoint& at) const {
    const Index m = g_.m(), l = G_.rows(), n = at.x.size();
    const Index nb = static_cast<Index>(at.binding.size());
    const Index dim = m + l;
    Vector w(dim);
    w << from.y, from.mu;
    Matrix E = Matrix::Zero(n + (l - nb), dim);
    Vector e = Vector::Zero(n + (l - nb));
    E.topLeftCorner(n, m) = g_.A.transpose();
    if (l) E.block(0, m, n, l) = G_.transpose();
    e.head(n) = -g_.objective.gradient(at.x);
    Matrix C = Matrix::Zero(nb, dim);
    std::vector<bool> is_binding(l, false);
    for (Index j = 0; j < nb; ++j) {
      is_binding[at.binding[j]] = true;
      C(j, m + at.binding[j]) = -1.0;
    }
    for (Index j = 0, r = n; j < l; ++j)
      if (!is_binding[j]) E(r++, m + j) = 1.0;
    SmallQp qp{Matrix::Identity(dim, dim), -w, E, e, C, Vector::Zero(nb)};
    const SmallQpSolution sol = solve_qp_enumeration(qp, nullptr, 1e-9);
    return (sol.x - w).norm();
  }

 private:
  const QpInstance& g_;
  double active_tol_;
  Matrix G_;
  Vector h_;
  std::optional<std::vector<Index>> hint_;
};

}  // namespace detail

/// g(x) = f(x) + p/2 ||x - z||^2 as a quadratic with the same constraints.
inline QpInstance prox_instance(const QpInstance& inst, double p, const Vector& z) {
  QpInstance g = inst;
  const Index n = inst.n();
  g.objective.Q = inst.objective.Q + p * Matrix::Identity(n, n);
  g.objective.q = inst.objective.q - p * z;
  g.objective.offset = inst.objective.offset + 0.5 * p * z.squaredNorm();
  g.lipschitz_grad = inst.lipschitz_grad + p;
  g.lower_bound.reset();
  return g;
}

/// Follows x*(s r_tilde) for s in [0, 1], where r_tilde = A x(y_tilde) - b and
/// x(y) minimizes g(x) + y^T(Ax - b) over P. Splits [0, 1] into pieces whose
/// ends share an active set (grid scan plus bisection to 1e-8) and checks the
/// Lipschitz bound on each piece, the telescoping of ||r_i - r_{i-1}|| and the
/// triangle inequality for ||x(y_tilde) - x*||.
inline SegmentTrace trace_segment_decomposition(const QpInstance& g, const Vector& y_tilde, Index grid_size = 1001,
                                                Index exact_limit = 20) {
  check_dimensions(g);
  detail::require(grid_size >= 2, ErrorKind::invalid_argument, "grid needs at least two points");
  detail::require(y_tilde.size() == g.m(), ErrorKind::dimension_mismatch, "y_tilde has wrong length");
  detail::require(g.n() <= 12 && g.l() <= 12, ErrorKind::invalid_argument,
                  "segment tracing is brute force: needs n <= 12 and l <= 12");
  const Matrix Qs = 0.5 * (g.objective.Q + g.objective.Q.transpose());
  const auto [gamma, Lg] = eigen_range(Qs);
  detail::require(gamma > 0, ErrorKind::invalid_argument, "g must be strongly convex");

  SegmentTrace tr;
  tr.y_tilde = y_tilde;
  const Index n = g.n();
  const Matrix G = g.l() ? g.polyhedron.G() : Matrix(0, n);
  const Vector h = g.l() ? g.polyhedron.h() : Vector(0);
  const HoffmanResult hr = hoffman_constant(g.A, G, exact_limit);
  tr.theta = hr.theta;
  tr.theta_exact = hr.exact;
  tr.sigma5 = sigma5_bar(hr.theta, Lg, gamma);

  {
    SmallQp qp{g.objective.Q, g.objective.q + g.A.transpose() * y_tilde, Matrix(0, n), Vector(0), G, h};
    tr.x_tilde = solve_qp_enumeration(qp, nullptr, 1e-10).x;
  }
  tr.r_tilde = g.A * tr.x_tilde - g.b;
  tr.r_norm = tr.r_tilde.norm();

  const double active_tol = 1e-7 * (1.0 + (h.size() ? h.lpNorm<Eigen::Infinity>() : 0.0));
  detail::SegmentSolver solver(g, active_tol);
  const double tol = 1e-9;

  std::set<std::vector<Index>> sets;
  for (Index k = 0; k < grid_size; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(grid_size - 1);
    tr.grid.push_back(s);
    tr.points.push_back(solver.solve(s, tr.r_tilde));
    sets.insert(tr.points.back().binding);
  }
  tr.x_star = tr.points.front().x;

  // adjacent grid points that share an active set obey the Lipschitz bound
  for (Index k = 1; k < grid_size; ++k) {
    const SegmentPoint& a = tr.points[k - 1];
    const SegmentPoint& b = tr.points[k];
    if (!solver.share(a, b)) continue;
    ++tr.grid_pairs_checked;
    const double dr = (g.A * (b.x - a.x)).norm();
    if ((b.x - a.x).norm() > tr.sigma5 * dr + tol) ++tr.grid_pair_violations;
  }

  // largest-eta construction on the grid, refined by bisection
  std::vector<SegmentPoint> chain{tr.points.front()};
  Index k = 1;
  while (k < grid_size) {
    const SegmentPoint& start = chain.back();
    if (solver.share(start, tr.points[k])) {
      ++k;
      continue;
    }
    double lo = std::max(start.s, tr.grid[k - 1]);
    double hi = tr.grid[k];
    SegmentPoint lo_pt = lo == start.s ? start : tr.points[k - 1];
    if (!solver.share(start, lo_pt)) lo_pt = start, lo = start.s;
    while (hi - lo > 1e-8) {
      const double mid = 0.5 * (lo + hi);
      SegmentPoint mp = solver.solve(mid, tr.r_tilde);
      sets.insert(mp.binding);
      if (solver.share(start, mp)) {
        lo = mid;
        lo_pt = std::move(mp);
      } else {
        hi = mid;
      }
    }
    if (lo > start.s) {
      chain.push_back(std::move(lo_pt));
    } else {
      // no progress: take the far end and let the piece record the failure
      SegmentPoint hp = solver.solve(hi, tr.r_tilde);
      sets.insert(hp.binding);
      chain.push_back(std::move(hp));
    }
  }
  if (chain.back().s < 1.0) chain.push_back(tr.points.back());

  tr.distinct_active_sets = static_cast<Index>(sets.size());
  for (const SegmentPoint& pt : chain) tr.etas.push_back(pt.s);
  for (size_t i = 1; i + 1 < chain.size(); ++i) tr.breakpoints.push_back(chain[i].s);

  for (size_t i = 1; i < chain.size(); ++i) {
    const SegmentPoint& a = chain[i - 1];
    const SegmentPoint& b = chain[i];
    SegmentPiece pc;
    pc.eta_lo = a.s;
    pc.eta_hi = b.s;
    pc.share = solver.share(a, b);
    pc.dx = (b.x - a.x).norm();
    pc.dr = (g.A * (b.x - a.x)).norm();
    pc.lipschitz_ok = pc.share && pc.dx <= tr.sigma5 * pc.dr + tol;
    pc.dist_M = solver.multiplier_distance(b, a);
    pc.multiplier_ok = pc.dist_M + pc.dx <= tr.sigma5 * pc.dr + tol;
    tr.telescoped += pc.dr;
    tr.path_length += pc.dx;
    tr.pieces.push_back(pc);
  }

  tr.endpoint_gap = (tr.x_tilde - tr.points.back().x).norm();
  tr.telescoping_ok = std::abs(tr.telescoped - tr.r_norm) <= 1e-10 * std::max(1.0, tr.r_norm);
  tr.triangle_ok = (tr.x_tilde - tr.x_star).norm() <= tr.path_length + tr.endpoint_gap + tol;
  tr.finite_ok = tr.distinct_active_sets <= (Index{1} << g.l()) &&
                 static_cast<Index>(tr.breakpoints.size()) <= tr.distinct_active_sets;
  tr.pass = tr.telescoping_ok && tr.triangle_ok && tr.finite_ok && tr.grid_pair_violations == 0 &&
            tr.endpoint_gap <= 1e-8;
  for (const SegmentPiece& pc : tr.pieces) tr.pass = tr.pass && pc.lipschitz_ok && pc.multiplier_ok;
  return tr;
}

}  // namespace sprox
