#pragma once

#include "sprox/linalg.hpp"

#include <algorithm>
#include <bit>
#include <optional>
#include <vector>

namespace sprox {

/// minimize 1/2 x^T H x + g^T x  subject to  E x = e,  C x <= d,  H positive definite.
struct SmallQp {
  Matrix H;
  Vector g;
  Matrix E;
  Vector e;
  Matrix C;
  Vector d;
};

struct SmallQpSolution {
  Vector x;
  Vector lambda;  // equality multipliers
  Vector mu;      // inequality multipliers, >= 0
  std::vector<Index> active;  // rows held at equality in the winning candidate
  double objective = 0.0;
  Index candidates = 0;  // active sets tried
};

namespace detail {

inline double qp_scale(const SmallQp& qp) {
  double s = 1.0;
  if (qp.e.size()) s = std::max(s, qp.e.lpNorm<Eigen::Infinity>());
  if (qp.d.size()) s = std::max(s, qp.d.lpNorm<Eigen::Infinity>());
  if (qp.g.size()) s = std::max(s, qp.g.lpNorm<Eigen::Infinity>());
  return s;
}

/// KKT point for the rows in S held at equality, if x is feasible and some
/// multipliers with mu >= 0 on the binding rows exist.
inline bool try_active_set(const SmallQp& qp, const std::vector<Index>& S, double tol, SmallQpSolution& out) {
  const Index n = qp.H.rows(), me = qp.E.rows(), k = static_cast<Index>(S.size());
  const Index dim = n + me + k;
  Matrix K = Matrix::Zero(dim, dim);
  Vector rhs(dim);
  K.topLeftCorner(n, n) = qp.H;
  rhs.head(n) = -qp.g;
  if (me > 0) {
    K.block(0, n, n, me) = qp.E.transpose();
    K.block(n, 0, me, n) = qp.E;
    rhs.segment(n, me) = qp.e;
  }
  for (Index j = 0; j < k; ++j) {
    K.block(0, n + me + j, n, 1) = qp.C.row(S[j]).transpose();
    K.block(n + me + j, 0, 1, n) = qp.C.row(S[j]);
    rhs[n + me + j] = qp.d[S[j]];
  }
  const double scale = qp_scale(qp);
  Vector sol;
  if (me + k == 0) {
    sol = qp.H.llt().solve(rhs);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
    sol = cod.solve(rhs);
    if ((K * sol - rhs).lpNorm<Eigen::Infinity>() > tol * scale) return false;  // inconsistent
  }
  const Vector x = sol.head(n);
  if (qp.C.rows() > 0 && (qp.C * x - qp.d).maxCoeff() > tol * scale) return false;

  Vector mu = Vector::Zero(qp.C.rows());
  for (Index j = 0; j < k; ++j) mu[S[j]] = sol[n + me + j];
  Vector lambda = sol.segment(n, me);
  bool signs_ok = true;
  for (Index j = 0; j < k; ++j)
    if (mu[S[j]] < -tol * scale) signs_ok = false;
  if (!signs_ok) {
    // degenerate rows can hide a valid multiplier; look for one over the binding rows
    std::vector<Index> binding;
    const Vector slack = qp.C * x - qp.d;
    for (Index i = 0; i < slack.size(); ++i)
      if (slack[i] >= -tol * scale) binding.push_back(i);
    Matrix Cb(n, static_cast<Index>(binding.size()));
    for (size_t j = 0; j < binding.size(); ++j) Cb.col(j) = qp.C.row(binding[j]).transpose();
    const Matrix Et = me > 0 ? Matrix(qp.E.transpose()) : Matrix(n, 0);
    MixedLsResult ls = mixed_least_squares(Et, Cb, -(qp.H * x + qp.g));
    if (ls.residual > tol * scale) return false;
    lambda = ls.free;
    mu.setZero();
    for (size_t j = 0; j < binding.size(); ++j) mu[binding[j]] = ls.nonneg[j];
  } else {
    mu = mu.cwiseMax(0.0);
  }
  out.x = x;
  out.lambda = lambda;
  out.mu = mu;
  out.active = S;
  out.objective = 0.5 * x.dot(qp.H * x) + qp.g.dot(x);
  return true;
}

}  // namespace detail

/// Exact solve by enumerating active sets, smallest first. Strong convexity
/// makes the first KKT point found the minimizer. A hint (for instance the
/// active set of a nearby problem) is tried before anything else.
inline SmallQpSolution solve_qp_enumeration(const SmallQp& qp, const std::vector<Index>* hint = nullptr,
                                            double tol = 1e-9) {
  const Index n = qp.H.rows(), l = qp.C.rows();
  detail::require(qp.g.size() == n && (qp.E.rows() == 0 || qp.E.cols() == n) && qp.e.size() == qp.E.rows() &&
                      qp.d.size() == l && (l == 0 || qp.C.cols() == n),
                  ErrorKind::dimension_mismatch, "inconsistent QP shapes");
  detail::require(l <= 24, ErrorKind::invalid_argument, "too many inequalities for enumeration");
  SmallQpSolution out;
  if (hint) {
    ++out.candidates;
    if (detail::try_active_set(qp, *hint, tol, out)) return out;
  }
  std::vector<std::uint32_t> masks(std::size_t{1} << l);
  for (std::uint32_t s = 0; s < masks.size(); ++s) masks[s] = s;
  std::stable_sort(masks.begin(), masks.end(),
                   [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) < std::popcount(b); });
  std::vector<Index> S;
  for (std::uint32_t mask : masks) {
    if (std::popcount(mask) > n) break;  // more than n independent rows cannot all bind
    S.clear();
    for (Index i = 0; i < l; ++i)
      if (mask >> i & 1) S.push_back(i);
    ++out.candidates;
    if (detail::try_active_set(qp, S, tol, out)) return out;
  }
  throw Error(ErrorKind::degenerate, "no active set yields a feasible KKT point (problem may be infeasible)");
}

}  // namespace sprox
