#pragma once

#include "sprox/polyhedron.hpp"

#include <limits>
#include <vector>

namespace sprox {

struct ProjectionResult {
  Vector point;
  Vector multipliers;  // length l for a general polyhedron, empty for a box
  double residual = 0.0;
  Index iterations = 0;
};

namespace detail {

/// max(||(Gu - h)_+||_inf, max_i |mu_i (Gu - h)_i|). Stationarity u = x - G^T mu
/// and mu >= 0 hold by construction, so this is the whole KKT residual.
inline double projection_kkt_residual(const Vector& slack, const Vector& mu) {
  double r = 0.0;
  for (Index i = 0; i < slack.size(); ++i) r = std::max({r, slack[i], std::abs(mu[i] * slack[i])});
  return r;
}

/// Solves the projection with the rows in `support` held at equality. Returns
/// false when the resulting multipliers are not all nonnegative.
inline bool polish_projection(const Matrix& G, const Vector& h, const Vector& x,
                              const std::vector<Index>& support, Vector& mu) {
  const Index k = static_cast<Index>(support.size());
  Vector m = Vector::Zero(G.rows());
  if (k > 0) {
    Matrix Ga(k, G.cols());
    Vector ha(k);
    for (Index j = 0; j < k; ++j) {
      Ga.row(j) = G.row(support[j]);
      ha[j] = h[support[j]];
    }
    Matrix gram = Ga * Ga.transpose();
    Vector ma = gram.completeOrthogonalDecomposition().solve(Ga * x - ha);
    for (Index j = 0; j < k; ++j) {
      if (ma[j] < 0) return false;
      m[support[j]] = ma[j];
    }
  }
  mu = m;
  return true;
}

}  // namespace detail

/// Euclidean projection onto P. A box is clamped exactly. A general
/// polyhedron is handled by accelerated projected gradient ascent on the dual
///   max_{mu >= 0}  -1/2 ||G^T mu||^2 + mu^T (Gx - h),   u = x - G^T mu,
/// with step 1/||G||^2. Every so often the support of mu is polished by an
/// equality-constrained solve, which usually lands on the exact answer.
/// `warm_mu` may seed the dual iterate.
inline ProjectionResult project(const Polyhedron& P, const Vector& x, double tol = 1e-10,
                                const Vector* warm_mu = nullptr, Index max_iters = 200000) {
  detail::require(tol > 0, ErrorKind::invalid_argument, "projection tol must be positive");
  detail::require(x.size() == P.dim(), ErrorKind::dimension_mismatch, "point dimension differs from P");
  detail::require(x.allFinite(), ErrorKind::non_finite, "projection input is not finite");

  ProjectionResult out;
  if (P.is_box()) {
    const Box& b = P.as_box();
    out.point = x.cwiseMax(b.lo).cwiseMin(b.hi);
    return out;
  }

  const Matrix& G = P.G();
  const Vector& h = P.h();
  const Index l = G.rows();
  if (l == 0) {
    out.point = x;
    out.multipliers = Vector::Zero(0);
    return out;
  }
  if (P.G_norm_sq() == 0.0) {
    // all rows zero: P is R^n or empty
    detail::require(h.minCoeff() >= 0, ErrorKind::infeasible, "polyhedron is empty");
    out.point = x;
    out.multipliers = Vector::Zero(l);
    return out;
  }

  const double step = 1.0 / P.G_norm_sq();
  const Vector Gx = G * x;

  auto evaluate = [&](const Vector& mu, Vector& u, Vector& slack) {
    u = x - G.transpose() * mu;
    slack = Gx - G * (G.transpose() * mu) - h;
  };

  Vector mu = Vector::Zero(l);
  if (warm_mu && warm_mu->size() == l) mu = warm_mu->cwiseMax(0.0);

  Vector u, slack;
  Vector best_u;
  double best_res = std::numeric_limits<double>::infinity();

  auto try_polish = [&](const Vector& guess, Index iters) -> bool {
    Vector gu, gs;
    evaluate(guess, gu, gs);
    std::vector<Index> support;
    const double band = 1e-9 * (1.0 + h.lpNorm<Eigen::Infinity>());
    for (Index i = 0; i < l; ++i)
      if (guess[i] > 0 || gs[i] > -band) support.push_back(i);
    Vector cand;
    if (!detail::polish_projection(G, h, x, support, cand)) return false;
    evaluate(cand, gu, gs);
    const double res = detail::projection_kkt_residual(gs, cand);
    if (res <= tol) {
      out.point = gu;
      out.multipliers = cand;
      out.residual = res;
      out.iterations = iters;
      return true;
    }
    return false;
  };

  if (try_polish(mu, 0)) return out;

  Vector w = mu, mu_prev = mu;
  double tk = 1.0;
  Index next_polish = 8;
  for (Index it = 1; it <= max_iters; ++it) {
    Vector wu, ws;
    evaluate(w, wu, ws);
    mu_prev = mu;
    mu = (w + step * ws).cwiseMax(0.0);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    w = mu + ((tk - 1.0) / tn) * (mu - mu_prev);
    tk = tn;

    evaluate(mu, u, slack);
    const double res = detail::projection_kkt_residual(slack, mu);
    if (res < best_res) {
      best_res = res;
      best_u = u;
    }
    if (res <= tol) {
      out.point = u;
      out.multipliers = mu;
      out.residual = res;
      out.iterations = it;
      return out;
    }
    if (it == next_polish) {
      if (try_polish(mu, it)) return out;
      next_polish *= 2;
    }
  }
  throw IterationLimitError("projection did not reach tol " + std::to_string(tol), best_u, best_res);
}

}  // namespace sprox
