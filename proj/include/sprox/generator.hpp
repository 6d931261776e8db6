#pragma once

#include "sprox/problem.hpp"

#include <cstdint>
#include <random>

namespace sprox {

struct QpGeneratorSpec {
  Index n = 10;
  Index m = 3;
  double lo = 0.0;  // box is [lo, hi]^n
  double hi = 1.0;
  Index neg_eigs = 1;
  std::uint64_t seed = 0;
};

/// Random nonconvex QP over a box with linear equalities.
///
/// Q = U diag(lambda) U^T with U Haar-orthogonal and exactly `neg_eigs`
/// eigenvalues in [-1, -0.1], the rest in [0.1, 1]. A is Gaussian and redrawn
/// until it has full row rank. b = A x_feas for x_feas strictly inside the
/// box, so the feasible set is nonempty. f_lower is the sampled minimum over
/// box corners and feasible points minus a margin, labeled as an estimate.
inline QpInstance generate_nonconvex_qp(const QpGeneratorSpec& spec) {
  const Index n = spec.n, m = spec.m;
  detail::require(m > 0 && m < n, ErrorKind::invalid_argument,
                  "need 0 < m < n for a full-row-rank A (got m = " + std::to_string(m) +
                      ", n = " + std::to_string(n) + ")");
  detail::require(spec.neg_eigs >= 0 && spec.neg_eigs < n, ErrorKind::invalid_argument,
                  "neg_eigs must be in [0, n)");
  detail::require(std::isfinite(spec.lo) && std::isfinite(spec.hi) && spec.lo < spec.hi,
                  ErrorKind::invalid_argument, "box must be bounded with lo < hi");

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto gaussian = [&](Index r, Index c) {
    Matrix M(r, c);
    for (Index j = 0; j < c; ++j)
      for (Index i = 0; i < r; ++i) M(i, j) = normal(rng);
    return M;
  };

  Eigen::HouseholderQR<Matrix> qr(gaussian(n, n));
  Matrix U = qr.householderQ();
  Vector eig(n);
  for (Index i = 0; i < n; ++i) {
    const double mag = 0.1 + 0.9 * unif(rng);
    eig[i] = i < spec.neg_eigs ? -mag : mag;
  }
  Matrix Q = U * eig.asDiagonal() * U.transpose();
  Q = 0.5 * (Q + Q.transpose()).eval();

  Vector q(n);
  for (Index i = 0; i < n; ++i) q[i] = normal(rng);

  Matrix A;
  for (;;) {
    A = gaussian(m, n);
    Eigen::JacobiSVD<Matrix> svd(A);
    const auto& s = svd.singularValues();
    if (s[m - 1] > 1e-6 * s[0]) break;
  }

  Vector x_feas(n);
  for (Index i = 0; i < n; ++i) x_feas[i] = spec.lo + (0.1 + 0.8 * unif(rng)) * (spec.hi - spec.lo);

  QpInstance inst;
  inst.objective = QuadraticObjective{Q, q, 0.0};
  inst.lipschitz_grad = spectral_norm(Q);
  inst.A = A;
  inst.b = A * x_feas;
  inst.polyhedron = Polyhedron::box(Vector::Constant(n, spec.lo), Vector::Constant(n, spec.hi));
  inst.meta.seed = spec.seed;
  inst.meta.x_feas = x_feas;

  // Sampled estimate of the minimum: box corners (all of them up to n = 12,
  // a random subset beyond) and feasible points around x_feas.
  double fmin = inst.objective.value(x_feas);
  Vector corner(n);
  if (n <= 12) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      for (Index i = 0; i < n; ++i) corner[i] = (mask >> i) & 1 ? spec.hi : spec.lo;
      fmin = std::min(fmin, inst.objective.value(corner));
    }
  } else {
    for (int k = 0; k < 4096; ++k) {
      for (Index i = 0; i < n; ++i) corner[i] = unif(rng) < 0.5 ? spec.lo : spec.hi;
      fmin = std::min(fmin, inst.objective.value(corner));
    }
  }
  Matrix N = null_space(A);
  for (int k = 0; k < 1000; ++k) {
    Vector coef(N.cols());
    for (Index j = 0; j < coef.size(); ++j) coef[j] = normal(rng);
    Vector d = N * coef;
    // longest step along d that stays in the box
    double tmax = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (d[i] > 0) tmax = std::min(tmax, (spec.hi - x_feas[i]) / d[i]);
      else if (d[i] < 0) tmax = std::min(tmax, (spec.lo - x_feas[i]) / d[i]);
    }
    if (!std::isfinite(tmax)) continue;
    fmin = std::min(fmin, inst.objective.value(x_feas + unif(rng) * tmax * d));
  }
  inst.lower_bound = LowerBound{fmin - 0.1 * (1.0 + std::abs(fmin)), LowerBoundKind::estimate};
  return inst;
}

}  // namespace sprox
