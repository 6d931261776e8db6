#pragma once

#include "sprox/core.hpp"

#include <algorithm>
#include <limits>
#include <vector>

namespace sprox {

/// Largest singular value. Full SVD when min(rows, cols) <= 64, otherwise
/// power iteration on M^T M from a fixed start vector.
inline double spectral_norm(const Matrix& M) {
  detail::require(M.size() > 0, ErrorKind::invalid_argument, "spectral_norm of an empty matrix");
  detail::require(M.allFinite(), ErrorKind::non_finite, "spectral_norm of a non-finite matrix");
  if (std::min(M.rows(), M.cols()) <= 64) {
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()[0];
  }
  Vector v = Vector::Ones(M.cols()).normalized();
  double lambda = 0.0;
  for (int it = 0; it < 100000; ++it) {
    Vector w = M.transpose() * (M * v);
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    v = w / next;
    if (std::abs(next - lambda) <= 1e-14 * next) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

/// Smallest and largest eigenvalue of a symmetric matrix.
inline std::pair<double, double> eigen_range(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()[0], es.eigenvalues()[S.rows() - 1]};
}

/// Orthonormal basis of null(A), one column per null direction.
inline Matrix null_space(const Matrix& A) {
  const Index n = A.cols();
  if (A.rows() == 0) return Matrix::Identity(n, n);
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double tol = std::max(A.rows(), A.cols()) * std::numeric_limits<double>::epsilon() *
                     (s.size() > 0 ? s[0] : 0.0);
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) rank += s[i] > tol;
  return svd.matrixV().rightCols(n - rank);
}

struct NnlsResult {
  Vector x;
  double residual = 0.0;  // ||Cx - d||
};

/// Lawson-Hanson active-set method for min ||Cx - d|| subject to x >= 0.
inline NnlsResult nnls(const Matrix& C, const Vector& d, int max_iters = 0) {
  const Index k = C.cols();
  NnlsResult out;
  out.x = Vector::Zero(k);
  if (k == 0) {
    out.residual = d.norm();
    return out;
  }
  if (max_iters <= 0) max_iters = static_cast<int>(30 * k + 30);
  const double tol = 10 * std::numeric_limits<double>::epsilon() * C.norm() * std::max<Index>(k, C.rows());
  std::vector<bool> passive(k, false);
  Vector& x = out.x;

  auto solve_passive = [&](Vector& z) {
    std::vector<Index> idx;
    for (Index j = 0; j < k; ++j)
      if (passive[j]) idx.push_back(j);
    z = Vector::Zero(k);
    if (idx.empty()) return;
    Matrix Cp(C.rows(), static_cast<Index>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) Cp.col(j) = C.col(idx[j]);
    Vector zp = Cp.completeOrthogonalDecomposition().solve(d);
    for (size_t j = 0; j < idx.size(); ++j) z[idx[j]] = zp[j];
  };

  for (int outer = 0; outer < max_iters; ++outer) {
    Vector w = C.transpose() * (d - C * x);
    Index best = -1;
    double wmax = tol;
    for (Index j = 0; j < k; ++j)
      if (!passive[j] && w[j] > wmax) { wmax = w[j]; best = j; }
    if (best < 0) break;
    passive[best] = true;

    for (int inner = 0; inner < max_iters; ++inner) {
      Vector z;
      solve_passive(z);
      bool feasible = true;
      for (Index j = 0; j < k; ++j)
        if (passive[j] && z[j] <= 0) { feasible = false; break; }
      if (feasible) {
        x = z;
        break;
      }
      double step = 1.0;
      for (Index j = 0; j < k; ++j)
        if (passive[j] && z[j] <= 0) step = std::min(step, x[j] / (x[j] - z[j]));
      x += step * (z - x);
      for (Index j = 0; j < k; ++j)
        if (passive[j] && x[j] <= tol) { passive[j] = false; x[j] = 0.0; }
    }
  }
  out.residual = (C * x - d).norm();
  return out;
}

struct MixedLsResult {
  Vector free;
  Vector nonneg;
  double residual = 0.0;  // ||F*free + C*nonneg - d||
};

/// min ||F u + C v - d|| over u free and v >= 0. The free block is eliminated
/// by projecting onto range(F)^perp, then NNLS handles the signed block.
inline MixedLsResult mixed_least_squares(const Matrix& F, const Matrix& C, const Vector& d) {
  MixedLsResult out;
  Matrix proj_perp = Matrix::Identity(d.size(), d.size());
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
  if (F.cols() > 0) {
    cod.compute(F);
    Matrix basis = cod.householderQ() * Matrix::Identity(F.rows(), cod.rank());
    proj_perp -= basis * basis.transpose();
  }
  NnlsResult nn = nnls(proj_perp * C, proj_perp * d);
  out.nonneg = nn.x;
  if (F.cols() > 0) {
    out.free = cod.solve(d - C * out.nonneg);
  } else {
    out.free = Vector::Zero(0);
  }
  out.residual = (F * out.free + C * out.nonneg - d).norm();
  return out;
}

}  // namespace sprox
