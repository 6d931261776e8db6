#pragma once
// Brute-force references for the tests. Nothing here calls into the library's
// solvers; they only share the Eigen types.

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Idx = Eigen::Index;

inline double svd_max(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(M);
  return svd.singularValues()[0];
}

/// max sigma_max^2 / sigma_min^4 over every full-row-rank row subset of M.
inline double hoffman_brute(const Mat& M) {
  const Idx r = M.rows();
  double best = 0.0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t(1) << r); ++mask) {
    std::vector<Idx> rows;
    for (Idx i = 0; i < r; ++i)
      if (mask >> i & 1) rows.push_back(i);
    if (Idx(rows.size()) > M.cols()) continue;
    Mat S(rows.size(), M.cols());
    for (size_t i = 0; i < rows.size(); ++i) S.row(i) = M.row(rows[i]);
    Eigen::BDCSVD<Mat> svd(S);
    const Vec s = svd.singularValues();
    const double smin = s[s.size() - 1];
    if (smin <= 1e-10 * std::max(1.0, s[0])) continue;
    best = std::max(best, s[0] * s[0] / (smin * smin * smin * smin));
  }
  return best;
}

struct QpSolution {
  Vec x;
  double value = 0.0;
};

/// min 1/2 x'Hx + g'x  s.t.  Ex = e, Cx <= d, with H positive definite. Tries
/// every subset of inequality rows as the active set and keeps the best
/// feasible point whose inequality multipliers are nonnegative.
inline std::optional<QpSolution> convex_qp(const Mat& H, const Vec& g, const Mat& E, const Vec& e, const Mat& C,
                                           const Vec& d, double tol = 1e-9) {
  const Idx n = H.rows(), me = E.rows(), l = C.rows();
  std::optional<QpSolution> best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << l); ++mask) {
    std::vector<Idx> act;
    for (Idx i = 0; i < l; ++i)
      if (mask >> i & 1) act.push_back(i);
    const Idx k = me + Idx(act.size());
    if (k > n) continue;
    Mat K = Mat::Zero(n + k, n + k);
    Vec rhs = Vec::Zero(n + k);
    K.topLeftCorner(n, n) = H;
    rhs.head(n) = -g;
    for (Idx i = 0; i < me; ++i) {
      K.block(n + i, 0, 1, n) = E.row(i);
      K.block(0, n + i, n, 1) = E.row(i).transpose();
      rhs[n + i] = e[i];
    }
    for (size_t j = 0; j < act.size(); ++j) {
      const Idx r = n + me + Idx(j);
      K.block(r, 0, 1, n) = C.row(act[j]);
      K.block(0, r, n, 1) = C.row(act[j]).transpose();
      rhs[r] = d[act[j]];
    }
    Eigen::FullPivLU<Mat> lu(K);
    if (!lu.isInvertible()) continue;
    const Vec sol = lu.solve(rhs);
    const Vec x = sol.head(n);
    bool ok = true;
    for (size_t j = 0; j < act.size() && ok; ++j) ok = sol[n + me + Idx(j)] >= -tol;
    if (l > 0 && ok) ok = (C * x - d).maxCoeff() <= tol * (1.0 + d.cwiseAbs().maxCoeff());
    if (!ok) continue;
    const double v = 0.5 * x.dot(H * x) + g.dot(x);
    if (!best || v < best->value) best = QpSolution{x, v};
  }
  return best;
}

/// Global minimum of 1/2 x'Qx + q'x + offset over {lo <= x <= hi, Ax = b}
/// for any symmetric Q. Every minimizer is a stationary point of f restricted
/// to the relative interior of some face, so the minimum over all faces of the
/// face-restricted stationary values is exact. 3^n faces.
inline double box_qp_global_min(const Mat& Q, const Vec& q, double offset, const Mat& A, const Vec& b, const Vec& lo,
                                const Vec& hi) {
  const Idx n = Q.rows(), m = A.rows();
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> state(n, 0);  // 0 free, 1 at lo, 2 at hi
  Idx total = 1;
  for (Idx i = 0; i < n; ++i) total *= 3;
  for (Idx code = 0; code < total; ++code) {
    Idx c = code;
    std::vector<Idx> freev;
    Vec x = Vec::Zero(n);
    for (Idx i = 0; i < n; ++i) {
      state[i] = int(c % 3);
      c /= 3;
      if (state[i] == 0) freev.push_back(i);
      else x[i] = state[i] == 1 ? lo[i] : hi[i];
    }
    const Idx k = Idx(freev.size());
    Vec rfix = b - A * x;
    Vec lin = q + Q * x;
    Mat K = Mat::Zero(k + m, k + m);
    Vec rhs(k + m);
    for (Idx a = 0; a < k; ++a) {
      for (Idx bb = 0; bb < k; ++bb) K(a, bb) = Q(freev[a], freev[bb]);
      for (Idx i = 0; i < m; ++i) K(a, k + i) = K(k + i, a) = A(i, freev[a]);
      rhs[a] = -lin[freev[a]];
    }
    rhs.tail(m) = rfix;
    Vec sol;
    if (k + m > 0) {
      Eigen::CompleteOrthogonalDecomposition<Mat> cod(K);
      sol = cod.solve(rhs);
      if ((K * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) continue;
    }
    bool inside = true;
    for (Idx a = 0; a < k && inside; ++a) {
      const double v = sol[a];
      inside = v >= lo[freev[a]] - 1e-9 && v <= hi[freev[a]] + 1e-9;
      x[freev[a]] = std::clamp(v, lo[freev[a]], hi[freev[a]]);
    }
    if (!inside) continue;
    if (m > 0 && (A * x - b).norm() > 1e-7) continue;
    best = std::min(best, 0.5 * x.dot(Q * x) + q.dot(x) + offset);
  }
  return best;
}

}  // namespace oracle
