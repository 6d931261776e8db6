#pragma once

#include "sprox/linalg.hpp"
#include "sprox/params.hpp"
#include "sprox/problem.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace sprox {

/// M = [[A^T, G^T], [0, I_l]], one row per primal coordinate followed by one
/// row per inequality. Columns are (y, mu).
inline Matrix hoffman_matrix(const Matrix& A, const Matrix& G) {
  const Index n = std::max(A.cols(), G.cols());
  detail::require(A.rows() == 0 || A.cols() == n, ErrorKind::dimension_mismatch, "A and G column counts differ");
  detail::require(G.rows() == 0 || G.cols() == n, ErrorKind::dimension_mismatch, "A and G column counts differ");
  const Index m = A.rows(), l = G.rows();
  Matrix M = Matrix::Zero(n + l, m + l);
  if (m > 0) M.topLeftCorner(n, m) = A.transpose();
  if (l > 0) {
    M.topRightCorner(n, l) = G.transpose();
    M.bottomRightCorner(l, l) = Matrix::Identity(l, l);
  }
  return M;
}

struct HoffmanResult {
  double theta = 0.0;
  bool exact = true;
  Index bases = 0;  // full-row-rank submatrices evaluated
  Index rows = 0;
  Index rank = 0;
};

namespace detail {

/// Incremental LQ factorization of the chosen rows, S = R Q^T with Q having
/// orthonormal columns and R lower triangular. The singular values of S are
/// those of R. Rows of R^-1 are appended alongside, so ||S||_F and
/// ||R^-1||_F are running sums.
class RowSpan {
 public:
  RowSpan(Index cols, Index cap)
      : Q_(cols, cap), R_(Matrix::Zero(cap, cap)), Rinv_(Matrix::Zero(cap, cap)), coef_(cap), tmp_(cap), work_(cols),
        fro2_(cap + 1, 0.0), inv2_(cap + 1, 0.0) {}

  /// Classical Gram-Schmidt with one reorthogonalization pass.
  bool try_add(const Eigen::Ref<const Vector>& row) {
    work_ = row;
    if (k_ > 0) {
      auto Qk = Q_.leftCols(k_);
      coef_.head(k_).noalias() = Qk.transpose() * work_;
      work_.noalias() -= Qk * coef_.head(k_);
      tmp_.head(k_).noalias() = Qk.transpose() * work_;
      work_.noalias() -= Qk * tmp_.head(k_);
      coef_.head(k_) += tmp_.head(k_);
    }
    const double nn = work_.squaredNorm();
    const double scale = row.squaredNorm();
    if (nn == 0.0 || nn <= 1e-12 * scale) return false;
    const double nrm = std::sqrt(nn);
    Q_.col(k_) = work_ / nrm;
    R_.row(k_).head(k_) = coef_.head(k_).transpose();
    R_(k_, k_) = nrm;
    // last row of the inverse of [[R, 0], [c^T, d]] is [-c^T R^-1 / d, 1/d]
    if (k_ > 0)
      Rinv_.row(k_).head(k_).noalias() =
          -(coef_.head(k_).transpose() * Rinv_.topLeftCorner(k_, k_).triangularView<Eigen::Lower>()) / nrm;
    Rinv_(k_, k_) = 1.0 / nrm;
    fro2_[k_ + 1] = fro2_[k_] + scale;
    inv2_[k_ + 1] = inv2_[k_] + Rinv_.row(k_).head(k_ + 1).squaredNorm();
    ++k_;
    return true;
  }

  void pop() {
    --k_;
    R_.row(k_).setZero();
    Rinv_.row(k_).setZero();
  }
  Index size() const { return k_; }
  auto R() const { return R_.topLeftCorner(k_, k_); }
  double fro2() const { return fro2_[k_]; }
  double inv_fro2() const { return inv2_[k_]; }

 private:
  Matrix Q_;
  Matrix R_;
  Matrix Rinv_;
  Vector coef_;
  Vector tmp_;
  Vector work_;
  std::vector<double> fro2_, inv2_;
  Index k_ = 0;
};

/// sigma_max^2 / sigma_min^4 of the chosen rows. Skips the SVD when the bound
/// ||S||_F^2 ||S^+||_F^4 already rules out beating `floor`.
inline double hoffman_leaf(const RowSpan& span, double floor) {
  const double inv2 = span.inv_fro2();
  if (span.fro2() * inv2 * inv2 <= floor) return 0.0;
  const Matrix R = span.R();
  Eigen::JacobiSVD<Matrix> svd(R);
  const auto& s = svd.singularValues();
  const double smax = s[0], smin = s[R.rows() - 1];
  return (smax * smax) / (smin * smin * smin * smin);
}

inline Index numerical_rank(const Matrix& M) {
  if (M.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  const double tol = std::max(M.rows(), M.cols()) * std::numeric_limits<double>::epsilon() * s[0];
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) r += s[i] > tol;
  return r;
}

}  // namespace detail

/// max over full-row-rank row subsets of sigma_max^2 / sigma_min^4.
///
/// Adding an independent row can only raise the largest and lower the
/// smallest eigenvalue of the Gram matrix (interlacing), so the maximum sits
/// on a row basis. The exact path enumerates bases depth-first and discards
/// dependent branches early. Above `exact_limit` rows it samples random
/// greedy bases and the result is a lower bound.
inline HoffmanResult hoffman_constant_rows(const Matrix& M, Index exact_limit = 20, Index samples = 10000,
                                           std::uint64_t seed = 0) {
  detail::require(exact_limit >= 1, ErrorKind::invalid_argument, "exact_limit must be >= 1");
  HoffmanResult res;
  res.rows = M.rows();
  res.rank = detail::numerical_rank(M);
  if (res.rank == 0) return res;
  const Index nr = M.rows();
  const Index r = res.rank;
  const Matrix Mt = M.transpose();  // contiguous rows

  std::mt19937_64 rng(seed);
  std::vector<Index> order(nr);
  std::iota(order.begin(), order.end(), Index{0});
  auto sample = [&](Index draws) {
    for (Index s = 0; s < draws; ++s) {
      std::shuffle(order.begin(), order.end(), rng);
      detail::RowSpan greedy(M.cols(), r);
      for (Index i : order) {
        greedy.try_add(Mt.col(i));
        if (greedy.size() == r) break;
      }
      if (greedy.size() < r) continue;
      res.theta = std::max(res.theta, detail::hoffman_leaf(greedy, res.theta));
      ++res.bases;
    }
  };

  if (nr > exact_limit) {
    res.exact = false;
    sample(std::max<Index>(samples, 10000));
    return res;
  }

  // A few random bases first give the pruning bound something to work with.
  sample(std::min<Index>(samples, 200));
  res.bases = 0;
  detail::RowSpan span(M.cols(), r);
  auto dfs = [&](auto&& self, Index idx) -> void {
    if (span.size() == r) {
      res.theta = std::max(res.theta, detail::hoffman_leaf(span, res.theta));
      ++res.bases;
      return;
    }
    if (span.size() + (nr - idx) < r) return;
    if (span.try_add(Mt.col(idx))) {
      self(self, idx + 1);
      span.pop();
    }
    self(self, idx + 1);
  };
  dfs(dfs, 0);
  res.exact = true;
  return res;
}

namespace detail {

/// Exact enumeration specialized to M = [[A^T, G^T], [0, I]] with full column
/// rank. A basis then takes k primal rows I and l - (k - m) identity rows J,
/// and is nonsingular iff B = [A^T, G^T restricted to the columns outside J]
/// on rows I is. With S^-1 = [[B^-1, -B^-1 C], [0, I]] the leaf bound needs
/// only k x k work.
inline void hoffman_structured(const Matrix& A, const Matrix& G, HoffmanResult& res) {
  const Index n = A.cols(), m = A.rows(), l = G.rows();
  const Matrix Y = A.transpose();
  const Matrix Gt = G.transpose();
  std::vector<Index> rows_I, cols_free;
  std::vector<bool> free_col(l, false);

  auto leaf = [&](const Matrix& B) {
    const Index k = B.rows();
    const Index nJ = l - (k - m);
    Matrix C(k, nJ);
    for (Index j = 0, c = 0; j < l; ++j)
      if (!free_col[j]) {
        for (Index a = 0; a < k; ++a) C(a, c) = Gt(rows_I[a], j);
        ++c;
      }
    double fro2 = static_cast<double>(nJ);
    for (Index a = 0; a < k; ++a) fro2 += Y.row(rows_I[a]).squaredNorm() + Gt.row(rows_I[a]).squaredNorm();
    double inv2 = static_cast<double>(nJ);
    if (k > 0) {
      Eigen::PartialPivLU<Matrix> lu(B);
      const Matrix Binv = lu.inverse();
      inv2 += Binv.squaredNorm() + (Binv * C).squaredNorm();
    }
    ++res.bases;
    if (fro2 * inv2 * inv2 <= res.theta) return;
    Matrix S = Matrix::Zero(k + nJ, m + l);
    for (Index a = 0; a < k; ++a) {
      S.row(a).head(m) = Y.row(rows_I[a]);
      S.row(a).tail(l) = Gt.row(rows_I[a]);
    }
    for (Index j = 0, c = k; j < l; ++j)
      if (!free_col[j]) S(c++, m + j) = 1.0;
    Eigen::JacobiSVD<Matrix> svd(S);
    const auto& sv = svd.singularValues();
    const double smax = sv[0], smin = sv[sv.size() - 1];
    res.theta = std::max(res.theta, (smax * smax) / (smin * smin * smin * smin));
  };

  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    const Index k = std::popcount(mask);
    if (k < m || k - m > l) continue;
    rows_I.clear();
    for (Index i = 0; i < n; ++i)
      if (mask >> i & 1) rows_I.push_back(i);
    // columns of B live in R^k; grow them with the same incremental factorization
    RowSpan cols(k, std::max<Index>(k, 1));
    Vector v(k);
    bool ok = true;
    for (Index j = 0; j < m && ok; ++j) {
      for (Index a = 0; a < k; ++a) v[a] = Y(rows_I[a], j);
      ok = cols.try_add(v);
    }
    if (!ok) continue;
    const Index need = k - m;
    Matrix B(k, k);
    for (Index j = 0; j < m; ++j)
      for (Index a = 0; a < k; ++a) B(a, j) = Y(rows_I[a], j);
    auto dfs = [&](auto&& self, Index j, Index picked) -> void {
      if (picked == need) {
        leaf(B);
        return;
      }
      if (picked + (l - j) < need) return;
      for (Index a = 0; a < k; ++a) v[a] = Gt(rows_I[a], j);
      if (v.squaredNorm() > 0 && cols.try_add(v)) {
        B.col(m + picked) = v;
        free_col[j] = true;
        self(self, j + 1, picked + 1);
        free_col[j] = false;
        cols.pop();
        for (Index a = 0; a < k; ++a) v[a] = Gt(rows_I[a], j);
      }
      self(self, j + 1, picked);
    };
    dfs(dfs, 0, 0);
  }
}

}  // namespace detail

/// Hoffman-type constant for the multiplier system built from A and G.
inline HoffmanResult hoffman_constant(const Matrix& A, const Matrix& G, Index exact_limit = 20) {
  const Matrix M = hoffman_matrix(A, G);
  const Index n = M.rows() - G.rows();
  const Index rank = detail::numerical_rank(M);
  if (M.rows() <= exact_limit && rank == M.cols() && n < 63) {
    HoffmanResult res;
    res.rows = M.rows();
    res.rank = rank;
    res.exact = true;
    detail::hoffman_structured(A.rows() > 0 ? A : Matrix(0, n), G.rows() > 0 ? G : Matrix(0, n), res);
    return res;
  }
  return hoffman_constant_rows(M, exact_limit);
}

/// Same recipe for {x | C1 x <= b1, C2 x = b2}: rows of C2 stacked over C1.
inline HoffmanResult hoffman_constant_system(const Matrix& C1, const Matrix& C2, Index exact_limit = 20) {
  const Index n = C1.rows() > 0 ? C1.cols() : C2.cols();
  Matrix M(C1.rows() + C2.rows(), n);
  if (C2.rows() > 0) M.topRows(C2.rows()) = C2;
  if (C1.rows() > 0) M.bottomRows(C1.rows()) = C1;
  return hoffman_constant_rows(M, exact_limit);
}

struct StepOverrides {
  std::optional<double> rho, p, c, alpha, beta;
};

struct ConstantsReport {
  SolverMode mode = SolverMode::practical;
  double L_f = 0.0;
  double rho = 0.0;
  double p = 0.0;
  double c = 0.0;
  double alpha = 0.0;
  double beta = 0.0;

  double sigma_max_A = 0.0;
  double L = 0.0;
  double gamma_K = 0.0;
  double sigma1 = 0.0, sigma2 = 0.0, sigma3 = 0.0, sigma4 = 0.0;
  double theta_bar = 0.0;
  bool theta_exact = false;
  Index theta_bases = 0;
  double sigma5_bar = 0.0;

  double c_max = 0.0;
  double alpha_max = 0.0;
  double beta_max = 0.0;
  double B1 = 0.0;
  double B2 = 0.0;

  bool guaranteed = false;  // steps satisfy every strict bound with a certified theta
  std::vector<std::string> warnings;
};

/// sqrt(2) (theta L^2 + 1) / gamma with L = L_f + rho sigma_max(A)^2 + p, gamma = p - L_f.
inline double sigma5_bar(double theta, double L, double gamma) {
  return std::sqrt(2.0) * (theta * L * L + 1.0) / gamma;
}

/// (1 + sigma_max(A) (1 + c gamma_K) / (c gamma_K))^2
inline double certificate_B1(double sigma_max_A, double c, double gamma_K) {
  const double s1 = c * gamma_K;
  const double t = 1.0 + sigma_max_A * (1.0 + s1) / s1;
  return t * t;
}

/// ((L_f + p + rho sigma^2 + 2/c) + rho sigma sqrt(B1) + p)^2
inline double certificate_B2(double L_f, double p, double rho, double sigma_max_A, double c, double B1) {
  const double t = (L_f + p + rho * sigma_max_A * sigma_max_A + 2.0 / c) + rho * sigma_max_A * std::sqrt(B1) + p;
  return t * t;
}

struct StepPlan {
  SolverParams params;
  ConstantsReport report;
};

/// Picks (rho, p, c, alpha, beta) and every constant the analysis uses.
/// Theoretical mode: p = 3 L_f, rho = L_f and 0.99 of each strict bound.
/// Practical mode: same p, rho, c; alpha at 0.9 of its bound and beta = 0.01,
/// which carries no guarantee. Overrides replace single values; in
/// theoretical mode they must still satisfy the strict bounds.
template <SmoothObjective F>
StepPlan plan_stepsizes(const ProblemInstance<F>& inst, SolverMode mode, const StepOverrides& ov = {},
                        Index exact_limit = 20) {
  check_dimensions(inst);
  detail::require(inst.m() > 0, ErrorKind::invalid_argument, "planning needs at least one equality");
  StepPlan plan;
  ConstantsReport& rep = plan.report;
  const bool theory = mode == SolverMode::theoretical;
  rep.mode = mode;
  const double Lf = inst.lipschitz_grad;
  rep.L_f = Lf;

  auto bad = [&](const std::string& what) { throw Error(ErrorKind::invalid_argument, what); };

  rep.p = ov.p.value_or(3.0 * Lf);
  rep.rho = ov.rho.value_or(Lf);
  if (!(rep.rho > 0)) bad("rho must be positive");
  if (!(rep.p > Lf)) bad("p must exceed L_f so that K is strongly convex");
  if (theory && rep.p < 3.0 * Lf) bad("theoretical mode needs p >= 3 L_f");

  rep.sigma_max_A = spectral_norm(inst.A);
  const double s = rep.sigma_max_A;
  detail::require(s > 0, ErrorKind::degenerate, "A is zero");
  rep.L = Lf + rep.rho * s * s + rep.p;
  rep.gamma_K = rep.p - Lf;
  rep.c_max = 1.0 / rep.L;

  rep.c = ov.c.value_or(0.99 * rep.c_max);
  if (!(rep.c > 0)) bad("c must be positive");
  if (rep.c >= rep.c_max) {
    if (theory) bad("c = " + std::to_string(rep.c) + " violates c < " + std::to_string(rep.c_max));
    rep.warnings.push_back("c is not below 1/L; the primal step may not descend");
  }

  rep.sigma1 = rep.c * rep.gamma_K;
  rep.sigma2 = rep.sigma1 / (1.0 + rep.sigma1);
  rep.sigma3 = rep.gamma_K / s;
  rep.sigma4 = rep.gamma_K / rep.p;

  rep.alpha_max = rep.c * rep.gamma_K * rep.gamma_K / (4.0 * s * s);
  rep.alpha = ov.alpha.value_or((theory ? 0.99 : 0.9) * rep.alpha_max);
  if (!(rep.alpha > 0)) bad("alpha must be positive");
  if (theory && rep.alpha >= rep.alpha_max)
    bad("alpha = " + std::to_string(rep.alpha) + " violates alpha < " + std::to_string(rep.alpha_max));

  // Theta only matters for beta in theoretical mode, but the report always carries it.
  HoffmanResult hr = hoffman_constant(inst.A, inst.polyhedron.G(), exact_limit);
  rep.theta_bar = hr.theta;
  rep.theta_exact = hr.exact;
  rep.theta_bases = hr.bases;
  rep.sigma5_bar = sigma5_bar(rep.theta_bar, rep.L, rep.gamma_K);
  rep.beta_max = std::min(1.0 / 30.0, rep.alpha / (12.0 * rep.p * rep.sigma5_bar * rep.sigma5_bar));

  rep.beta = ov.beta.value_or(theory ? 0.99 * rep.beta_max : std::min(1.0 / 30.0, 0.01));
  if (!(rep.beta > 0 && rep.beta <= 1)) bad("beta must lie in (0, 1]");
  if (theory && rep.beta >= rep.beta_max)
    bad("beta = " + std::to_string(rep.beta) + " violates beta < " + std::to_string(rep.beta_max));

  rep.B1 = certificate_B1(s, rep.c, rep.gamma_K);
  rep.B2 = certificate_B2(Lf, rep.p, rep.rho, s, rep.c, rep.B1);

  if (theory && !hr.exact)
    rep.warnings.push_back("theta_bar is a sampled lower bound; the beta bound is not certified");
  if (!theory) rep.warnings.push_back("practical mode: no theoretical guarantee");
  rep.guaranteed = rep.p >= 3.0 * Lf && rep.c < rep.c_max && rep.alpha < rep.alpha_max &&
                   rep.beta < rep.beta_max && hr.exact;

  SolverParams& sp = plan.params;
  sp.rho = rep.rho;
  sp.p = rep.p;
  sp.c = rep.c;
  sp.alpha = rep.alpha;
  sp.beta = rep.beta;
  sp.sigma_max_A = s;
  sp.mode = mode;
  return plan;
}

}  // namespace sprox
