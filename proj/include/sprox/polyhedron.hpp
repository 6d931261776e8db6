#pragma once

#include "sprox/core.hpp"

#include <limits>
#include <variant>

namespace sprox {

/// Axis-aligned box lo <= x <= hi. Bounds may be infinite.
struct Box {
  Vector lo;
  Vector hi;
};

/// General polyhedron {x | Gx <= h}.
struct Halfspaces {
  Matrix G;
  Vector h;
};

/// The set P. Either representation is materialized as an inequality system
/// Gx <= h at construction; for a box that system holds one row per finite
/// bound, all upper bounds first (coordinate order), then all lower bounds.
class Polyhedron {
 public:
  Polyhedron() = default;

  static Polyhedron box(Vector lo, Vector hi) {
    detail::require(lo.size() == hi.size(), ErrorKind::dimension_mismatch,
                    "box bounds have different lengths");
    for (Index i = 0; i < lo.size(); ++i) {
      detail::require(!std::isnan(lo[i]) && !std::isnan(hi[i]), ErrorKind::non_finite,
                      "box bound is NaN");
      detail::require(lo[i] <= hi[i], ErrorKind::invalid_argument,
                      "box bound lo > hi at coordinate " + std::to_string(i));
    }
    Polyhedron P;
    P.repr_ = Box{std::move(lo), std::move(hi)};
    P.materialize();
    return P;
  }

  static Polyhedron unbounded(Index n) {
    const double inf = std::numeric_limits<double>::infinity();
    return box(Vector::Constant(n, -inf), Vector::Constant(n, inf));
  }

  static Polyhedron general(Matrix G, Vector h) {
    detail::require(G.rows() == h.size(), ErrorKind::dimension_mismatch,
                    "G has " + std::to_string(G.rows()) + " rows but h has length " +
                        std::to_string(h.size()));
    detail::require(G.allFinite() && h.allFinite(), ErrorKind::non_finite,
                    "G or h has non-finite entries");
    Polyhedron P;
    P.repr_ = Halfspaces{std::move(G), std::move(h)};
    P.materialize();
    return P;
  }

  Index dim() const { return dim_; }
  bool is_box() const { return std::holds_alternative<Box>(repr_); }
  const Box& as_box() const { return std::get<Box>(repr_); }
  const Halfspaces& as_general() const { return std::get<Halfspaces>(repr_); }

  const Matrix& G() const { return G_; }
  const Vector& h() const { return h_; }
  Index num_inequalities() const { return G_.rows(); }

  /// ||G||_2^2, the Lipschitz constant of the projection dual's gradient.
  double G_norm_sq() const { return G_norm_sq_; }

  /// max_i (Gx - h)_i clipped at zero.
  double max_violation(const Vector& x) const {
    if (is_box()) {
      const Box& b = as_box();
      double v = 0.0;
      for (Index i = 0; i < x.size(); ++i) v = std::max({v, b.lo[i] - x[i], x[i] - b.hi[i]});
      return v;
    }
    return G_.rows() == 0 ? 0.0 : detail::positive_part_max(G_ * x - h_);
  }

  bool contains(const Vector& x, double tol) const { return max_violation(x) <= tol; }

 private:
  void materialize() {
    if (is_box()) {
      const Box& b = as_box();
      dim_ = b.lo.size();
      Index rows = 0;
      for (Index i = 0; i < dim_; ++i) rows += std::isfinite(b.hi[i]) + std::isfinite(b.lo[i]);
      G_ = Matrix::Zero(rows, dim_);
      h_ = Vector::Zero(rows);
      Index r = 0;
      for (Index i = 0; i < dim_; ++i)
        if (std::isfinite(b.hi[i])) { G_(r, i) = 1.0; h_[r++] = b.hi[i]; }
      for (Index i = 0; i < dim_; ++i)
        if (std::isfinite(b.lo[i])) { G_(r, i) = -1.0; h_[r++] = -b.lo[i]; }
      // G^T G is diagonal with the number of finite bounds per coordinate.
      G_norm_sq_ = 0.0;
      for (Index i = 0; i < dim_; ++i)
        G_norm_sq_ = std::max(G_norm_sq_, double(std::isfinite(b.hi[i]) + std::isfinite(b.lo[i])));
    } else {
      const Halfspaces& hs = as_general();
      dim_ = hs.G.cols();
      G_ = hs.G;
      h_ = hs.h;
      if (G_.rows() == 0 || G_.cols() == 0) {
        G_norm_sq_ = 0.0;
      } else {
        Eigen::JacobiSVD<Matrix> svd(G_);
        G_norm_sq_ = svd.singularValues()[0] * svd.singularValues()[0];
      }
    }
  }

  std::variant<Box, Halfspaces> repr_;
  Index dim_ = 0;
  Matrix G_;
  Vector h_;
  double G_norm_sq_ = 0.0;
};

/// Mixed linear system {x | C1 x <= b1, C2 x = b2}.
struct LinearSystem {
  Matrix C1;
  Vector b1;
  Matrix C2;
  Vector b2;

  Index dim() const { return C1.rows() > 0 ? C1.cols() : C2.cols(); }

  /// ||(C1 x - b1)_+||^2 + ||C2 x - b2||^2
  double residual_sq(const Vector& x) const {
    double r = 0.0;
    if (C1.rows() > 0) r += (C1 * x - b1).cwiseMax(0.0).squaredNorm();
    if (C2.rows() > 0) r += (C2 * x - b2).squaredNorm();
    return r;
  }
};

}  // namespace sprox
