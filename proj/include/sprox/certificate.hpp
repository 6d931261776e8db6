#pragma once

#include "sprox/kfunction.hpp"
#include "sprox/projection.hpp"

#include <string>

namespace sprox {

enum class CertificateMethod { proof_certificate, minnorm_nnls };

inline const char* to_string(CertificateMethod m) {
  return m == CertificateMethod::proof_certificate ? "proof-certificate" : "minnorm-nnls";
}

/// Evidence that (x, y) is epsilon-stationary: v lies in
/// grad f(x) + A^T y + N_P(x), and epsilon = max(||Ax - b||, ||v||).
struct StationarityReport {
  double eq_residual = 0.0;
  Vector v;
  double cert_norm = 0.0;
  double epsilon = 0.0;
  CertificateMethod method = CertificateMethod::proof_certificate;
};

inline double default_active_tol(const Polyhedron& P) {
  return 1e-7 * (1.0 + (P.h().size() > 0 ? P.h().lpNorm<Eigen::Infinity>() : 0.0));
}

/// Certificate built from one step x -> x_next with y_next and z:
///   v = [grad f(x+) - grad f(x)] + (rho A^T A + p I)(x+ - x) - s (x+ - x)
///       - rho A^T (A x+ - b) - p (x+ - z),
/// s = 1/c by default. No check that x_next really came from the step.
template <SmoothObjective F>
StationarityReport certificate_from_step_unchecked(const ProblemInstance<F>& inst, const Vector& x,
                                                   const Vector& x_next, const Vector& z, const SolverParams& params) {
  const Vector dx = x_next - x;
  const Vector r_next = inst.A * x_next - inst.b;
  const double s = params.certificate_scaling == CertificateScaling::inverse_c ? 1.0 / params.c : 2.0 / params.c;
  Vector v = inst.objective.gradient(x_next) - inst.objective.gradient(x);
  v.noalias() += params.rho * (inst.A.transpose() * (inst.A * dx));
  v += (params.p - s) * dx;
  v.noalias() -= params.rho * (inst.A.transpose() * r_next);
  v -= params.p * (x_next - z);
  StationarityReport rep;
  rep.eq_residual = r_next.norm();
  rep.cert_norm = v.norm();
  rep.v = std::move(v);
  rep.epsilon = std::max(rep.eq_residual, rep.cert_norm);
  rep.method = CertificateMethod::proof_certificate;
  return rep;
}

/// As above, after checking x_next = Proj_P(x - c grad_x K(x, z; y_next)).
template <SmoothObjective F>
StationarityReport certificate_from_step(const ProblemInstance<F>& inst, const Vector& x, const Vector& x_next,
                                         const Vector& y_next, const Vector& z, const SolverParams& params,
                                         double tol = 1e-8) {
  const Vector g = K_gradient(inst, x, z, y_next, params.rho, params.p);
  const Vector expect = project(inst.polyhedron, x - params.c * g, params.proj_tol).point;
  const double gap = (expect - x_next).norm();
  if (gap > tol * (1.0 + x_next.norm()))
    throw Error(ErrorKind::invalid_argument,
                "x_next is not the projected step from x (gap " + std::to_string(gap) + ")");
  return certificate_from_step_unchecked(inst, x, x_next, z, params);
}

/// Smallest v in grad f(x) + A^T y + N_P(x), with the normal cone built from
/// rows satisfying (Gx - h)_i >= -active_tol. Solved as NNLS over mu >= 0.
template <SmoothObjective F>
StationarityReport certificate_minnorm(const ProblemInstance<F>& inst, const Vector& x, const Vector& y,
                                       double active_tol = -1.0) {
  const Polyhedron& P = inst.polyhedron;
  if (active_tol < 0) active_tol = default_active_tol(P);
  const double viol = P.max_violation(x);
  if (viol > active_tol)
    throw Error(ErrorKind::bound_violation, "x violates P by " + std::to_string(viol));
  const Vector g0 = inst.objective.gradient(x) + inst.A.transpose() * y;
  StationarityReport rep;
  rep.method = CertificateMethod::minnorm_nnls;
  rep.eq_residual = (inst.A * x - inst.b).norm();

  std::vector<Index> active;
  if (P.num_inequalities() > 0) {
    const Vector slack = P.G() * x - P.h();
    for (Index i = 0; i < slack.size(); ++i)
      if (slack[i] >= -active_tol) active.push_back(i);
  }
  if (active.empty()) {
    rep.v = g0;
  } else {
    Matrix C(x.size(), static_cast<Index>(active.size()));
    for (size_t j = 0; j < active.size(); ++j) C.col(j) = P.G().row(active[j]).transpose();
    NnlsResult nn = nnls(C, -g0);
    rep.v = g0 + C * nn.x;
  }
  rep.cert_norm = rep.v.norm();
  rep.epsilon = std::max(rep.eq_residual, rep.cert_norm);
  return rep;
}

}  // namespace sprox
