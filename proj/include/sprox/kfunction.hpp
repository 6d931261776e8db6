#pragma once

#include "sprox/linalg.hpp"
#include "sprox/params.hpp"
#include "sprox/problem.hpp"

namespace sprox {

/// K(x, z; y) = f(x) + y^T(Ax - b) + rho/2 ||Ax - b||^2 + p/2 ||x - z||^2
template <SmoothObjective F>
double K_value(const ProblemInstance<F>& inst, const Vector& x, const Vector& z, const Vector& y, double rho,
               double p) {
  const Vector r = inst.A * x - inst.b;
  return inst.objective.value(x) + y.dot(r) + 0.5 * rho * r.squaredNorm() + 0.5 * p * (x - z).squaredNorm();
}

/// grad f(x) + A^T y + rho A^T (Ax - b) + p (x - z)
template <SmoothObjective F>
Vector K_gradient(const ProblemInstance<F>& inst, const Vector& x, const Vector& z, const Vector& y, double rho,
                  double p) {
  const Vector r = inst.A * x - inst.b;
  return inst.objective.gradient(x) + inst.A.transpose() * (y + rho * r) + p * (x - z);
}

template <SmoothObjective F>
double sigma_max_A(const ProblemInstance<F>& inst, const SolverParams& params) {
  if (params.sigma_max_A > 0) return params.sigma_max_A;
  return inst.m() > 0 ? spectral_norm(inst.A) : 0.0;
}

/// Gradient Lipschitz constant of K in x: L_f + rho sigma_max(A)^2 + p.
template <SmoothObjective F>
double K_lipschitz(const ProblemInstance<F>& inst, const SolverParams& params) {
  const double s = sigma_max_A(inst, params);
  return inst.lipschitz_grad + params.rho * s * s + params.p;
}

}  // namespace sprox
