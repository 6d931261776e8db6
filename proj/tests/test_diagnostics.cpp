#include "oracles.hpp"
#include "sprox.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace sprox;

namespace {

SolverParams golden_params() {
  SolverParams sp;
  sp.rho = 1.0;
  sp.p = 3.0;
  sp.c = 0.1;
  sp.alpha = 0.05;
  sp.beta = 0.03;
  return sp;
}

IterateState state(double x, double y, double z) {
  IterateState s;
  s.x = Vector::Constant(1, x);
  s.y = Vector::Constant(1, y);
  s.z = Vector::Constant(1, z);
  return s;
}

QpInstance two_d_example() {
  QpInstance inst;
  inst.objective = QuadraticObjective{Vector(Eigen::Vector2d(1.0, -1.0)).asDiagonal(), Vector::Zero(2), 0.0};
  inst.lipschitz_grad = 1.0;
  inst.A = Matrix::Ones(1, 2);
  inst.b = Vector::Ones(1);
  inst.polyhedron = Polyhedron::box(Vector::Zero(2), Vector::Ones(2));
  return inst;
}

LinearSystem system_1d(double c1, double b1, double c2, double b2, bool ineq, bool eq) {
  LinearSystem s;
  s.C1 = ineq ? Matrix::Constant(1, 1, c1) : Matrix(0, 1);
  s.b1 = ineq ? Vector::Constant(1, b1) : Vector(0);
  s.C2 = eq ? Matrix::Constant(1, 1, c2) : Matrix(0, 1);
  s.b2 = eq ? Vector::Constant(1, b2) : Vector(0);
  return s;
}

}  // namespace

TEST(Certificate, GoldenStep) {
  const QpInstance one = fixed_instance_1d();
  const SolverParams sp = golden_params();
  const IterateState s0 = state(1, 0, 1);
  const IterateState s1 = sprox_alm_step(one, s0, sp);
  const StationarityReport r = certificate_from_step(one, s0.x, s1.x, s1.y, s0.z, sp);
  // -0.205 - 0.82 + 2.05 - 0.795 + 0.615
  EXPECT_NEAR(r.v[0], 0.845, 1e-14);
  EXPECT_NEAR(r.eq_residual, 0.795, 1e-15);
  EXPECT_EQ(r.epsilon, std::max(r.cert_norm, r.eq_residual));
  // P = R, so v must equal grad f(x1) + A^T y1 exactly
  EXPECT_NEAR(r.v[0], s1.x[0] + s1.y[0], 1e-14);
}

TEST(Certificate, TwoOverCVariant) {
  const QpInstance one = fixed_instance_1d();
  SolverParams sp = golden_params();
  sp.certificate_scaling = CertificateScaling::two_over_c;
  const IterateState s0 = state(1, 0, 1);
  const IterateState s1 = sprox_alm_step(one, s0, sp);
  EXPECT_NEAR(certificate_from_step(one, s0.x, s1.x, s1.y, s0.z, sp).v[0], 0.845 + 2.05, 1e-14);
}

TEST(Certificate, FixedPointGivesZero) {
  const QpInstance one = fixed_instance_1d();
  const SolverParams sp = golden_params();
  const IterateState s0 = state(0, 0, 0);
  const IterateState s1 = sprox_alm_step(one, s0, sp);
  const StationarityReport r = certificate_from_step(one, s0.x, s1.x, s1.y, s0.z, sp);
  EXPECT_EQ(r.cert_norm, 0.0);
  EXPECT_EQ(r.eq_residual, 0.0);
}

TEST(Certificate, RejectsStepThatWasNotTaken) {
  const QpInstance one = fixed_instance_1d();
  EXPECT_THROW(certificate_from_step(one, Vector::Ones(1), Vector::Constant(1, 0.5), Vector::Zero(1), Vector::Ones(1),
                                     golden_params()),
               Error);
}

TEST(Certificate, StepVectorLiesInTheSubdifferential) {
  QpGeneratorSpec spec;
  spec.seed = 13;
  const QpInstance inst = generate_nonconvex_qp(spec);
  const SolverParams sp = plan_stepsizes(inst, SolverMode::practical).params;
  IterateState s = default_initial_state(inst, sp);
  const Box& box = inst.polyhedron.as_box();
  for (int k = 0; k < 300; ++k) {
    const IterateState next = sprox_alm_step(inst, s, sp);
    const StationarityReport r = certificate_from_step(inst, s.x, next.x, next.y, s.z, sp);
    const Vector w = r.v - inst.objective.gradient(next.x) - inst.A.transpose() * next.y;
    for (Index i = 0; i < w.size(); ++i) {
      const double tol = 1e-9 * (1.0 + r.v.norm() + next.y.norm());
      if (next.x[i] > box.lo[i] && next.x[i] < box.hi[i]) EXPECT_NEAR(w[i], 0.0, tol);
      if (next.x[i] == box.hi[i]) EXPECT_GE(w[i], -tol);
      if (next.x[i] == box.lo[i]) EXPECT_LE(w[i], tol);
    }
    // the min-norm certificate can only be smaller
    const StationarityReport mn = certificate_minnorm(inst, next.x, next.y);
    EXPECT_LE(mn.cert_norm, r.cert_norm + 1e-8);
    s = next;
  }
}

TEST(CertificateMinNorm, KktPointOfTwoDimensionalQp) {
  const QpInstance inst = two_d_example();
  const StationarityReport r = certificate_minnorm(inst, Eigen::Vector2d(0.0, 1.0), Vector::Constant(1, 0.5));
  EXPECT_LE(r.cert_norm, 1e-8);
  EXPECT_LE(r.eq_residual, 1e-15);
  EXPECT_EQ(r.method, CertificateMethod::minnorm_nnls);
}

TEST(CertificateMinNorm, NoActiveConstraints) {
  const QpInstance one = fixed_instance_1d();
  const StationarityReport r = certificate_minnorm(one, Vector::Constant(1, 0.3), Vector::Constant(1, 0.2));
  EXPECT_NEAR(r.v[0], 0.5, 1e-15);
  const QpInstance inst = two_d_example();
  const Vector x = Eigen::Vector2d(0.4, 0.6);
  const StationarityReport ri = certificate_minnorm(inst, x, Vector::Constant(1, 0.1));
  EXPECT_LT((ri.v - (inst.objective.gradient(x) + Eigen::Vector2d(0.1, 0.1))).norm(), 1e-15);
}

TEST(CertificateMinNorm, InfeasiblePointRejected) {
  EXPECT_THROW(certificate_minnorm(two_d_example(), Eigen::Vector2d(1.5, 0.0), Vector::Zero(1)), Error);
}

TEST(Potential, GoldenValue) {
  const PotentialParts p = potential_value(fixed_instance_1d(), state(1, 0, 1), golden_params(), 1e-14);
  EXPECT_NEAR(p.K, 1.0, 1e-14);
  EXPECT_NEAR(p.x_yz[0], 0.6, 1e-12);
  EXPECT_NEAR(p.d, 0.6, 1e-12);
  EXPECT_NEAR(p.P, 1.5, 1e-12);
  EXPECT_NEAR(p.phi, 2.8, 1e-12);
}

TEST(Potential, FixedPointEqualsObjective) {
  const PotentialParts p = potential_value(fixed_instance_1d(), state(0, 0, 0), golden_params());
  EXPECT_NEAR(p.phi, 0.0, 1e-12);
}

TEST(Potential, OrderingOfParts) {
  QpGeneratorSpec spec;
  spec.n = 5;
  spec.m = 2;
  spec.seed = 2;
  QpInstance inst = generate_nonconvex_qp(spec);
  const SolverParams sp = plan_stepsizes(inst, SolverMode::practical).params;
  const Box& b = inst.polyhedron.as_box();
  const double f_low = oracle::box_qp_global_min(inst.objective.Q, inst.objective.q, 0.0, inst.A, inst.b, b.lo, b.hi);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    IterateState s;
    s.x = Vector(5);
    s.z = Vector(5);
    s.y = Vector(2);
    for (Index i = 0; i < 5; ++i) {
      s.x[i] = std::clamp(0.5 + 0.5 * normal(rng), 0.0, 1.0);
      s.z[i] = 0.5 + normal(rng);
    }
    for (Index i = 0; i < 2; ++i) s.y[i] = normal(rng);
    const PotentialParts p = potential_value(inst, s, sp);
    EXPECT_GE(p.K, p.d - 1e-9);
    EXPECT_GE(p.P, p.d - 1e-9);
    EXPECT_GE(p.phi, p.P - 1e-9);
    EXPECT_GE(p.P, f_low - 1e-9);
  }
}

TEST(Monitors, CertifiedRunHasNoViolations) {
  QpGeneratorSpec spec;
  spec.n = 4;
  spec.m = 2;
  spec.seed = 4;
  QpInstance inst = generate_nonconvex_qp(spec);
  const Box& b = inst.polyhedron.as_box();
  inst.lower_bound = LowerBound{
      oracle::box_qp_global_min(inst.objective.Q, inst.objective.q, 0.0, inst.A, inst.b, b.lo, b.hi),
      LowerBoundKind::certified};
  SolverParams sp = plan_stepsizes(inst, SolverMode::theoretical).params;
  sp.max_iters = 300;
  sp.trace_every = 3;
  sp.monitor_level = MonitorLevel::full;
  const SproxRunResult r = sprox_alm_run(inst, sp);
  for (size_t i = 0; i < r.monitors.stats.size(); ++i)
    EXPECT_EQ(r.monitors.stats[i].violations, 0) << to_string(static_cast<Monitor>(i));
  EXPECT_EQ(r.monitors[Monitor::potential_descent].checked, 100);
  EXPECT_EQ(r.monitors[Monitor::potential_lower_bound].checked, 100);
}

TEST(Monitors, PracticalViolationsBecomeWarnings) {
  const QpInstance one = fixed_instance_1d();
  SolverParams sp = golden_params();
  sp.beta = 0.9;  // far above the certified bound
  sp.alpha = 0.15;
  sp.max_iters = 50;
  sp.monitor_level = MonitorLevel::full;
  const SproxRunResult r = sprox_alm_run(one, sp, state(1, 0, 1));
  if (r.monitors.total_violations() > 0) EXPECT_FALSE(r.warnings.empty());
}

TEST(DualErrorBound, FixedInstanceRatioIsOne) {
  const QpInstance one = fixed_instance_1d();
  const StepPlan plan = plan_stepsizes(one, SolverMode::theoretical);
  const DualErrorBoundReport r = verify_dual_error_bound(one, plan.params, 30, 1, plan.report.sigma5_bar);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.samples, 30);
  EXPECT_NEAR(r.max_ratio, 1.0, 1e-6);
}

TEST(DualErrorBound, GuardMakesZeroOverZeroVanish) {
  EXPECT_EQ(guarded_ratio(1e-12, 1e-14), 0.0);
  EXPECT_TRUE(std::isinf(guarded_ratio(1e-3, 0.0)));
  EXPECT_DOUBLE_EQ(guarded_ratio(2.0, 4.0), 0.5);
}

TEST(DualErrorBound, RandomQpWithinBound) {
  QpGeneratorSpec spec;
  spec.n = 5;
  spec.m = 2;
  spec.seed = 17;
  const QpInstance inst = generate_nonconvex_qp(spec);
  const StepPlan plan = plan_stepsizes(inst, SolverMode::practical);
  ASSERT_TRUE(plan.report.theta_exact);
  const DualErrorBoundReport r = verify_dual_error_bound(inst, plan.params, 200, 5, plan.report.sigma5_bar);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.skipped, 0);
  EXPECT_LE(r.max_ratio, plan.report.sigma5_bar);
}

TEST(Hoffman, HalfLineIsTight) {
  const LinearSystem s = system_1d(1.0, 1.0, 0, 0, true, false);
  const HoffmanPoint hp = hoffman_point(s, 1.0, Vector::Constant(1, 2.0));
  EXPECT_NEAR(hp.dist_sq, 1.0, 1e-14);
  EXPECT_NEAR(hp.residual_sq, 1.0, 1e-14);
  EXPECT_NEAR(hp.ratio, 1.0, 1e-14);
  EXPECT_TRUE(hoffman_holds(hp, 1.0));
  const HoffmanPoint in = hoffman_point(s, 1.0, Vector::Constant(1, 0.5));
  EXPECT_EQ(in.dist_sq, 0.0);
  EXPECT_EQ(in.residual_sq, 0.0);
}

TEST(Hoffman, ScaledEqualityNeedsAQuarter) {
  const LinearSystem s = system_1d(0, 0, 2.0, 0.0, false, true);
  const HoffmanResult hr = hoffman_constant_system(s.C1, s.C2);
  EXPECT_NEAR(hr.theta, 0.25, 1e-14);
  const HoffmanPoint hp = hoffman_point(s, hr.theta, Vector::Ones(1));
  EXPECT_NEAR(hp.dist_sq, 1.0, 1e-14);
  EXPECT_NEAR(hp.residual_sq, 4.0, 1e-14);
  EXPECT_TRUE(hoffman_holds(hp, 0.25));
  EXPECT_FALSE(hoffman_holds(hp, 0.2));
  EXPECT_TRUE(verify_hoffman(s, 0.25, 50, 1).pass);
  EXPECT_FALSE(verify_hoffman(s, 0.2, 50, 1).pass);
}

TEST(Hoffman, ProjectionMatchesOracle) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Index n = 2 + k % 3;
    LinearSystem s;
    s.C1 = Matrix(3, n);
    s.C2 = Matrix(1, n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < 3; ++i) s.C1(i, j) = normal(rng);
      s.C2(0, j) = normal(rng);
    }
    Vector x0(n), x(n);
    for (Index j = 0; j < n; ++j) {
      x0[j] = normal(rng);
      x[j] = 3 * normal(rng);
    }
    s.b1 = s.C1 * x0 + Vector::Constant(3, 0.2);
    s.b2 = s.C2 * x0;
    const Vector got = project_onto_system(s, x);
    const auto want = oracle::convex_qp(Matrix::Identity(n, n), -x, s.C2, s.b2, s.C1, s.b1);
    ASSERT_TRUE(want);
    EXPECT_LT((got - want->x).norm(), 1e-8);
  }
}

TEST(Hoffman, EmptySystemIsInfeasible) {
  LinearSystem s;
  s.C1 = Matrix(2, 1);
  s.C1 << 1, -1;
  s.b1 = Eigen::Vector2d(0.0, -1.0);  // x <= 0 and x >= 1
  s.C2 = Matrix(0, 1);
  s.b2 = Vector(0);
  try {
    verify_hoffman(s, 1.0, 10, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::infeasible);
  }
}

TEST(Segments, FeasibleStartIsASinglePoint) {
  const QpInstance g = prox_instance(fixed_instance_1d(), 3.0, Vector::Ones(1));
  const SegmentTrace tr = trace_segment_decomposition(g, Vector::Constant(1, 3.0), 101);
  EXPECT_NEAR(tr.r_norm, 0.0, 1e-14);
  EXPECT_TRUE(tr.breakpoints.empty());
  EXPECT_TRUE(tr.pass);
}

TEST(Segments, OneDimensionalPathIsLinear) {
  const QpInstance g = prox_instance(fixed_instance_1d(), 3.0, Vector::Ones(1));
  const SegmentTrace tr = trace_segment_decomposition(g, Vector::Constant(1, 0.7), 201);
  EXPECT_NEAR(tr.r_tilde[0], 0.575, 1e-12);
  EXPECT_TRUE(tr.breakpoints.empty());
  ASSERT_EQ(tr.pieces.size(), 1u);
  EXPECT_NEAR(tr.path_length, 0.575, 1e-10);
  for (size_t i = 0; i < tr.points.size(); ++i) EXPECT_NEAR(tr.points[i].x[0], tr.grid[i] * 0.575, 1e-10);
  EXPECT_NEAR(tr.sigma5, std::sqrt(2.0) * (16.0 + 1.0) / 4.0, 1e-12);  // theta = 1, L = gamma = 4
  EXPECT_TRUE(tr.pass);
}

TEST(Segments, BoxConstraintActivatesOnce) {
  // x*(r) = argmin 1/2 ||x - (0.5, 0.1)||^2 with x1 + x2 = 0.6 + r on [0,1]^2:
  // x2 reaches 0 at r = -0.2; y_tilde = 0.3 gives r_tilde = -0.4.
  QpInstance g;
  g.objective = QuadraticObjective{Matrix::Identity(2, 2), -Eigen::Vector2d(0.5, 0.1), 0.0};
  g.lipschitz_grad = 1.0;
  g.A = Matrix::Ones(1, 2);
  g.b = Vector::Constant(1, 0.6);
  g.polyhedron = Polyhedron::box(Vector::Zero(2), Vector::Ones(2));
  const SegmentTrace tr = trace_segment_decomposition(g, Vector::Constant(1, 0.3), 1001);
  EXPECT_NEAR(tr.r_tilde[0], -0.4, 1e-12);
  ASSERT_EQ(tr.breakpoints.size(), 1u);
  EXPECT_NEAR(tr.breakpoints[0], 0.5, 1e-6);
  EXPECT_EQ(tr.distinct_active_sets, 2);
  EXPECT_LE(Index(tr.breakpoints.size()), tr.distinct_active_sets);
  EXPECT_NEAR(tr.telescoped, 0.4, 1e-10);
  EXPECT_TRUE(tr.telescoping_ok && tr.triangle_ok && tr.finite_ok && tr.pass);
  EXPECT_EQ(tr.grid_pair_violations, 0);
}

TEST(Segments, RequiresStrongConvexity) {
  QpGeneratorSpec spec;
  spec.n = 3;
  spec.m = 1;
  const QpInstance inst = generate_nonconvex_qp(spec);
  EXPECT_THROW(trace_segment_decomposition(inst, Vector::Zero(1), 11), Error);
}

TEST(QpEnumeration, MatchesOracle) {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    const Index n = 2 + k % 3, l = 2 + k % 4;
    Matrix B(n, n), C(l, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) B(i, j) = normal(rng);
    for (Index i = 0; i < l; ++i)
      for (Index j = 0; j < n; ++j) C(i, j) = normal(rng);
    const Matrix H = B * B.transpose() + 0.1 * Matrix::Identity(n, n);
    Vector g(n), x0(n);
    for (Index j = 0; j < n; ++j) {
      g[j] = 3 * normal(rng);
      x0[j] = normal(rng);
    }
    const Vector d = C * x0 + Vector::Constant(l, 0.1);
    const SmallQp qp{H, g, Matrix(0, n), Vector(0), C, d};
    const SmallQpSolution got = solve_qp_enumeration(qp);
    const auto want = oracle::convex_qp(H, g, Matrix(0, n), Vector(0), C, d);
    ASSERT_TRUE(want);
    EXPECT_LT((got.x - want->x).norm(), 1e-8);
  }
}
