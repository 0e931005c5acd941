#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "dense_oracle.hpp"
#include "rstokes/assembly.hpp"
#include "rstokes/checks.hpp"

using namespace rstokes;

namespace {

Vector interpolate(const Spaces& s, double (*fx)(double, double), double (*fy)(double, double)) {
  Vector u(s.n_velocity());
  for (int node = 0; node < s.num_nodes; ++node) {
    const Point p = s.node_points[node];
    u[Spaces::velocity_dof(node, 0)] = fx(p.x, p.y);
    u[Spaces::velocity_dof(node, 1)] = fy(p.x, p.y);
  }
  return u;
}

Mesh wavy_square(int n) {
  Mesh m = generate_unit_square(n);
  for (auto& v : m.vertices) {
    if (v.y == 0.0) v.y = 0.1 * std::sin(7.0 * v.x) / n;
  }
  return m;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST(OperatorA, ZeroVelocityGivesZero) {
  const Mesh m = generate_unit_square(3);
  const Spaces s = build_spaces(m);
  const Vector a = assemble_A_residual(m, s, make_rheology_from_r(0.5, 1.5, 1e-4), Vector::Zero(s.n_velocity()));
  EXPECT_EQ(a.cwiseAbs().maxCoeff(), 0.0);
}

TEST(OperatorA, RigidModesAreInTheKernel) {
  const Mesh m = generate_cavity_mesh(6, 3, 0.0);
  const Mesh sq = generate_unit_square(3);
  for (double r : {2.0, 1.5, 1.25}) {
    const Rheology rh = make_rheology_from_r(0.5, r, 1e-4);
    const Spaces s = build_spaces(sq);
    const Vector rot = interpolate(s, [](double, double y) { return 0.3 + y; }, [](double x, double) { return -x - 1.0; });
    EXPECT_LE(assemble_A_residual(sq, s, rh, rot).cwiseAbs().maxCoeff(), 1e-12) << r;
    // On the periodic mesh only translations are admissible.
    const Spaces sp = build_spaces(m);
    const Vector tr = interpolate(sp, [](double, double) { return 1.0; }, [](double, double) { return -2.0; });
    EXPECT_LE(assemble_A_residual(m, sp, rh, tr).cwiseAbs().maxCoeff(), 1e-12) << r;
  }
}

TEST(OperatorA, NewtonianJacobianIsTheLinearOperator) {
  const Mesh m = wavy_square(3);
  const Spaces s = build_spaces(m);
  const Rheology rh = make_rheology(0.5, 1.0, 1e-4);
  const Vector u = Vector::Random(s.n_velocity());
  const SparseMatrix J0 = assemble_A_jacobian(m, s, rh, Vector::Zero(s.n_velocity()));
  const SparseMatrix J1 = assemble_A_jacobian(m, s, rh, u);
  EXPECT_LE(max_abs(Eigen::MatrixXd(J0) - Eigen::MatrixXd(J1)), 1e-14);
  EXPECT_LE((assemble_A_residual(m, s, rh, u) - J0 * u).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(OperatorA, MatchesDenseOracle) {
  for (const Mesh& m : {generate_unit_square(1), generate_unit_square(2), wavy_square(2),
                        generate_cavity_mesh(4, 2, 0.08)}) {
    const Spaces s = build_spaces(m);
    const Rheology rh = make_rheology(0.5, 1.0, 1e-4);
    const oracle::DenseSystem d = oracle::assemble_dense(m, s, rh.alpha, false);
    const SparseMatrix J = assemble_A_jacobian(m, s, rh, Vector::Zero(s.n_velocity()));
    EXPECT_LE(max_abs(Eigen::MatrixXd(J) - d.A), 1e-12);
    EXPECT_LE(max_abs(Eigen::MatrixXd(assemble_B(m, s)) - d.B), 1e-12);
    const TraceOperator tr = normal_trace(m, s);
    EXPECT_LE(max_abs(Eigen::MatrixXd(assemble_D(m, s, tr)) - d.D), 1e-12);
    EXPECT_LE(max_abs(Eigen::MatrixXd(tr.gamma) - d.Gamma), 1e-12);
  }
}

TEST(OperatorA, JacobianMatchesFiniteDifferences) {
  std::mt19937_64 rng(42);
  for (double r : {2.0, 1.5, 4.0 / 3.0, 1.25}) {
    const JacobianCheck j = jacobian_fd_check(wavy_square(3), make_rheology_from_r(0.5, r, 1e-4), 3, 1e-6, rng);
    EXPECT_LE(j.max_rel_error, 1e-6) << "r=" << r;
    EXPECT_LE(j.max_asymmetry, 1e-12) << "r=" << r;
  }
}

TEST(OperatorA, FiniteDifferenceComparisonIsSensitive) {
  // A 1e-4 relative perturbation of the Jacobian is visible to the
  // central-difference comparison, so the 1e-6 bound has teeth.
  const Mesh m = generate_unit_square(2);
  const Spaces s = build_spaces(m);
  const Rheology rh = make_rheology_from_r(0.5, 1.5, 1e-4);
  const Vector u = Vector::Random(s.n_velocity());
  const Vector v = Vector::Random(s.n_velocity());
  const SparseMatrix J = assemble_A_jacobian(m, s, rh, u);
  const double h = 1e-6;
  const Vector fd = (assemble_A_residual(m, s, rh, u + h * v) - assemble_A_residual(m, s, rh, u - h * v)) / (2 * h);
  EXPECT_LE((fd - J * v).norm() / fd.norm(), 1e-6);
  const Vector wrong = (1.0 + 1e-4) * (J * v);
  EXPECT_GT((fd - wrong).norm() / fd.norm(), 5e-5);
}

TEST(OperatorA, ThreadCountDoesNotChangeResults) {
  const Mesh m = wavy_square(4);
  const Spaces s = build_spaces(m);
  const Rheology rh = make_rheology_from_r(0.5, 1.25, 1e-4);
  const Vector u = Vector::Random(s.n_velocity());
  AssemblyOptions one;
  AssemblyOptions three;
  three.threads = 3;
  Vector a1, a3;
  SparseMatrix j1, j3;
  assemble_A(m, s, rh, u, a1, j1, one);
  assemble_A(m, s, rh, u, a3, j3, three);
  EXPECT_EQ((a1 - a3).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(max_abs(Eigen::MatrixXd(j1) - Eigen::MatrixXd(j3)), 0.0);
}

TEST(OperatorA, TraversalOrderOnlyChangesRounding) {
  const Mesh m = wavy_square(4);
  const Spaces s = build_spaces(m);
  const Rheology rh = make_rheology_from_r(0.5, 1.5, 1e-4);
  const Vector u = Vector::Random(s.n_velocity());
  std::vector<int> order(m.triangles.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937(3));
  AssemblyOptions shuffled;
  shuffled.order = order;
  const Vector a = assemble_A_residual(m, s, rh, u);
  const Vector b = assemble_A_residual(m, s, rh, u, shuffled);
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-14 * a.cwiseAbs().maxCoeff());
  const Eigen::MatrixXd ja(assemble_A_jacobian(m, s, rh, u));
  const Eigen::MatrixXd jb(assemble_A_jacobian(m, s, rh, u, shuffled));
  EXPECT_LE(max_abs(ja - jb), 1e-14 * max_abs(ja));
}

TEST(OperatorB, ConstantAndRotationAreDivergenceFree) {
  const Mesh m = generate_unit_square(3);
  const Spaces s = build_spaces(m);
  const SparseMatrix B = assemble_B(m, s);
  const Vector c = interpolate(s, [](double, double) { return 0.7; }, [](double, double) { return -1.3; });
  const Vector rot = interpolate(s, [](double, double y) { return y; }, [](double x, double) { return -x; });
  EXPECT_LE((B.transpose() * c).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LE((B.transpose() * rot).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(OperatorB, UnitDivergenceGivesCellAreas) {
  const Mesh m = generate_unit_square(1);
  const Spaces s = build_spaces(m);
  const Vector u = interpolate(s, [](double x, double) { return x; }, [](double, double) { return 0.0; });
  const Vector div = assemble_B(m, s).transpose() * u;
  ASSERT_EQ(div.size(), 2);
  EXPECT_NEAR(div[0], 0.5, 1e-15);
  EXPECT_NEAR(div[1], 0.5, 1e-15);
}

TEST(OperatorD, UniformFieldIntegratesEdgeLength) {
  const Mesh m = generate_unit_square(4);
  const Spaces s = build_spaces(m);
  const TraceOperator tr = normal_trace(m, s);
  const Vector v = interpolate(s, [](double, double) { return 0.0; }, [](double, double) { return -1.0; });
  const Vector sums = assemble_D(m, s, tr).transpose() * v;
  for (int i = 0; i < sums.size(); ++i) EXPECT_NEAR(sums[i], 0.25, 1e-15);
}

TEST(LoadMms, PairingWithRigidLiftHasTheExpectedSign) {
  for (double r : {2.0, 1.5, 4.0 / 3.0, 1.25}) {
    const Mesh m = generate_unit_square(4);
    const Spaces s = build_spaces(m);
    const TraceOperator tr = normal_trace(m, s, BedNormal::Inward);
    const ExactFields ex = exact_fields(r);
    const Vector f = assemble_load_mms(m, s, tr, make_rheology_from_r(0.5, r, 1e-4), ex);
    const Vector down = interpolate(s, [](double, double) { return 0.0; }, [](double, double) { return -1.0; });
    // <F, (0, theta)> = theta int_0^1 x^gamma dx with theta = -1.
    EXPECT_NEAR(f.dot(down), -1.0 / (ex.gamma_exp + 1.0), 1e-8) << "r=" << r;
  }
}

TEST(LoadMms, QuadratureSelfConvergence) {
  const Mesh m = generate_unit_square(4);
  const Spaces s = build_spaces(m);
  const TraceOperator tr = normal_trace(m, s, BedNormal::Inward);
  const double r = 1.5;
  const Rheology rh = make_rheology_from_r(0.5, r, 1e-4);
  LoadOptions base;
  LoadOptions fine;
  fine.quad_degree = 2 * base.quad_degree;
  const Vector a = assemble_load_mms(m, s, tr, rh, exact_fields(r), base);
  const Vector b = assemble_load_mms(m, s, tr, rh, exact_fields(r), fine);
  EXPECT_LE((a - b).norm() / b.norm(), 1e-8);
}

TEST(LoadCavity, ZeroPressureGivesZeroLoad) {
  const Mesh m = generate_cavity_mesh(8, 4, 0.08);
  EXPECT_EQ(assemble_load_cavity(m, build_spaces(m), 0.0).cwiseAbs().maxCoeff(), 0.0);
}

TEST(LoadCavity, RejectsNegativePressure) {
  const Mesh m = generate_cavity_mesh(8, 4, 0.08);
  EXPECT_THROW(assemble_load_cavity(m, build_spaces(m), -1.0), std::invalid_argument);
}

TEST(LoadCavity, UpwardLiftPairsNegatively) {
  const Mesh m = generate_cavity_mesh(8, 4, 0.0);
  const Spaces s = build_spaces(m);
  const Vector f = assemble_load_cavity(m, s, 1.2);
  const Vector up = interpolate(s, [](double, double) { return 0.0; }, [](double, double) { return 1.0; });
  EXPECT_NEAR(f.dot(up), -1.2, 1e-14);
}

TEST(LoadCavity, SupportedOnTractionBoundaryAndMatchesOracle) {
  const Mesh m = generate_cavity_mesh(8, 4, 0.08);
  const Spaces s = build_spaces(m);
  const Vector f = assemble_load_cavity(m, s, 1.2);
  std::set<int> top;
  for (int node : boundary_nodes(m, s, BoundaryTag::Traction)) {
    top.insert(Spaces::velocity_dof(node, 0));
    top.insert(Spaces::velocity_dof(node, 1));
  }
  for (int i = 0; i < f.size(); ++i) {
    if (!top.contains(i)) {
      EXPECT_EQ(f[i], 0.0) << i;
    }
  }
  EXPECT_LE((f - oracle::dense_traction_load(m, s, 1.2)).cwiseAbs().maxCoeff(), 1e-14);
}
