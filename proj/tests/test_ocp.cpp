#include <gtest/gtest.h>

#include <random>

#include "support/reference.hpp"

using namespace symmpc;
using namespace symmpc::testing;

namespace {

OcpSpec example2_spec() { return load_problem(data_path("example2.json")).spec; }

Matrix mat(Eigen::Index r, Eigen::Index c, std::initializer_list<double> v) {
  Matrix m(r, c);
  auto it = v.begin();
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = *it++;
  return m;
}

Polytope unit_box(Eigen::Index n) { return Polytope::box(-Vector::Ones(n), Vector::Ones(n)); }

template <class F>
void expect_error(ErrorCode code, F&& f) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Stabilizing DARE solution from the stable eigenspace of the symplectic pencil (A invertible).
Matrix dare_by_eigenspace(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r) {
  const Eigen::Index n = a.rows();
  const Matrix ait = a.inverse().transpose();
  const Matrix g = b * r.inverse() * b.transpose();
  Matrix z(2 * n, 2 * n);
  z << a + g * ait * q, -g * ait, -ait * q, ait;
  Eigen::ComplexEigenSolver<Matrix> es(z);
  Eigen::MatrixXcd basis(2 * n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < 2 * n; ++i)
    if (std::abs(es.eigenvalues()(i)) < 1.0) basis.col(k++) = es.eigenvectors().col(i);
  EXPECT_EQ(k, n);
  const Eigen::MatrixXcd p = basis.bottomRows(n) * basis.topRows(n).inverse();
  return p.real();
}

}  // namespace

TEST(Ocp, ExampleSpecValidates) {
  const auto ocp = validate(example2_spec());
  EXPECT_EQ(ocp.n(), 2);
  EXPECT_EQ(ocp.m(), 2);
  EXPECT_EQ(ocp.U.num_rows(), 4);
  EXPECT_EQ(ocp.X.num_rows(), 4);
}

TEST(Ocp, ExampleDareResidualAndEigenspaceAgreement) {
  const auto spec = example2_spec();
  const auto sol = solve_dare(spec.A, spec.B, spec.Q, spec.R);
  EXPECT_LE(max_abs(dare_residual(spec.A, spec.B, spec.Q, spec.R, sol.P)), 1e-8);
  const Matrix oracle = dare_by_eigenspace(spec.A, spec.B, spec.Q, spec.R);
  EXPECT_LE(max_abs(sol.P - oracle), 1e-9 * max_abs(oracle));
  Eigen::EigenSolver<Matrix> es(spec.A + spec.B * sol.K, false);
  EXPECT_LT(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
}

TEST(Ocp, DeadbeatScalarCase) {
  const auto sol = solve_dare(Matrix::Zero(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                              Matrix::Identity(2, 2));
  EXPECT_LE(max_abs(sol.P - Matrix::Identity(2, 2)), 1e-14);
  EXPECT_LE(max_abs(sol.K), 1e-14);
}

TEST(Ocp, ZeroStateWeightGivesZeroCost) {
  const auto sol = solve_dare(0.5 * Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Zero(2, 2),
                              Matrix::Identity(2, 2));
  EXPECT_EQ(max_abs(sol.P), 0.0);
}

TEST(Ocp, UncontrollableUnstableModeRejected) {
  OcpSpec s;
  s.A = mat(1, 1, {2.0});
  s.B = mat(1, 1, {0.0});
  s.Q = mat(1, 1, {1.0});
  s.R = mat(1, 1, {1.0});
  s.U = unit_box(1);
  s.X = unit_box(1);
  expect_error(ErrorCode::NotStabilizable, [&] { validate(s); });
}

TEST(Ocp, UndetectableUnstableModeRejected) {
  OcpSpec s;
  s.A = mat(1, 1, {2.0});
  s.B = mat(1, 1, {1.0});
  s.Q = mat(1, 1, {0.0});
  s.R = mat(1, 1, {1.0});
  s.U = unit_box(1);
  s.X = unit_box(1);
  expect_error(ErrorCode::NotDetectable, [&] { validate(s); });
}

TEST(Ocp, ZeroInputWeightRejected) {
  auto s = example2_spec();
  s.R.setZero();
  expect_error(ErrorCode::BadWeights, [&] { validate(s); });
}

TEST(Ocp, AsymmetricStateWeightRejected) {
  auto s = example2_spec();
  s.Q(0, 1) = 0.5;
  expect_error(ErrorCode::BadWeights, [&] { validate(s); });
}

TEST(Ocp, UnboundedStateSetRejected) {
  auto s = example2_spec();
  s.X = Polytope(mat(1, 2, {1.0, 0.0}), Vector::Ones(1));
  expect_error(ErrorCode::DegenerateConstraintSet, [&] { validate(s); });
}

TEST(Ocp, DimensionMismatchRejected) {
  auto s = example2_spec();
  s.B = Matrix::Identity(3, 2);
  expect_error(ErrorCode::DimensionMismatch, [&] { validate(s); });
}

TEST(Ocp, SuppliedTerminalIngredientsAreUsed) {
  auto s = example2_spec();
  s.P = Matrix(2 * 20001.25 * Matrix::Identity(2, 2));
  s.T = Polytope::box(-0.5 * Vector::Ones(2), 0.5 * Vector::Ones(2));
  const auto ocp = validate(s);
  EXPECT_EQ(ocp.P, *s.P);
  EXPECT_TRUE(same_set(ocp.T, *s.T));
}

TEST(Ocp, NonPositiveDefiniteTerminalWeightRejected) {
  auto s = example2_spec();
  s.P = Matrix(-Matrix::Identity(2, 2));
  expect_error(ErrorCode::BadWeights, [&] { validate(s); });
}

TEST(InvariantSet, DeadbeatTakesOneStep) {
  const Matrix k = mat(2, 2, {2.0, 0.0, 0.0, 0.5});
  const auto t = max_invariant_set(Matrix::Zero(2, 2), unit_box(2), unit_box(2), k);
  EXPECT_TRUE(same_set(t, Polytope::box(-Vector(Eigen::Vector2d(0.5, 1.0)), Vector(Eigen::Vector2d(0.5, 1.0)))));
}

TEST(InvariantSet, ContractionKeepsBox) {
  const auto t = max_invariant_set(0.5 * Matrix::Identity(2, 2), unit_box(2), unit_box(2), Matrix::Zero(2, 2));
  EXPECT_TRUE(same_set(t, unit_box(2)));
}

TEST(InvariantSet, UnstableClosedLoopRejected) {
  expect_error(ErrorCode::NoFiniteDetermination, [&] {
    max_invariant_set(2.0 * Matrix::Identity(2, 2), unit_box(2), unit_box(2), Matrix::Zero(2, 2));
  });
}

TEST(InvariantSet, ExampleTerminalSetIsInvariant) {
  const auto ocp = validate(example2_spec());
  EXPECT_EQ(ocp.T.num_rows(), 4);
  EXPECT_GT(chebyshev(ocp.T).radius, 0.0);
  const Matrix acl = ocp.closed_loop();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int inside = 0;
  double worst = -kInf;
  while (inside < 10'000) {
    const Vector x = Vector::NullaryExpr(2, [&] { return u(rng); });
    if (!ocp.T.contains(x, 0.0)) continue;
    ++inside;
    worst = std::max({worst, ocp.T.max_violation(acl * x), ocp.X.max_violation(x),
                      ocp.U.max_violation(ocp.K * x)});
  }
  EXPECT_LE(worst, 1e-9);
}
