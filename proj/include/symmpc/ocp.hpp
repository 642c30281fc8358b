#ifndef SYMMPC_OCP_HPP_
#define SYMMPC_OCP_HPP_

/**
 * @file
 * @brief Constrained linear-quadratic optimal control problem definition.
 *
 *   min  |x(N)|_P^2 + sum_{k<N} |x(k)|_Q^2 + |u(k)|_R^2
 *   s.t. x(k+1) = A x(k) + B u(k),  u(k) in U,  x(k) in X,  x(N) in T.
 *
 * P defaults to the unconstrained infinite-horizon cost matrix (stabilizing
 * DARE solution) and T to the maximal constraint-admissible positively
 * invariant set of the resulting LQR closed loop.
 */

#include <Eigen/Eigenvalues>

#include <complex>
#include <optional>

#include "polytope.hpp"
#include "types.hpp"

namespace symmpc {

struct OcpSpec {
  Matrix A;
  Matrix B;
  Matrix Q;
  Matrix R;
  Polytope U;
  Polytope X;
  int horizon = 1;
  std::optional<Matrix> P;
  std::optional<Polytope> T;
};

struct TerminalIngredients {
  Matrix P;
  Matrix K;  // u = K x is the unconstrained optimal feedback
  Polytope T;
};

/// An OCP whose assumptions have been checked. U, X and T are unit-offset and irredundant.
struct ValidatedOcp {
  Matrix A;
  Matrix B;
  Matrix Q;
  Matrix R;
  Matrix P;
  Matrix K;
  Polytope U;
  Polytope X;
  Polytope T;
  int horizon = 1;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index m() const { return B.cols(); }
  Matrix closed_loop() const { return A + B * K; }
};

struct DareSolution {
  Matrix P;
  Matrix K;
};

namespace detail {

inline Eigen::Index complex_rank(const Eigen::MatrixXcd& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  const auto& s = svd.singularValues();
  const double cutoff = tol * std::max(1.0, s(0));
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > cutoff) ++r;
  return r;
}

inline Matrix symmetric_sqrt(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace detail

/// Hautus test on every eigenvalue outside the open unit disc.
inline bool is_stabilizable(const Matrix& a, const Matrix& b, double tol = 1e-9) {
  const Eigen::Index n = a.rows();
  Eigen::ComplexEigenSolver<Matrix> es(a);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> lambda = es.eigenvalues()(k);
    if (std::abs(lambda) < 1.0 - tol) continue;
    Eigen::MatrixXcd h(n, n + b.cols());
    h << a.cast<std::complex<double>>() - lambda * Eigen::MatrixXcd::Identity(n, n),
        b.cast<std::complex<double>>();
    if (detail::complex_rank(h, tol) < n) return false;
  }
  return true;
}

/// Detectability of (Q^{1/2}, A) by the dual Hautus test.
inline bool is_detectable(const Matrix& q, const Matrix& a, double tol = 1e-9) {
  const Eigen::Index n = a.rows();
  const Matrix c = detail::symmetric_sqrt(q);
  Eigen::ComplexEigenSolver<Matrix> es(a);
  for (Eigen::Index k = 0; k < n; ++k) {
    const std::complex<double> lambda = es.eigenvalues()(k);
    if (std::abs(lambda) < 1.0 - tol) continue;
    Eigen::MatrixXcd h(2 * n, n);
    h << a.cast<std::complex<double>>() - lambda * Eigen::MatrixXcd::Identity(n, n),
        c.cast<std::complex<double>>();
    if (detail::complex_rank(h, tol) < n) return false;
  }
  return true;
}

inline Matrix lqr_gain(const Matrix& a, const Matrix& b, const Matrix& r, const Matrix& p) {
  const Matrix s = r + b.transpose() * p * b;
  return -s.ldlt().solve(b.transpose() * p * a);
}

inline Matrix dare_residual(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                            const Matrix& p) {
  const Matrix s = r + b.transpose() * p * b;
  const Matrix bpa = b.transpose() * p * a;
  return a.transpose() * p * a - p - bpa.transpose() * s.ldlt().solve(bpa) + q;
}

/**
 * Riccati recursion P <- Q + A'PA - A'PB (R + B'PB)^{-1} B'PA started at Q,
 * run until successive iterates agree to 1e-12 relative to |P|_max.
 */
inline DareSolution solve_dare(const Matrix& a, const Matrix& b, const Matrix& q, const Matrix& r,
                               long max_iterations = 100'000) {
  Matrix p = q;
  for (long it = 0; it < max_iterations; ++it) {
    const Matrix s = r + b.transpose() * p * b;
    const Matrix bpa = b.transpose() * p * a;
    Matrix next = q + a.transpose() * p * a - bpa.transpose() * s.ldlt().solve(bpa);
    next = 0.5 * (next + next.transpose()).eval();
    if (!next.allFinite()) break;
    const double change = max_abs(next - p);
    p = std::move(next);
    if (change < 1e-12 * std::max(1.0, max_abs(p))) return {p, lqr_gain(a, b, r, p)};
  }
  throw Error(ErrorCode::NoConvergence, "Riccati recursion did not converge");
}

/**
 * Maximal positively invariant subset of {x in X | K x in U} under
 * x+ = A_cl x. Rows h' A_cl^k x <= 1 are appended step by step until a
 * whole step contributes no facet.
 */
inline Polytope max_invariant_set(const Matrix& a_cl, const Polytope& x_set, const Polytope& u_set,
                                  const Matrix& k, int max_steps = 500, double tol = 1e-9) {
  const Eigen::Index n = a_cl.rows();
  Eigen::EigenSolver<Matrix> es(a_cl, false);
  if (es.eigenvalues().cwiseAbs().maxCoeff() >= 1.0)
    throw Error(ErrorCode::NoFiniteDetermination, "closed loop is not Schur stable");

  const Polytope base = intersect(x_set, Polytope(u_set.normals() * k, u_set.offsets()));
  Polytope current = remove_redundancy(base, tol);
  Matrix power = a_cl;
  for (int step = 1; step <= max_steps; ++step) {
    const Matrix rows = base.normals() * power;
    std::vector<Eigen::Index> added;
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      if (rows.row(i).cwiseAbs().maxCoeff() == 0.0) continue;
      if (support(current, rows.row(i)) > base.offsets()(i) + tol) added.push_back(i);
    }
    if (added.empty()) return normalize(remove_redundancy(current, tol));
    Matrix extra(static_cast<Eigen::Index>(added.size()), n);
    Vector extra_off(extra.rows());
    for (std::size_t j = 0; j < added.size(); ++j) {
      extra.row(static_cast<Eigen::Index>(j)) = rows.row(added[j]);
      extra_off(static_cast<Eigen::Index>(j)) = base.offsets()(added[j]);
    }
    current = remove_redundancy(intersect(current, Polytope(extra, extra_off)), tol);
    power = (power * a_cl).eval();
  }
  throw Error(ErrorCode::NoFiniteDetermination,
              "invariant set not determined within " + std::to_string(max_steps) + " steps");
}

namespace detail {

inline Polytope ingest_constraint_set(const Polytope& p, Eigen::Index dim, const char* name) {
  if (p.dim() != dim)
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has the wrong dimension");
  if (p.num_rows() == 0)
    throw Error(ErrorCode::DegenerateConstraintSet, std::string(name) + " has no rows");
  Polytope out;
  try {
    out = remove_redundancy(normalize(p));
  } catch (const Error& e) {
    throw Error(ErrorCode::DegenerateConstraintSet, std::string(name) + ": " + e.what());
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    const Eigen::RowVectorXd e = Vector::Unit(dim, i).transpose();
    if (!std::isfinite(support(out, e)) || !std::isfinite(support(out, -e)))
      throw Error(ErrorCode::DegenerateConstraintSet, std::string(name) + " is unbounded");
  }
  return out;
}

}  // namespace detail

inline ValidatedOcp validate(const OcpSpec& spec, double tol = 1e-9) {
  const Eigen::Index n = spec.A.rows();
  const Eigen::Index m = spec.B.cols();
  if (n == 0 || spec.A.cols() != n || spec.B.rows() != n || spec.Q.rows() != n ||
      spec.Q.cols() != n || spec.R.rows() != m || spec.R.cols() != m || m == 0)
    throw Error(ErrorCode::DimensionMismatch, "A, B, Q, R dimensions are inconsistent");
  if (spec.horizon < 1) throw Error(ErrorCode::BadHorizon, "horizon must be at least 1");

  if (max_abs(spec.R - spec.R.transpose()) > scaled_tolerance(tol, max_abs(spec.R)))
    throw Error(ErrorCode::BadWeights, "R is not symmetric");
  if (max_abs(spec.Q - spec.Q.transpose()) > scaled_tolerance(tol, max_abs(spec.Q)))
    throw Error(ErrorCode::BadWeights, "Q is not symmetric");
  {
    Eigen::SelfAdjointEigenSolver<Matrix> er(spec.R, Eigen::EigenvaluesOnly);
    if (!(er.eigenvalues().minCoeff() > scaled_tolerance(tol, max_abs(spec.R))))
      throw Error(ErrorCode::BadWeights, "R is not positive definite");
    Eigen::SelfAdjointEigenSolver<Matrix> eq(spec.Q, Eigen::EigenvaluesOnly);
    if (eq.eigenvalues().minCoeff() < -scaled_tolerance(tol, max_abs(spec.Q)))
      throw Error(ErrorCode::BadWeights, "Q is not positive semidefinite");
  }
  if (!is_stabilizable(spec.A, spec.B, tol))
    throw Error(ErrorCode::NotStabilizable, "(A, B) is not stabilizable");
  if (!is_detectable(spec.Q, spec.A, tol))
    throw Error(ErrorCode::NotDetectable, "(Q^1/2, A) is not detectable");

  ValidatedOcp ocp;
  ocp.A = spec.A;
  ocp.B = spec.B;
  ocp.Q = spec.Q;
  ocp.R = spec.R;
  ocp.horizon = spec.horizon;
  ocp.U = detail::ingest_constraint_set(spec.U, m, "U");
  ocp.X = detail::ingest_constraint_set(spec.X, n, "X");

  if (spec.P) {
    const Matrix& p = *spec.P;
    if (p.rows() != n || p.cols() != n)
      throw Error(ErrorCode::DimensionMismatch, "P has the wrong shape");
    Eigen::SelfAdjointEigenSolver<Matrix> ep(p, Eigen::EigenvaluesOnly);
    if (max_abs(p - p.transpose()) > scaled_tolerance(tol, max_abs(p)) ||
        !(ep.eigenvalues().minCoeff() > 0.0))
      throw Error(ErrorCode::BadWeights, "P is not symmetric positive definite");
    ocp.P = p;
    ocp.K = lqr_gain(ocp.A, ocp.B, ocp.R, p);
  } else {
    DareSolution dare = solve_dare(ocp.A, ocp.B, ocp.Q, ocp.R);
    ocp.P = std::move(dare.P);
    ocp.K = std::move(dare.K);
  }

  if (spec.T) {
    ocp.T = detail::ingest_constraint_set(*spec.T, n, "T");
  } else {
    ocp.T = max_invariant_set(ocp.closed_loop(), ocp.X, ocp.U, ocp.K);
  }
  return ocp;
}

}  // namespace symmpc

#endif  // SYMMPC_OCP_HPP_
