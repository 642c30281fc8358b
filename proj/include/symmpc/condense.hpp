#ifndef SYMMPC_CONDENSE_HPP_
#define SYMMPC_CONDENSE_HPP_

/**
 * @file
 * @brief Dense condensation of the OCP into
 *
 *   min_U  1/2 x0'Y x0 + x0'F U + 1/2 U'H U   s.t.  G U <= E x0 + w,
 *
 * with the states eliminated through the dynamics. Constraint rows are
 * ordered by stage: for k = 0..N-1 the rows of u(k) in U, then the rows of
 * x(k) in X; the rows of x(N) in T come last. All rows have unit
 * right-hand side.
 */

#include <vector>

#include "ocp.hpp"
#include "types.hpp"

namespace symmpc {

struct CondensedQp {
  ValidatedOcp ocp;
  int horizon = 0;
  Matrix Y;  // n x n
  Matrix F;  // n x Nm
  Matrix H;  // Nm x Nm
  Matrix G;  // q x Nm
  Matrix E;  // q x n
  Vector w;  // q, all ones
  int q = 0;
  int q_u = 0;
  int q_x = 0;
  int q_t = 0;
  int q0 = 0;  // rows per stage k < N
  std::vector<int> stage_of_row;  // indexed by 0-based row

  Eigen::Index n() const { return E.cols(); }
  Eigen::Index num_inputs() const { return H.rows(); }
  /// Stage of the 1-based constraint i.
  int stage(int i) const { return stage_of_row[static_cast<std::size_t>(i - 1)]; }
};

inline CondensedQp condense(const ValidatedOcp& ocp, int horizon) {
  if (horizon < 1) throw Error(ErrorCode::BadHorizon, "horizon must be at least 1");
  const Eigen::Index n = ocp.n();
  const Eigen::Index m = ocp.m();
  const Eigen::Index nu = horizon * m;

  CondensedQp qp;
  qp.ocp = ocp;
  qp.horizon = horizon;
  qp.q_u = static_cast<int>(ocp.U.num_rows());
  qp.q_x = static_cast<int>(ocp.X.num_rows());
  qp.q_t = static_cast<int>(ocp.T.num_rows());
  qp.q0 = qp.q_u + qp.q_x;
  qp.q = horizon * qp.q0 + qp.q_t;

  // x(k) = state_map[k] x0 + input_map[k] U
  std::vector<Matrix> state_map(horizon + 1);
  std::vector<Matrix> input_map(horizon + 1);
  state_map[0] = Matrix::Identity(n, n);
  input_map[0] = Matrix::Zero(n, nu);
  for (int k = 1; k <= horizon; ++k) {
    state_map[k] = ocp.A * state_map[k - 1];
    input_map[k] = ocp.A * input_map[k - 1];
    input_map[k].middleCols((k - 1) * m, m) += ocp.B;
  }

  qp.H = Matrix::Zero(nu, nu);
  qp.F = Matrix::Zero(n, nu);
  qp.Y = ocp.Q;
  for (int k = 0; k < horizon; ++k) qp.H.block(k * m, k * m, m, m) = ocp.R;
  for (int k = 1; k <= horizon; ++k) {
    const Matrix& weight = k < horizon ? ocp.Q : ocp.P;
    qp.H.noalias() += input_map[k].transpose() * weight * input_map[k];
    qp.F.noalias() += state_map[k].transpose() * weight * input_map[k];
    qp.Y.noalias() += state_map[k].transpose() * weight * state_map[k];
  }
  qp.H = 0.5 * (qp.H + qp.H.transpose()).eval();
  qp.Y = 0.5 * (qp.Y + qp.Y.transpose()).eval();

  qp.G = Matrix::Zero(qp.q, nu);
  qp.E = Matrix::Zero(qp.q, n);
  qp.w = Vector::Ones(qp.q);
  qp.stage_of_row.assign(static_cast<std::size_t>(qp.q), 0);
  int row = 0;
  for (int k = 0; k < horizon; ++k) {
    for (int i = 0; i < qp.q_u; ++i, ++row) {
      qp.G.row(row).segment(k * m, m) = ocp.U.normals().row(i);
      qp.stage_of_row[row] = k;
    }
    for (int i = 0; i < qp.q_x; ++i, ++row) {
      qp.G.row(row) = ocp.X.normals().row(i) * input_map[k];
      qp.E.row(row) = -ocp.X.normals().row(i) * state_map[k];
      qp.stage_of_row[row] = k;
    }
  }
  for (int i = 0; i < qp.q_t; ++i, ++row) {
    qp.G.row(row) = ocp.T.normals().row(i) * input_map[horizon];
    qp.E.row(row) = -ocp.T.normals().row(i) * state_map[horizon];
    qp.stage_of_row[row] = horizon;
  }

  if (!qp.H.allFinite() || !qp.F.allFinite() || !qp.G.allFinite() || !qp.E.allFinite())
    throw Error(ErrorCode::CondenseFailure, "non-finite entries after condensation");
  Eigen::SelfAdjointEigenSolver<Matrix> es(qp.H, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 1e-10))
    throw Error(ErrorCode::CondenseFailure, "H is not positive definite");
  return qp;
}

/// The same problem condensed at a shorter (or equal) horizon.
inline CondensedQp subqp(const CondensedQp& qp, int horizon) {
  if (horizon < 1 || horizon > qp.horizon)
    throw Error(ErrorCode::BadHorizon, "subqp horizon " + std::to_string(horizon) +
                                           " outside [1, " + std::to_string(qp.horizon) + "]");
  if (horizon == qp.horizon) return qp;
  return condense(qp.ocp, horizon);
}

}  // namespace symmpc

#endif  // SYMMPC_CONDENSE_HPP_
