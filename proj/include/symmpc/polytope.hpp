#ifndef SYMMPC_POLYTOPE_HPP_
#define SYMMPC_POLYTOPE_HPP_

/**
 * @file
 * @brief Half-space representation polytopes {x | normals * x <= offsets}.
 *
 * Constraint sets (input, state, terminal) are kept in unit-offset form:
 * every row is scaled so that its offset equals one, which requires the
 * origin to lie strictly inside. Critical regions generally do not contain
 * the origin and are kept in unit-normal form instead.
 */

#include <algorithm>
#include <cmath>
#include <vector>

#include "simplex.hpp"
#include "types.hpp"

namespace symmpc {

class Polytope {
 public:
  Polytope() = default;

  Polytope(Matrix normals, Vector offsets) : normals_(std::move(normals)), offsets_(std::move(offsets)) {
    if (normals_.rows() != offsets_.size())
      throw Error(ErrorCode::DimensionMismatch, "polytope normals/offsets row count differ");
  }

  /// Axis-aligned box lo <= x <= hi.
  static Polytope box(const Vector& lo, const Vector& hi) {
    const Eigen::Index n = lo.size();
    Matrix a(2 * n, n);
    a << Matrix::Identity(n, n), -Matrix::Identity(n, n);
    Vector b(2 * n);
    b << hi, -lo;
    return {std::move(a), std::move(b)};
  }

  const Matrix& normals() const { return normals_; }
  const Vector& offsets() const { return offsets_; }
  Eigen::Index dim() const { return normals_.cols(); }
  Eigen::Index num_rows() const { return normals_.rows(); }

  bool contains(const Vector& x, double tol = 1e-9) const {
    if (num_rows() == 0) return true;
    return ((normals_ * x - offsets_).array() <= tol).all();
  }

  /// Largest constraint violation at x (negative when strictly inside).
  double max_violation(const Vector& x) const {
    if (num_rows() == 0) return -kInf;
    return (normals_ * x - offsets_).maxCoeff();
  }

  friend bool operator==(const Polytope& a, const Polytope& b) {
    return a.normals_ == b.normals_ && a.offsets_ == b.offsets_;
  }

 private:
  Matrix normals_;
  Vector offsets_;
};

/// Stack the rows of two polytopes in the same space.
inline Polytope intersect(const Polytope& a, const Polytope& b) {
  if (a.num_rows() == 0) return b;
  if (b.num_rows() == 0) return a;
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "intersect: dimensions differ");
  Matrix n(a.num_rows() + b.num_rows(), a.dim());
  n << a.normals(), b.normals();
  Vector o(n.rows());
  o << a.offsets(), b.offsets();
  return {std::move(n), std::move(o)};
}

/// Scale every row to unit offset.
inline Polytope normalize(const Polytope& p) {
  Matrix n = p.normals();
  for (Eigen::Index i = 0; i < p.num_rows(); ++i) {
    const double o = p.offsets()(i);
    if (!(o > 1e-12))
      throw Error(ErrorCode::NonPositiveOffset,
                  "row " + std::to_string(i) + " has offset " + std::to_string(o) +
                      "; the origin is not strictly interior");
    if (o != 1.0) n.row(i) /= o;
  }
  return {std::move(n), Vector::Ones(p.num_rows())};
}

/// Scale every row to unit Euclidean normal. Rows with a zero normal are kept as-is.
inline Polytope normalize_rows(const Polytope& p) {
  Matrix n = p.normals();
  Vector o = p.offsets();
  for (Eigen::Index i = 0; i < p.num_rows(); ++i) {
    const double s = n.row(i).norm();
    if (s > 0.0) {
      n.row(i) /= s;
      o(i) /= s;
    }
  }
  return {std::move(n), std::move(o)};
}

struct ChebyshevBall {
  Vector center;
  double radius = 0.0;  // < 0: empty; +inf: unbounded
};

inline ChebyshevBall chebyshev(const Polytope& p) {
  const Eigen::Index n = p.dim();
  const Eigen::Index m = p.num_rows();
  LpProblem lp;
  lp.objective = Vector::Zero(n + 1);
  lp.objective(n) = -1.0;
  lp.ineq_matrix.resize(m, n + 1);
  lp.ineq_matrix.leftCols(n) = p.normals();
  for (Eigen::Index i = 0; i < m; ++i) lp.ineq_matrix(i, n) = p.normals().row(i).norm();
  lp.ineq_rhs = p.offsets();
  lp.lower = Vector::Constant(n + 1, -kInf);
  lp.upper = Vector::Constant(n + 1, kInf);
  LpResult r;
  try {
    r = solve_lp(lp);
  } catch (const Error& e) {
    throw Error(ErrorCode::LpFailure, std::string("chebyshev: ") + e.what());
  }
  switch (r.status) {
    case LpStatus::Optimal: return {r.x.head(n), r.x(n)};
    case LpStatus::Unbounded: return {Vector::Zero(n), kInf};
    case LpStatus::Infeasible: return {Vector::Zero(n), -kInf};
  }
  return {};
}

namespace detail {

/// max c'x over the rows of p selected by mask; +inf when unbounded, -inf when infeasible.
inline double support_value(const Polytope& p, const std::vector<bool>& mask,
                            const Eigen::RowVectorXd& c) {
  const Eigen::Index n = p.dim();
  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < p.num_rows(); ++i)
    if (mask[i]) rows.push_back(i);
  LpProblem lp;
  lp.objective = -c.transpose();
  lp.ineq_matrix.resize(static_cast<Eigen::Index>(rows.size()), n);
  lp.ineq_rhs.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    lp.ineq_matrix.row(static_cast<Eigen::Index>(k)) = p.normals().row(rows[k]);
    lp.ineq_rhs(static_cast<Eigen::Index>(k)) = p.offsets()(rows[k]);
  }
  lp.lower = Vector::Constant(n, -kInf);
  lp.upper = Vector::Constant(n, kInf);
  LpResult r;
  try {
    r = solve_lp(lp);
  } catch (const Error& e) {
    throw Error(ErrorCode::LpFailure, std::string("support: ") + e.what());
  }
  if (r.status == LpStatus::Unbounded) return kInf;
  if (r.status == LpStatus::Infeasible) return -kInf;
  return c.dot(r.x);
}

}  // namespace detail

/// max normals.row(i) * x over p.
inline double support(const Polytope& p, const Eigen::RowVectorXd& direction) {
  return detail::support_value(p, std::vector<bool>(p.num_rows(), true), direction);
}

/**
 * Drops every row that does not define a facet. A row is removed when its
 * support value over the remaining rows does not exceed its offset by more
 * than tol, so duplicated and weakly redundant rows go as well. Rows are
 * examined from last to first, which keeps the first copy of duplicates.
 */
inline Polytope remove_redundancy(const Polytope& p, double tol = 1e-9) {
  if (p.num_rows() == 0) return p;
  const ChebyshevBall ball = chebyshev(p);
  if (ball.radius < -tol) throw Error(ErrorCode::EmptyPolytope, "remove_redundancy: empty polytope");

  const Eigen::Index m = p.num_rows();
  std::vector<bool> keep(m, true);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (p.normals().row(i).cwiseAbs().maxCoeff() == 0.0) keep[i] = false;
  }
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    if (!keep[i]) continue;
    keep[i] = false;
    const double s = detail::support_value(p, keep, p.normals().row(i));
    const double d = p.offsets()(i);
    if (s > d + tol * std::max(1.0, std::abs(d))) keep[i] = true;
  }

  std::vector<Eigen::Index> rows;
  for (Eigen::Index i = 0; i < m; ++i)
    if (keep[i]) rows.push_back(i);
  Matrix n(static_cast<Eigen::Index>(rows.size()), p.dim());
  Vector o(n.rows());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    n.row(static_cast<Eigen::Index>(k)) = p.normals().row(rows[k]);
    o(static_cast<Eigen::Index>(k)) = p.offsets()(rows[k]);
  }
  return {std::move(n), std::move(o)};
}

/// Image {M x | x in p} for invertible M.
inline Polytope linear_image(const Polytope& p, const Matrix& m) {
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible() || std::abs(lu.determinant()) < 1e-12)
    throw Error(ErrorCode::SingularMap, "linear_image: map is singular");
  return {p.normals() * lu.inverse(), p.offsets()};
}

namespace detail {

/// Bijective row matching between two row sets of equal size.
inline bool rows_match(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  std::vector<bool> used(b.rows(), false);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    bool found = false;
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      if (used[j]) continue;
      const double scale = std::max(max_abs(a.row(i)), max_abs(b.row(j)));
      if ((a.row(i) - b.row(j)).cwiseAbs().maxCoeff() <= scaled_tolerance(tol, scale)) {
        used[j] = true;
        found = true;
        break;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace detail

/**
 * True iff {x | normals * M x <= 1} equals p. p must be unit-offset and
 * irredundant; equal full-dimensional polytopes in that form have the same
 * rows up to order.
 */
inline bool linear_image_equals(const Polytope& p, const Matrix& m, double tol = 1e-9) {
  if (m.rows() != m.cols() || m.rows() != p.dim())
    throw Error(ErrorCode::DimensionMismatch, "linear_image_equals: map has wrong shape");
  if (std::abs(m.determinant()) < 1e-12) throw Error(ErrorCode::SingularMap, "linear_image_equals");
  return detail::rows_match(p.normals() * m, p.normals(), tol);
}

/// Set equality of two irredundant polytopes by row matching in unit-normal form.
inline bool same_set(const Polytope& a, const Polytope& b, double tol = 1e-9) {
  if (a.dim() != b.dim() || a.num_rows() != b.num_rows()) return false;
  const Polytope na = normalize_rows(a);
  const Polytope nb = normalize_rows(b);
  Matrix ra(na.num_rows(), na.dim() + 1);
  ra << na.normals(), na.offsets();
  Matrix rb(nb.num_rows(), nb.dim() + 1);
  rb << nb.normals(), nb.offsets();
  return detail::rows_match(ra, rb, tol);
}

}  // namespace symmpc

#endif  // SYMMPC_POLYTOPE_HPP_
