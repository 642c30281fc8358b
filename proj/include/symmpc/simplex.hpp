#ifndef SYMMPC_SIMPLEX_HPP_
#define SYMMPC_SIMPLEX_HPP_

/**
 * @file
 * @brief Dense two-phase primal simplex.
 *
 * Solves
 *
 *   min c'x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lower <= x <= upper,
 *
 * where bounds may be infinite. The problem is brought into standard form
 * (free variables split, finite lower bounds shifted, rows equilibrated and
 * sign-flipped so that the right-hand side is nonnegative) and solved on a
 * dense tableau. Pricing is Dantzig's rule with smallest-index tie breaking;
 * after a streak of degenerate pivots the solver switches to Bland's rule
 * until the next nondegenerate pivot, which rules out cycling. The pivot
 * sequence depends only on the input data, so results are reproducible
 * bit-for-bit.
 */

#include <cmath>
#include <vector>

#include "types.hpp"

namespace symmpc {

struct LpProblem {
  Vector objective;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ineq_matrix;
  Vector ineq_rhs;
  /// Empty bound vectors mean x >= 0. Use -kInf / kInf for free directions.
  Vector lower;
  Vector upper;

  Eigen::Index num_variables() const { return objective.size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Vector x;
  double objective = kInf;
  long pivots = 0;
};

struct LpOptions {
  double feasibility = 1e-8;
  double optimality = 1e-9;
  double pivot = 1e-9;
  long max_pivots = 1'000'000;
  int degenerate_streak = 50;
};

namespace detail {

struct VariableMap {
  int plus = -1;   // column of the (shifted) nonnegative part
  int minus = -1;  // column of the negative part for free variables
  double sign = 1.0;
  double shift = 0.0;
};

class SimplexTableau {
 public:
  SimplexTableau(Matrix rows, Vector rhs, std::vector<int> basis, std::vector<bool> artificial,
                 Vector phase2_cost, const LpOptions& opt)
      : opt_(opt), m_(rows.rows()), n_(rows.cols()), basis_(std::move(basis)),
        artificial_(std::move(artificial)) {
    table_ = Matrix::Zero(m_ + 2, n_ + 1);
    table_.topLeftCorner(m_, n_) = rows;
    table_.col(n_).head(m_) = rhs;
    // phase-2 reduced costs; every initial basic column has zero phase-2 cost
    table_.row(m_ + 1).head(n_) = phase2_cost.transpose();
    // phase-1 reduced costs: d_j = [j artificial] - sum over artificial-basic rows
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (artificial_[basis_[i]]) table_.row(m_) -= table_.row(i);
    }
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (artificial_[j]) table_(m_, j) = 0.0;
    }
  }

  bool has_artificial_basis() const {
    for (Eigen::Index i = 0; i < m_; ++i)
      if (artificial_[basis_[i]]) return true;
    return false;
  }

  double phase1_objective() const { return -table_(m_, n_); }

  /// Returns false on unbounded.
  bool optimize(Eigen::Index cost_row, bool allow_artificial) {
    bool bland = false;
    int streak = 0;
    for (;;) {
      Eigen::Index enter = -1;
      double best = -opt_.optimality;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (!allow_artificial && artificial_[j]) continue;
        const double d = table_(cost_row, j);
        if (d < best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return true;

      Eigen::Index leave = -1;
      double min_ratio = kInf;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double a = table_(i, enter);
        if (a <= opt_.pivot) continue;
        const double ratio = std::max(table_(i, n_), 0.0) / a;
        if (leave < 0 || ratio < min_ratio - 1e-12 * (1.0 + min_ratio)) {
          leave = i;
          min_ratio = ratio;
        } else if (ratio <= min_ratio + 1e-12 * (1.0 + min_ratio)) {
          const bool better = bland ? basis_[i] < basis_[leave] : a > table_(leave, enter);
          if (better) {
            leave = i;
            min_ratio = std::min(min_ratio, ratio);
          }
        }
      }
      if (leave < 0) return false;

      if (min_ratio <= 1e-12) {
        if (++streak >= opt_.degenerate_streak) bland = true;
      } else {
        streak = 0;
        bland = false;
      }
      pivot(leave, enter);
    }
  }

  /// Pivots remaining zero-level artificials out of the basis.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!artificial_[basis_[i]]) continue;
      Eigen::Index col = -1;
      double best = opt_.pivot;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (artificial_[j]) continue;
        if (std::abs(table_(i, j)) > best) {
          best = std::abs(table_(i, j));
          col = j;
        }
      }
      // no candidate: the row is linearly dependent and stays inert
      if (col < 0) continue;
      table_(i, n_) = 0.0;
      pivot(i, col);
    }
  }

  Vector basic_solution() const {
    Vector y = Vector::Zero(n_);
    for (Eigen::Index i = 0; i < m_; ++i) y(basis_[i]) = std::max(table_(i, n_), 0.0);
    return y;
  }

  long pivots() const { return pivots_; }

 private:
  void pivot(Eigen::Index r, Eigen::Index c) {
    if (++pivots_ > opt_.max_pivots)
      throw Error(ErrorCode::NumericalFailure, "simplex exceeded the pivot limit");
    const double p = table_(r, c);
    table_.row(r) /= p;
    table_(r, c) = 1.0;
    Eigen::RowVectorXd prow = table_.row(r);
    Vector col = table_.col(c);
    col(r) = 0.0;
    table_.noalias() -= col * prow;
    table_.col(c).setZero();
    table_(r, c) = 1.0;
    basis_[r] = static_cast<int>(c);
  }

  LpOptions opt_;
  Eigen::Index m_;
  Eigen::Index n_;
  Matrix table_;
  std::vector<int> basis_;
  std::vector<bool> artificial_;
  long pivots_ = 0;
};

}  // namespace detail

inline LpResult solve_lp(const LpProblem& p, const LpOptions& opt = {}) {
  const Eigen::Index nvar = p.num_variables();
  const Eigen::Index me = p.eq_matrix.rows();
  const Eigen::Index mi = p.ineq_matrix.rows();
  if ((me > 0 && p.eq_matrix.cols() != nvar) || p.eq_rhs.size() != me ||
      (mi > 0 && p.ineq_matrix.cols() != nvar) || p.ineq_rhs.size() != mi ||
      (p.lower.size() != 0 && p.lower.size() != nvar) ||
      (p.upper.size() != 0 && p.upper.size() != nvar))
    throw Error(ErrorCode::DimensionMismatch, "inconsistent LP dimensions");

  const Vector lower = p.lower.size() ? p.lower : Vector::Zero(nvar);
  const Vector upper = p.upper.size() ? p.upper : Vector::Constant(nvar, kInf);

  LpResult result;

  // variable substitution into nonnegative columns
  std::vector<detail::VariableMap> vmap(nvar);
  std::vector<std::pair<int, double>> bound_rows;  // (column, width)
  int ncol = 0;
  for (Eigen::Index j = 0; j < nvar; ++j) {
    auto& v = vmap[j];
    if (std::isfinite(lower(j))) {
      if (upper(j) < lower(j)) return result;  // empty box
      v.plus = ncol++;
      v.shift = lower(j);
      if (std::isfinite(upper(j))) bound_rows.emplace_back(v.plus, upper(j) - lower(j));
    } else if (std::isfinite(upper(j))) {
      v.plus = ncol++;
      v.sign = -1.0;
      v.shift = upper(j);
    } else {
      v.plus = ncol++;
      v.minus = ncol++;
    }
  }

  const Eigen::Index mb = static_cast<Eigen::Index>(bound_rows.size());
  const Eigen::Index m = me + mi + mb;
  const Eigen::Index nslack = mi + mb;

  Matrix rows = Matrix::Zero(m, ncol + nslack);
  Vector rhs(m);
  auto scatter = [&](Eigen::Index r, const Eigen::RowVectorXd& coeffs, double b) {
    for (Eigen::Index j = 0; j < nvar; ++j) {
      const double a = coeffs(j);
      if (a == 0.0) continue;
      const auto& v = vmap[j];
      rows(r, v.plus) += a * v.sign;
      if (v.minus >= 0) rows(r, v.minus) -= a;
      b -= a * v.shift;
    }
    rhs(r) = b;
  };
  for (Eigen::Index i = 0; i < me; ++i) scatter(i, p.eq_matrix.row(i), p.eq_rhs(i));
  for (Eigen::Index i = 0; i < mi; ++i) {
    scatter(me + i, p.ineq_matrix.row(i), p.ineq_rhs(i));
    rows(me + i, ncol + i) = 1.0;
  }
  for (Eigen::Index k = 0; k < mb; ++k) {
    rows(me + mi + k, bound_rows[k].first) = 1.0;
    rows(me + mi + k, ncol + mi + k) = 1.0;
    rhs(me + mi + k) = bound_rows[k].second;
  }

  // equilibrate on structural coefficients, drop empty rows, make rhs >= 0
  std::vector<Eigen::Index> keep;
  keep.reserve(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double scale = rows.row(i).head(ncol).cwiseAbs().maxCoeff();
    const bool is_eq = i < me;
    if (scale == 0.0) {
      const double tol = opt.feasibility * std::max(1.0, std::abs(rhs(i)));
      if ((is_eq && std::abs(rhs(i)) > tol) || (!is_eq && rhs(i) < -tol)) return result;
      continue;
    }
    rows.row(i) /= scale;
    rhs(i) /= scale;
    if (!is_eq) rows(i, ncol + (i - me)) = 1.0;
    if (rhs(i) < 0.0) {
      rows.row(i) *= -1.0;
      rhs(i) = -rhs(i);
    }
    keep.push_back(i);
  }

  const Eigen::Index mk = static_cast<Eigen::Index>(keep.size());
  std::vector<int> basis(mk);
  int nart = 0;
  for (Eigen::Index r = 0; r < mk; ++r) {
    const Eigen::Index i = keep[r];
    if (i >= me && rows(i, ncol + (i - me)) == 1.0) {
      basis[r] = static_cast<int>(ncol + (i - me));
    } else {
      basis[r] = -1;
      ++nart;
    }
  }
  const Eigen::Index ntot = ncol + nslack + nart;
  Matrix tab = Matrix::Zero(mk, ntot);
  Vector b(mk);
  std::vector<bool> artificial(ntot, false);
  int next_art = static_cast<int>(ncol + nslack);
  for (Eigen::Index r = 0; r < mk; ++r) {
    tab.row(r).head(ncol + nslack) = rows.row(keep[r]);
    b(r) = rhs(keep[r]);
    if (basis[r] < 0) {
      tab(r, next_art) = 1.0;
      artificial[next_art] = true;
      basis[r] = next_art++;
    }
  }

  Vector cost = Vector::Zero(ntot);
  for (Eigen::Index j = 0; j < nvar; ++j) {
    const auto& v = vmap[j];
    const double c = p.objective(j);
    cost(v.plus) += c * v.sign;
    if (v.minus >= 0) cost(v.minus) -= c;
  }

  detail::SimplexTableau simplex(std::move(tab), b, std::move(basis), std::move(artificial), cost,
                                 opt);
  if (nart > 0) {
    simplex.optimize(mk, true);
    const double bscale = b.size() ? std::max(1.0, b.cwiseAbs().maxCoeff()) : 1.0;
    if (simplex.phase1_objective() > opt.feasibility * bscale) {
      result.pivots = simplex.pivots();
      return result;
    }
    simplex.expel_artificials();
  }
  const bool bounded = simplex.optimize(mk + 1, false);
  result.pivots = simplex.pivots();
  if (!bounded) {
    result.status = LpStatus::Unbounded;
    result.objective = -kInf;
    return result;
  }

  const Vector y = simplex.basic_solution();
  result.x.resize(nvar);
  for (Eigen::Index j = 0; j < nvar; ++j) {
    const auto& v = vmap[j];
    double xj = v.shift + v.sign * y(v.plus);
    if (v.minus >= 0) xj -= y(v.minus);
    result.x(j) = xj;
  }
  result.status = LpStatus::Optimal;
  result.objective = p.objective.dot(result.x);
  return result;
}

}  // namespace symmpc

#endif  // SYMMPC_SIMPLEX_HPP_
