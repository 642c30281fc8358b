#ifndef SYMMPC_LP_HPP_
#define SYMMPC_LP_HPP_

/**
 * @file
 * @brief Optimality and feasibility tests for candidate active sets.
 *
 * For a candidate A with complement I the optimality LP is
 *
 *   max t  s.t.  F'x0 + H U + G_A' lambda = 0,     t 1 <= lambda,
 *                G_A U - E_A x0 - w_A = 0,
 *                G_I U - E_I x0 - w_I + s_I = 0,  t 1 <= s_I,  t >= 0.
 *
 * It is posed with lambda = mu + t 1 (mu >= 0) and with s_I kept as the
 * slack of G_I U - E_I x0 + t <= w_I, which is the same polyhedron in
 * fewer columns. A is optimal iff the LP is feasible; t* = 0 marks a
 * degenerate set. The feasibility test drops the stationarity row block
 * and the multiplier bound and keeps everything else.
 */

#include <atomic>
#include <vector>

#include "active_set.hpp"
#include "condense.hpp"
#include "simplex.hpp"

namespace symmpc {

struct LpCounts {
  long optimality = 0;
  long feasibility = 0;

  long total() const { return optimality + feasibility; }

  friend LpCounts operator-(const LpCounts& a, const LpCounts& b) {
    return {a.optimality - b.optimality, a.feasibility - b.feasibility};
  }
  friend bool operator==(const LpCounts&, const LpCounts&) = default;
};

/// Monotone per-run counters; safe to increment from several threads.
class LpCounter {
 public:
  void count_optimality() { optimality_.fetch_add(1, std::memory_order_relaxed); }
  void count_feasibility() { feasibility_.fetch_add(1, std::memory_order_relaxed); }
  void reset() {
    optimality_.store(0);
    feasibility_.store(0);
  }
  LpCounts counts() const { return {optimality_.load(), feasibility_.load()}; }

 private:
  std::atomic<long> optimality_{0};
  std::atomic<long> feasibility_{0};
};

struct OptimalityOutcome {
  bool optimal = false;
  double t_star = 0.0;  // +inf when the LP is unbounded
  bool degenerate = false;
  // witness, set when optimal
  Vector x0;
  Vector U;
  Vector lambda;  // indexed like A
  Vector slack;   // indexed like the complement of A
};

namespace detail {

struct ActiveSetSplit {
  std::vector<Eigen::Index> active;
  std::vector<Eigen::Index> inactive;
};

inline ActiveSetSplit split_rows(const CondensedQp& qp, const ActiveSet& a) {
  if (!a.within(qp.q))
    throw Error(ErrorCode::IndexOverflow, "active set " + a.to_string() + " exceeds q");
  ActiveSetSplit s;
  std::vector<bool> on(static_cast<std::size_t>(qp.q), false);
  for (int i : a) on[static_cast<std::size_t>(i - 1)] = true;
  for (int i = 0; i < qp.q; ++i) (on[static_cast<std::size_t>(i)] ? s.active : s.inactive).push_back(i);
  return s;
}

}  // namespace detail

/**
 * Builds the shared LP. Variable layout: [U, x0, mu, t] with stationarity,
 * [U, x0, t] without it.
 */
inline LpProblem active_set_lp(const CondensedQp& qp, const ActiveSet& a, bool with_stationarity) {
  const auto rows = detail::split_rows(qp, a);
  const Eigen::Index nu = qp.num_inputs();
  const Eigen::Index n = qp.n();
  const Eigen::Index na = static_cast<Eigen::Index>(rows.active.size());
  const Eigen::Index ni = static_cast<Eigen::Index>(rows.inactive.size());
  const Eigen::Index nmu = with_stationarity ? na : 0;
  const Eigen::Index nvar = nu + n + nmu + 1;
  const Eigen::Index col_t = nvar - 1;

  LpProblem lp;
  lp.objective = Vector::Zero(nvar);
  lp.objective(col_t) = -1.0;
  lp.lower = Vector::Constant(nvar, -kInf);
  lp.lower.tail(nmu + 1).setZero();
  lp.upper = Vector::Constant(nvar, kInf);

  const Eigen::Index n_stat = with_stationarity ? nu : 0;
  lp.eq_matrix = Matrix::Zero(n_stat + na, nvar);
  lp.eq_rhs = Vector::Zero(n_stat + na);
  if (with_stationarity) {
    lp.eq_matrix.block(0, 0, nu, nu) = qp.H;
    lp.eq_matrix.block(0, nu, nu, n) = qp.F.transpose();
    for (Eigen::Index k = 0; k < na; ++k) {
      const Eigen::RowVectorXd g = qp.G.row(rows.active[k]);
      lp.eq_matrix.block(0, nu + n + k, nu, 1) = g.transpose();
      lp.eq_matrix.block(0, col_t, nu, 1) += g.transpose();
    }
  }
  for (Eigen::Index k = 0; k < na; ++k) {
    const Eigen::Index r = rows.active[k];
    lp.eq_matrix.block(n_stat + k, 0, 1, nu) = qp.G.row(r);
    lp.eq_matrix.block(n_stat + k, nu, 1, n) = -qp.E.row(r);
    lp.eq_rhs(n_stat + k) = qp.w(r);
  }

  lp.ineq_matrix = Matrix::Zero(ni, nvar);
  lp.ineq_rhs = Vector::Zero(ni);
  for (Eigen::Index k = 0; k < ni; ++k) {
    const Eigen::Index r = rows.inactive[k];
    lp.ineq_matrix.block(k, 0, 1, nu) = qp.G.row(r);
    lp.ineq_matrix.block(k, nu, 1, n) = -qp.E.row(r);
    lp.ineq_matrix(k, col_t) = 1.0;
    lp.ineq_rhs(k) = qp.w(r);
  }
  return lp;
}

namespace detail {

inline LpResult solve_counted(const LpProblem& lp, const Tolerances& tol) {
  LpOptions opt;
  opt.feasibility = tol.feasibility;
  return solve_lp(lp, opt);
}

}  // namespace detail

inline OptimalityOutcome optimality_test(const CondensedQp& qp, const ActiveSet& a,
                                         const Tolerances& tol = {}, LpCounter* counter = nullptr) {
  if (counter) counter->count_optimality();
  LpProblem lp = active_set_lp(qp, a, true);
  LpResult r = detail::solve_counted(lp, tol);
  OptimalityOutcome out;
  if (r.status == LpStatus::Infeasible) return out;

  out.optimal = true;
  if (r.status == LpStatus::Unbounded) {
    // any positive margin is attainable; cap t for a witness
    out.t_star = kInf;
    lp.upper(lp.num_variables() - 1) = 1.0;
    r = detail::solve_counted(lp, tol);
    if (r.status != LpStatus::Optimal)
      throw Error(ErrorCode::NumericalFailure, "capped optimality LP failed for " + a.to_string());
  } else {
    out.t_star = r.x(lp.num_variables() - 1);
  }
  out.degenerate = out.t_star <= tol.degenerate;

  const auto rows = detail::split_rows(qp, a);
  const Eigen::Index nu = qp.num_inputs();
  const Eigen::Index n = qp.n();
  const Eigen::Index na = static_cast<Eigen::Index>(rows.active.size());
  const double t = r.x(lp.num_variables() - 1);
  out.U = r.x.head(nu);
  out.x0 = r.x.segment(nu, n);
  out.lambda = r.x.segment(nu + n, na).array() + t;
  out.slack.resize(static_cast<Eigen::Index>(rows.inactive.size()));
  for (std::size_t k = 0; k < rows.inactive.size(); ++k) {
    const Eigen::Index row = rows.inactive[k];
    out.slack(static_cast<Eigen::Index>(k)) =
        qp.w(row) + qp.E.row(row).dot(out.x0) - qp.G.row(row).dot(out.U);
  }
  return out;
}

inline bool feasibility_test(const CondensedQp& qp, const ActiveSet& a, const Tolerances& tol = {},
                             LpCounter* counter = nullptr) {
  if (counter) counter->count_feasibility();
  const LpResult r = detail::solve_counted(active_set_lp(qp, a, false), tol);
  return r.status != LpStatus::Infeasible;
}

}  // namespace symmpc

#endif  // SYMMPC_LP_HPP_
