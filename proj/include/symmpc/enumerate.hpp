#ifndef SYMMPC_ENUMERATE_HPP_
#define SYMMPC_ENUMERATE_HPP_

/**
 * @file
 * @brief Active-set enumeration: the initial pass over the horizon-1 tree,
 * the horizon extension step, the dynamic-programming driver and a
 * brute-force oracle.
 *
 * The enumeration engines are templates over an oracle exposing
 *
 *   Verdict optimality(const ActiveSet&);
 *   bool feasibility(const ActiveSet&);
 *
 * so that the traversal logic can be exercised on abstract fixtures.
 */

#include <algorithm>
#include <atomic>
#include <chrono>
#include <concepts>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <thread>
#include <unordered_set>
#include <vector>

#include "active_set.hpp"
#include "condense.hpp"
#include "lp.hpp"
#include "postprocess.hpp"
#include "symmetry.hpp"

namespace symmpc {

struct Verdict {
  bool optimal = false;
  bool degenerate = false;
  double t_star = 0.0;
};

template <class O>
concept ActiveSetOracle = requires(O& o, const ActiveSet& a) {
  { o.optimality(a) } -> std::convertible_to<Verdict>;
  { o.feasibility(a) } -> std::convertible_to<bool>;
};

/// Oracle backed by the LP tests on a condensed QP.
class QpOracle {
 public:
  QpOracle(const CondensedQp& qp, Tolerances tol, LpCounter* counter)
      : qp_(&qp), tol_(tol), counter_(counter) {}

  Verdict optimality(const ActiveSet& a) const {
    const auto r = optimality_test(*qp_, a, tol_, counter_);
    return {r.optimal, r.degenerate, r.t_star};
  }
  bool feasibility(const ActiveSet& a) const { return feasibility_test(*qp_, a, tol_, counter_); }

 private:
  const CondensedQp* qp_;
  Tolerances tol_;
  LpCounter* counter_;
};

enum class TestKind { Optimality, Feasibility };

struct TraceRecord {
  int horizon = 0;
  ActiveSet set;
  TestKind test = TestKind::Optimality;
  bool outcome = false;
  double t_star = 0.0;  // optimality records only
};

using TraceSink = std::function<void(const TraceRecord&)>;

/// Infeasible sets, bucketed by cardinality for superset queries.
class PrunedIndex {
 public:
  void add(const ActiveSet& a) {
    if (buckets_.size() <= a.size()) buckets_.resize(a.size() + 1);
    buckets_[a.size()].push_back(a);
    ++count_;
  }

  /// True iff some stored set is a subset of a.
  bool covers(const ActiveSet& a) const {
    const std::size_t top = std::min(a.size() + 1, buckets_.size());
    for (std::size_t k = 0; k < top; ++k)
      for (const auto& p : buckets_[k])
        if (p.is_subset_of(a)) return true;
    return false;
  }

  std::size_t size() const { return count_; }

  std::vector<ActiveSet> all() const {
    std::vector<ActiveSet> out;
    for (const auto& b : buckets_) out.insert(out.end(), b.begin(), b.end());
    return out;
  }

 private:
  std::vector<std::vector<ActiveSet>> buckets_;
  std::size_t count_ = 0;
};

/// Roots of non-primary subtrees.
class NonprimaryRoots {
 public:
  void add(const ActiveSet& a) { roots_.insert(a); }

  /// True iff a lies in the subtree of a stored root, i.e. a prefix of a is stored.
  bool covers(const ActiveSet& a) const {
    if (roots_.empty()) return false;
    const auto& idx = a.indices();
    for (std::size_t len = 0; len <= idx.size(); ++len) {
      if (roots_.contains(ActiveSet::from_sorted({idx.begin(), idx.begin() + static_cast<long>(len)})))
        return true;
    }
    return false;
  }

  std::size_t size() const { return roots_.size(); }
  const std::unordered_set<ActiveSet, ActiveSetHash>& roots() const { return roots_; }

 private:
  std::unordered_set<ActiveSet, ActiveSetHash> roots_;
};

struct SolveState {
  int horizon = 0;
  std::vector<ActiveSet> reduced;  // discovery order
  std::set<ActiveSet> degenerate;
  PrunedIndex pruned;
  NonprimaryRoots nonprimary;
  std::vector<std::pair<ActiveSet, ActiveSet>> orbit_duplicates;  // (kept, duplicate)
};

struct EnumerationOptions {
  bool parallel = false;
  unsigned threads = 0;  // 0: hardware concurrency
  TraceSink trace;
};

namespace detail {

/// Calls fn(i) for i in [0, count), possibly concurrently; rethrows the first failure by index.
template <class Fn>
void for_each_index(std::size_t count, bool parallel, unsigned threads, Fn&& fn) {
  if (!parallel || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  unsigned nt = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  nt = static_cast<unsigned>(std::min<std::size_t>(nt, count));
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nt; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct TestOutcome {
  Verdict verdict;
  std::optional<bool> feasible;  // set when the optimality test failed
};

template <ActiveSetOracle Oracle>
TestOutcome run_tests(Oracle& oracle, const ActiveSet& a) {
  TestOutcome r;
  r.verdict = oracle.optimality(a);
  if (!r.verdict.optimal) r.feasible = oracle.feasibility(a);
  return r;
}

/// Tests a batch of candidates and merges results into state in batch order.
template <ActiveSetOracle Oracle>
void test_batch(Oracle& oracle, std::span<const ActiveSet> batch, SolveState& state,
                const EnumerationOptions& opt) {
  std::vector<TestOutcome> results(batch.size());
  for_each_index(batch.size(), opt.parallel, opt.threads,
                 [&](std::size_t i) { results[i] = run_tests(oracle, batch[i]); });
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& a = batch[i];
    const auto& r = results[i];
    if (opt.trace) opt.trace({state.horizon, a, TestKind::Optimality, r.verdict.optimal, r.verdict.t_star});
    if (r.verdict.optimal) {
      state.reduced.push_back(a);
      if (r.verdict.degenerate) state.degenerate.insert(a);
      continue;
    }
    if (opt.trace) opt.trace({state.horizon, a, TestKind::Feasibility, *r.feasible, 0.0});
    if (!*r.feasible) state.pruned.add(a);
  }
}

}  // namespace detail

/**
 * Enumeration over all subsets of {1, ..., q} in traversal order.
 *
 * With a non-trivial permutation list, subtrees rooted at non-primary sets
 * are skipped and the orbit images of every visited set are recorded as
 * non-primary roots. Visited supersets of pruned sets are not tested but
 * still contribute their orbits, so their subtrees stay in the traversal.
 * With an empty permutation list this is the plain pruned enumeration and
 * pruned subtrees are cut.
 */
template <ActiveSetOracle Oracle>
SolveState initial_solution(Oracle& oracle, int q, std::span<const ConstraintPermutation> perms,
                            const EnumerationOptions& opt = {}) {
  SolveState state;
  state.horizon = 1;
  const bool symmetric = !perms.empty();

  std::vector<ActiveSet> level{ActiveSet{}};
  while (!level.empty()) {
    std::vector<ActiveSet> live;
    std::vector<ActiveSet> batch;
    for (const auto& a : level) {
      if (symmetric && state.nonprimary.covers(a)) continue;
      const bool covered = state.pruned.covers(a);
      if (!covered) batch.push_back(a);
      if (symmetric) {
        live.push_back(a);
        for (const auto& p : perms) {
          ActiveSet image = apply_perm(p, a);
          if (image != a && !state.nonprimary.covers(image)) state.nonprimary.add(image);
        }
      } else if (!covered) {
        live.push_back(a);
      }
    }
    detail::test_batch(oracle, batch, state, opt);

    std::vector<ActiveSet> next;
    for (const auto& a : live) {
      if (!symmetric && state.pruned.covers(a)) continue;
      for (int j = a.max() + 1; j <= q; ++j) next.push_back(a.with_appended(j));
    }
    level = std::move(next);
  }
  return state;
}

/// Pairs of sets in one orbit, as (first seen, later one).
inline std::vector<std::pair<ActiveSet, ActiveSet>> same_orbit_pairs(
    std::span<const ActiveSet> sets, std::span<const ConstraintPermutation> perms) {
  std::map<ActiveSet, ActiveSet> first_by_primary;
  std::vector<std::pair<ActiveSet, ActiveSet>> out;
  for (const auto& a : sets) {
    const ActiveSet primary = orbit_of(a, perms).primary;
    auto [it, inserted] = first_by_primary.emplace(primary, a);
    if (!inserted) out.emplace_back(it->second, a);
  }
  return out;
}

/**
 * One horizon extension. state holds the reduced sets at horizon N; the
 * oracle answers for the horizon N + 1 problem. perms (for N + 1) are used
 * only for duplicate detection; pass an empty list in baseline mode.
 */
template <ActiveSetOracle Oracle>
SolveState extend_horizon(const SolveState& state, Oracle& oracle, int q0, int q_next,
                          std::span<const ConstraintPermutation> perms, bool orbit_dedup = false,
                          const EnumerationOptions& opt = {}) {
  const int n_old = state.horizon;
  SolveState next;
  next.horizon = n_old + 1;
  const auto heads = power_set(1, q0);

  for (const auto& al : state.reduced) {
    if (al.within(n_old * q0)) {
      next.reduced.push_back(al);
      if (state.degenerate.contains(al)) next.degenerate.insert(al);
    }
    if (al.within((n_old - 1) * q0)) continue;
    const ActiveSet tail = shift(al, q0, q_next);
    std::size_t k = 0;
    while (k < heads.size()) {
      const std::size_t card = heads[k].size();
      std::vector<ActiveSet> batch;
      for (; k < heads.size() && heads[k].size() == card; ++k) {
        ActiveSet cand = concat(heads[k], tail);
        if (!next.pruned.covers(cand)) batch.push_back(std::move(cand));
      }
      detail::test_batch(oracle, batch, next, opt);
    }
  }

  if (!perms.empty()) {
    next.orbit_duplicates = same_orbit_pairs(next.reduced, perms);
    if (orbit_dedup && !next.orbit_duplicates.empty()) {
      std::set<ActiveSet> drop;
      for (const auto& d : next.orbit_duplicates) drop.insert(d.second);
      std::erase_if(next.reduced, [&](const ActiveSet& a) { return drop.contains(a); });
      for (const auto& a : drop) next.degenerate.erase(a);
    }
  }
  return next;
}

/// True when no set reaches past the first N stages, the fixed-point condition.
inline bool is_fixed_point(const SolveState& state, int q0) {
  const int bound = (state.horizon - 1) * q0;
  return std::all_of(state.reduced.begin(), state.reduced.end(),
                     [&](const ActiveSet& a) { return a.within(bound); });
}

struct BruteForceResult {
  std::vector<ActiveSet> optimal;  // traversal order
  std::set<ActiveSet> degenerate;
};

/// Optimality test on every subset of {1, ..., q}.
inline BruteForceResult brute_force(const CondensedQp& qp, const Tolerances& tol = {},
                                    LpCounter* counter = nullptr, bool parallel = false) {
  if (qp.q > 20) throw Error(ErrorCode::TooLarge, "2^" + std::to_string(qp.q) + " subsets exceed 2^20");
  const auto all = power_set(1, qp.q);
  std::vector<Verdict> verdicts(all.size());
  QpOracle oracle(qp, tol, counter);
  detail::for_each_index(all.size(), parallel, 0,
                         [&](std::size_t i) { verdicts[i] = oracle.optimality(all[i]); });
  BruteForceResult out;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (!verdicts[i].optimal) continue;
    out.optimal.push_back(all[i]);
    if (verdicts[i].degenerate) out.degenerate.insert(all[i]);
  }
  return out;
}

enum class Mode { Symmetric, Baseline };

struct DpOptions {
  Mode mode = Mode::Symmetric;
  bool orbit_dedup = false;
  bool parallel = false;
  unsigned threads = 0;
  Tolerances tol;
  TraceSink trace;
};

struct HorizonStats {
  int horizon = 0;
  LpCounts lps;      // cumulative
  double seconds = 0.0;  // cumulative
  std::vector<ActiveSet> reduced;
  std::set<ActiveSet> degenerate;
  std::size_t pruned = 0;
  std::size_t nonprimary_roots = 0;
  std::vector<std::pair<ActiveSet, ActiveSet>> orbit_duplicates;
};

struct DpResult {
  Mode mode = Mode::Symmetric;
  int horizon_requested = 0;
  int horizon_reached = 0;  // horizon of the returned solution
  bool fixed_point = false;
  std::size_t group_size = 1;
  LpCounts lps;
  double enumeration_seconds = 0.0;
  double postprocess_seconds = 0.0;
  std::vector<HorizonStats> horizons;
  PostprocessResult solution;
  std::vector<ActiveSet> expanded;  // orbit expansion of the final reduced sets
};

/**
 * Full pipeline up to horizon n_max: enumeration at horizon 1, horizon
 * extensions with early stop at a fixed point, then post-processing. In
 * baseline mode the group is ignored.
 */
inline DpResult run_dp(const ValidatedOcp& ocp, int n_max, const SymmetryGroup& group,
                       const DpOptions& opt = {}) {
  if (n_max < 1) throw Error(ErrorCode::BadHorizon, "horizon must be at least 1");
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const bool symmetric = opt.mode == Mode::Symmetric;

  DpResult res;
  res.mode = opt.mode;
  res.horizon_requested = n_max;
  res.group_size = symmetric ? group.size() : 1;

  LpCounter counter;
  PermutationCache cache(symmetric ? group : SymmetryGroup{{identity_pair(ocp.n(), ocp.m())}},
                         opt.tol.symmetry);
  EnumerationOptions eopt{opt.parallel, opt.threads, opt.trace};

  auto snapshot = [&](const SolveState& s) {
    HorizonStats h;
    h.horizon = s.horizon;
    h.lps = counter.counts();
    h.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    h.reduced = s.reduced;
    h.degenerate = s.degenerate;
    h.pruned = s.pruned.size();
    h.nonprimary_roots = s.nonprimary.size();
    h.orbit_duplicates = s.orbit_duplicates;
    res.horizons.push_back(std::move(h));
  };

  CondensedQp qp = condense(ocp, 1);
  std::vector<ConstraintPermutation> perms;
  if (symmetric) perms = cache.for_qp(qp);
  SolveState state;
  {
    QpOracle oracle(qp, opt.tol, &counter);
    state = initial_solution(oracle, qp.q, perms, eopt);
  }
  snapshot(state);

  while (state.horizon < n_max) {
    CondensedQp qp_next = condense(ocp, state.horizon + 1);
    std::vector<ConstraintPermutation> perms_next;
    if (symmetric) perms_next = cache.for_qp(qp_next);
    QpOracle oracle(qp_next, opt.tol, &counter);
    SolveState next = extend_horizon(state, oracle, qp.q0, qp_next.q, perms_next, opt.orbit_dedup, eopt);
    snapshot(next);
    const bool stop = is_fixed_point(next, qp.q0);
    state = std::move(next);
    qp = std::move(qp_next);
    perms = std::move(perms_next);
    if (stop) {
      res.fixed_point = true;
      break;
    }
  }
  res.horizon_reached = state.horizon;
  res.lps = counter.counts();
  const auto t1 = Clock::now();
  res.enumeration_seconds = std::chrono::duration<double>(t1 - t0).count();

  res.solution = postprocess(qp, state.reduced, state.degenerate, symmetric ? &group : nullptr,
                             symmetric ? std::span<const ConstraintPermutation>(perms)
                                       : std::span<const ConstraintPermutation>{},
                             opt.tol);
  res.expanded = symmetric ? expand_orbits(state.reduced, perms)
                           : std::vector<ActiveSet>(state.reduced.begin(), state.reduced.end());
  std::sort(res.expanded.begin(), res.expanded.end(), TraversalLess{});
  res.postprocess_seconds = std::chrono::duration<double>(Clock::now() - t1).count();
  return res;
}

}  // namespace symmpc

#endif  // SYMMPC_ENUMERATE_HPP_
