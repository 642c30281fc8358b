#ifndef SYMMPC_SYMMETRY_HPP_
#define SYMMPC_SYMMETRY_HPP_

/**
 * @file
 * @brief Symmetry pairs (Theta, Omega) of an OCP and the constraint
 * permutations they induce on the condensed QP.
 *
 * A pair is a symmetry when
 *   Theta A = A Theta,  Theta B = B Omega,
 *   Theta o X = X,  Omega o U = U,  Theta o T = T,
 *   Theta'Q Theta = Q,  Omega'R Omega = R,  Theta'P Theta = P.
 * Every such pair maps constraint i of the condensed QP onto a constraint
 * j = pi(i) with G_i = G_j (I_N kron Omega) and E_i = E_j Theta, and the
 * maps pi form a permutation group acting on active sets.
 */

#include <algorithm>
#include <map>
#include <mutex>
#include <span>
#include <vector>

#include "active_set.hpp"
#include "condense.hpp"
#include "ocp.hpp"

namespace symmpc {

struct SymmetryPair {
  Matrix theta;  // n x n
  Matrix omega;  // m x m
};

inline SymmetryPair identity_pair(Eigen::Index n, Eigen::Index m) {
  return {Matrix::Identity(n, n), Matrix::Identity(m, m)};
}

inline SymmetryPair operator*(const SymmetryPair& a, const SymmetryPair& b) {
  return {a.theta * b.theta, a.omega * b.omega};
}

inline SymmetryPair inverse(const SymmetryPair& p) {
  return {p.theta.inverse(), p.omega.inverse()};
}

inline double pair_distance(const SymmetryPair& a, const SymmetryPair& b) {
  return std::max(max_abs(a.theta - b.theta), max_abs(a.omega - b.omega));
}

/// Group elements with the identity first.
struct SymmetryGroup {
  std::vector<SymmetryPair> elements;

  std::size_t size() const { return elements.size(); }

  /// Index of the element equal to p within tol, or -1.
  int find(const SymmetryPair& p, double tol = 1e-9) const {
    for (std::size_t k = 0; k < elements.size(); ++k)
      if (pair_distance(elements[k], p) < tol) return static_cast<int>(k);
    return -1;
  }
};

/// Throws NotASymmetry naming the first violated condition.
inline void validate_pair(const ValidatedOcp& ocp, const SymmetryPair& pair, double tol = 1e-9) {
  const Eigen::Index n = ocp.n();
  const Eigen::Index m = ocp.m();
  if (pair.theta.rows() != n || pair.theta.cols() != n || pair.omega.rows() != m ||
      pair.omega.cols() != m)
    throw Error(ErrorCode::DimensionMismatch, "symmetry pair has the wrong shape");
  if (std::abs(pair.theta.determinant()) < 1e-12 || std::abs(pair.omega.determinant()) < 1e-12)
    throw Error(ErrorCode::NotASymmetry, "Theta or Omega is singular");

  auto check = [&](const Matrix& lhs, const Matrix& rhs, const char* what) {
    const double scale = std::max(max_abs(lhs), max_abs(rhs));
    if (max_abs(lhs - rhs) > scaled_tolerance(tol, scale))
      throw Error(ErrorCode::NotASymmetry, what);
  };
  check(pair.theta * ocp.A, ocp.A * pair.theta, "Theta A != A Theta");
  check(pair.theta * ocp.B, ocp.B * pair.omega, "Theta B != B Omega");
  check(pair.theta.transpose() * ocp.Q * pair.theta, ocp.Q, "Theta'Q Theta != Q");
  check(pair.omega.transpose() * ocp.R * pair.omega, ocp.R, "Omega'R Omega != R");
  check(pair.theta.transpose() * ocp.P * pair.theta, ocp.P, "Theta'P Theta != P");
  if (!linear_image_equals(ocp.X, pair.theta, tol))
    throw Error(ErrorCode::NotASymmetry, "Theta o X != X");
  if (!linear_image_equals(ocp.U, pair.omega, tol))
    throw Error(ErrorCode::NotASymmetry, "Omega o U != U");
  if (!linear_image_equals(ocp.T, pair.theta, tol))
    throw Error(ErrorCode::NotASymmetry, "Theta o T != T");
}

/**
 * Smallest group containing the generators: identity first, then elements
 * in the order they are discovered by multiplying with generators and
 * their inverses.
 */
inline SymmetryGroup close_group(const std::vector<SymmetryPair>& generators, Eigen::Index n,
                                 Eigen::Index m, double tol = 1e-9, std::size_t cap = 10'000) {
  SymmetryGroup g;
  g.elements.push_back(identity_pair(n, m));
  std::vector<SymmetryPair> gens;
  for (const auto& p : generators) {
    gens.push_back(p);
    gens.push_back(inverse(p));
  }
  for (const auto& p : gens)
    if (g.find(p, tol) < 0) g.elements.push_back(p);

  for (std::size_t k = 0; k < g.elements.size(); ++k) {
    for (const auto& s : gens) {
      SymmetryPair prod = g.elements[k] * s;
      if (g.find(prod, tol) >= 0) continue;
      if (g.elements.size() >= cap)
        throw Error(ErrorCode::GroupTooLarge, "group exceeds " + std::to_string(cap) + " elements");
      g.elements.push_back(std::move(prod));
    }
  }
  return g;
}

struct ConstraintPermutation {
  std::vector<int> map;  // map[i - 1] = pi(i), 1-based values
  int pair_index = 0;

  int operator()(int i) const { return map[static_cast<std::size_t>(i - 1)]; }
  int size() const { return static_cast<int>(map.size()); }
};

inline ConstraintPermutation identity_permutation(int q, int pair_index = 0) {
  ConstraintPermutation p;
  p.pair_index = pair_index;
  p.map.resize(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i) p.map[static_cast<std::size_t>(i)] = i + 1;
  return p;
}

/// Row residual |G_i - G_j (I kron Omega)| + |E_i - E_j Theta| for every (i, j).
inline Matrix partner_residuals(const CondensedQp& qp, const SymmetryPair& pair) {
  const Eigen::Index m = qp.ocp.m();
  Matrix g_map = qp.G;
  for (int k = 0; k < qp.horizon; ++k)
    g_map.middleCols(k * m, m) = qp.G.middleCols(k * m, m) * pair.omega;
  const Matrix e_map = qp.E * pair.theta;
  Matrix res(qp.q, qp.q);
  for (int i = 0; i < qp.q; ++i)
    for (int j = 0; j < qp.q; ++j)
      res(i, j) = (qp.G.row(i) - g_map.row(j)).cwiseAbs().maxCoeff() +
                  (qp.E.row(i) - e_map.row(j)).cwiseAbs().maxCoeff();
  return res;
}

/**
 * pi(i) = j with G_i = G_j (I kron Omega), E_i = E_j Theta. Rows are
 * processed in increasing i; among unmatched rows within tolerance the
 * smallest j is taken, which fixes one bijection when rows coincide.
 */
inline ConstraintPermutation constraint_permutation(const CondensedQp& qp, const SymmetryPair& pair,
                                                    int pair_index = 0, double tol = 1e-9) {
  const Matrix res = partner_residuals(qp, pair);
  ConstraintPermutation perm;
  perm.pair_index = pair_index;
  perm.map.assign(static_cast<std::size_t>(qp.q), 0);
  std::vector<bool> used(static_cast<std::size_t>(qp.q), false);
  for (int i = 0; i < qp.q; ++i) {
    const double scale = std::max(max_abs(qp.G.row(i)), max_abs(qp.E.row(i)));
    const double limit = scaled_tolerance(tol, scale);
    int match = -1;
    for (int j = 0; j < qp.q; ++j) {
      if (!used[static_cast<std::size_t>(j)] && res(i, j) <= limit) {
        match = j;
        break;
      }
    }
    if (match < 0)
      throw Error(ErrorCode::NoMatch, "constraint " + std::to_string(i + 1) +
                                          " has no partner under group element " +
                                          std::to_string(pair_index));
    used[static_cast<std::size_t>(match)] = true;
    perm.map[static_cast<std::size_t>(i)] = match + 1;
  }
  return perm;
}

inline std::vector<ConstraintPermutation> constraint_permutations(const CondensedQp& qp,
                                                                  const SymmetryGroup& group,
                                                                  double tol = 1e-9) {
  std::vector<ConstraintPermutation> out;
  out.reserve(group.size());
  for (std::size_t k = 0; k < group.size(); ++k)
    out.push_back(constraint_permutation(qp, group.elements[k], static_cast<int>(k), tol));
  return out;
}

inline ActiveSet apply_perm(const ConstraintPermutation& perm, const ActiveSet& a) {
  std::vector<int> out;
  out.reserve(a.size());
  for (int i : a) out.push_back(perm(i));
  std::sort(out.begin(), out.end());
  return ActiveSet::from_sorted(std::move(out));
}

struct Orbit {
  std::vector<ActiveSet> members;  // sorted, distinct
  ActiveSet primary;
};

inline Orbit orbit_of(const ActiveSet& a, std::span<const ConstraintPermutation> perms) {
  Orbit o;
  o.members.reserve(perms.size() + 1);
  o.members.push_back(a);
  for (const auto& p : perms) o.members.push_back(apply_perm(p, a));
  std::sort(o.members.begin(), o.members.end());
  o.members.erase(std::unique(o.members.begin(), o.members.end()), o.members.end());
  o.primary = o.members.front();
  return o;
}

/// Lexicographic minimum test, O(g |A|).
inline bool is_primary(const ActiveSet& a, std::span<const ConstraintPermutation> perms) {
  for (const auto& p : perms)
    if (apply_perm(p, a) < a) return false;
  return true;
}

/// min(a \ b) < min(b \ a); false when a == b.
inline bool has_lower_indices(const ActiveSet& a, const ActiveSet& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia == *ib) {
      ++ia;
      ++ib;
    } else {
      return *ia < *ib;
    }
  }
  // one set is a prefix of the other; only the longer one has a difference element
  return ia != a.end();
}

/// Primary by the pairwise minimum-difference definition.
inline bool is_primary_by_min_difference(const ActiveSet& a,
                                         std::span<const ConstraintPermutation> perms) {
  const Orbit o = orbit_of(a, perms);
  for (const auto& b : o.members)
    if (b != a && !has_lower_indices(a, b)) return false;
  return true;
}

/// Constraint permutations per horizon, computed once and then shared read-only.
class PermutationCache {
 public:
  PermutationCache(SymmetryGroup group, double tol) : group_(std::move(group)), tol_(tol) {}

  const SymmetryGroup& group() const { return group_; }

  const std::vector<ConstraintPermutation>& for_qp(const CondensedQp& qp) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(qp.horizon);
    if (it == cache_.end()) it = cache_.emplace(qp.horizon, constraint_permutations(qp, group_, tol_)).first;
    return it->second;
  }

 private:
  SymmetryGroup group_;
  double tol_;
  std::mutex mutex_;
  std::map<int, std::vector<ConstraintPermutation>> cache_;
};

}  // namespace symmpc

#endif  // SYMMPC_SYMMETRY_HPP_
