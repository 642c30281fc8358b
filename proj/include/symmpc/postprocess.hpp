#ifndef SYMMPC_POSTPROCESS_HPP_
#define SYMMPC_POSTPROCESS_HPP_

/**
 * @file
 * @brief From optimal active sets to the explicit piecewise-affine law.
 *
 * For an active set A with linearly independent rows G_A the KKT system
 * gives, with M = G_A H^-1 G_A',
 *
 *   lambda(x) = -M^-1 (G_A H^-1 F' + E_A) x - M^-1 w_A,
 *   U(x)      = -H^-1 (F' x + G_A' lambda(x)),
 *
 * valid on the critical region {x | G_I U(x) <= E_I x + w_I, lambda(x) >= 0}.
 */

#include <algorithm>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "active_set.hpp"
#include "condense.hpp"
#include "polytope.hpp"
#include "symmetry.hpp"

namespace symmpc {

struct AffineLaw {
  Matrix gain;    // Nm x n
  Vector offset;  // Nm
};

struct ExplicitPiece {
  ActiveSet active_set;
  Matrix gain;
  Vector offset;
  Polytope region;       // unit-normal rows, irredundant
  bool reduced = false;  // tested directly rather than obtained as an orbit image
  int group_element = 0; // element mapping the tested representative onto this piece
};

inline Matrix rows_of(const Matrix& m, const ActiveSet& a) {
  Matrix out(static_cast<Eigen::Index>(a.size()), m.cols());
  Eigen::Index k = 0;
  for (int i : a) out.row(k++) = m.row(i - 1);
  return out;
}

/// Row rank of G_A equals |A|, singular values above tol * sigma_max.
inline bool rank_filter(const CondensedQp& qp, const ActiveSet& a, double tol = 1e-9) {
  if (a.empty()) return true;
  if (a.size() > static_cast<std::size_t>(qp.num_inputs())) return false;
  const Matrix ga = rows_of(qp.G, a);
  Eigen::JacobiSVD<Matrix> svd(ga);
  const Vector& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return false;
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++r;
  return r == static_cast<Eigen::Index>(a.size());
}

namespace detail {

struct KktMaps {
  Matrix lambda_gain;
  Vector lambda_offset;
  AffineLaw law;
};

inline KktMaps kkt_maps(const CondensedQp& qp, const ActiveSet& a) {
  const Eigen::LLT<Matrix> hchol(qp.H);
  const Matrix hinv_ft = hchol.solve(qp.F.transpose());
  KktMaps k;
  if (a.empty()) {
    k.law.gain = -hinv_ft;
    k.law.offset = Vector::Zero(qp.num_inputs());
    return k;
  }
  const Matrix ga = rows_of(qp.G, a);
  const Matrix ea = rows_of(qp.E, a);
  const Vector wa = rows_of(qp.w, a);
  const Matrix hinv_gt = hchol.solve(ga.transpose());
  const Matrix m = ga * hinv_gt;
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw Error(ErrorCode::SingularKkt, "G_A H^-1 G_A' singular for " + a.to_string());
  k.lambda_gain = -lu.solve(ga * hinv_ft + ea);
  k.lambda_offset = -lu.solve(wa);
  k.law.gain = -(hinv_ft + hinv_gt * k.lambda_gain);
  k.law.offset = -hinv_gt * k.lambda_offset;
  return k;
}

/// Critical region rows before redundancy removal, unit-normal.
inline Polytope raw_region(const CondensedQp& qp, const ActiveSet& a, const KktMaps& k) {
  const Eigen::Index n = qp.n();
  const Eigen::Index na = static_cast<Eigen::Index>(a.size());
  const Eigen::Index ni = qp.q - na;
  Matrix normals(ni + na, n);
  Vector offsets(ni + na);
  Eigen::Index r = 0;
  for (int i = 1; i <= qp.q; ++i) {
    if (a.contains(i)) continue;
    const Eigen::Index row = i - 1;
    normals.row(r) = qp.G.row(row) * k.law.gain - qp.E.row(row);
    offsets(r) = qp.w(row) - qp.G.row(row).dot(k.law.offset);
    ++r;
  }
  if (na > 0) {
    normals.bottomRows(na) = -k.lambda_gain;
    offsets.tail(na) = k.lambda_offset;
  }
  return normalize_rows(Polytope(std::move(normals), std::move(offsets)));
}

}  // namespace detail

inline AffineLaw law_of(const CondensedQp& qp, const ActiveSet& a) {
  return detail::kkt_maps(qp, a).law;
}

/// Critical region of A; throws EmptyPolytope when A has no region at all.
inline Polytope region_of(const CondensedQp& qp, const ActiveSet& a, double tol = 1e-9) {
  const auto k = detail::kkt_maps(qp, a);
  return remove_redundancy(detail::raw_region(qp, a, k), tol);
}

inline bool full_dim_check(const CondensedQp& qp, const ActiveSet& a, double dim_tol = 1e-9) {
  const auto k = detail::kkt_maps(qp, a);
  return chebyshev(detail::raw_region(qp, a, k)).radius > dim_tol;
}

/// Piece obtained by mapping a tested piece through group element (Theta, Omega).
inline ExplicitPiece map_piece(const ExplicitPiece& p, const SymmetryPair& pair,
                               const ConstraintPermutation& perm, int horizon) {
  const Eigen::Index m = pair.omega.rows();
  const Matrix theta_inv = pair.theta.inverse();
  ExplicitPiece out;
  out.active_set = apply_perm(perm, p.active_set);
  out.gain.resize(p.gain.rows(), p.gain.cols());
  out.offset.resize(p.offset.size());
  for (int k = 0; k < horizon; ++k) {
    out.gain.middleRows(k * m, m) = pair.omega * p.gain.middleRows(k * m, m) * theta_inv;
    out.offset.segment(k * m, m) = pair.omega * p.offset.segment(k * m, m);
  }
  out.region = normalize_rows(linear_image(p.region, pair.theta));
  out.reduced = false;
  out.group_element = perm.pair_index;
  return out;
}

inline std::vector<ActiveSet> expand_orbits(std::span<const ActiveSet> reduced,
                                            std::span<const ConstraintPermutation> perms) {
  std::set<ActiveSet, TraversalLess> all;
  for (const auto& a : reduced) {
    all.insert(a);
    for (const auto& p : perms) all.insert(apply_perm(p, a));
  }
  return {all.begin(), all.end()};
}

struct PostprocessResult {
  std::vector<ExplicitPiece> pieces;  // canonical order
  std::vector<ActiveSet> accepted;    // tested sets that passed both filters
  std::size_t rank_rejected = 0;
  std::size_t dim_rejected = 0;
};

/**
 * Rank filter on every set, full-dimensionality check on degenerate sets
 * only, then orbit expansion. With an empty permutation list each accepted
 * set becomes exactly one piece.
 */
inline PostprocessResult postprocess(const CondensedQp& qp, std::span<const ActiveSet> reduced,
                                     const std::set<ActiveSet>& degenerate,
                                     const SymmetryGroup* group,
                                     std::span<const ConstraintPermutation> perms,
                                     const Tolerances& tol = {}) {
  PostprocessResult out;
  std::set<ActiveSet> seen;
  for (const auto& a : reduced) {
    if (!rank_filter(qp, a, tol.rank)) {
      ++out.rank_rejected;
      continue;
    }
    if (degenerate.contains(a) && !full_dim_check(qp, a, tol.dim)) {
      ++out.dim_rejected;
      continue;
    }
    out.accepted.push_back(a);
    ExplicitPiece base;
    base.active_set = a;
    const auto law = law_of(qp, a);
    base.gain = law.gain;
    base.offset = law.offset;
    base.region = region_of(qp, a, tol.row);
    base.reduced = true;
    if (seen.insert(a).second) out.pieces.push_back(base);
    if (group == nullptr) continue;
    for (std::size_t k = 1; k < perms.size(); ++k) {
      const ActiveSet image = apply_perm(perms[k], a);
      if (seen.contains(image)) continue;
      seen.insert(image);
      out.pieces.push_back(map_piece(base, group->elements[k], perms[k], qp.horizon));
    }
  }
  std::stable_sort(out.pieces.begin(), out.pieces.end(),
                   [](const ExplicitPiece& x, const ExplicitPiece& y) {
                     return TraversalLess{}(x.active_set, y.active_set);
                   });
  return out;
}

}  // namespace symmpc

#endif  // SYMMPC_POSTPROCESS_HPP_
