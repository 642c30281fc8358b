#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/reference.hpp"

using namespace symmpc;
using namespace symmpc::testing;

namespace {

struct Solved {
  LoadedProblem problem;
  CondensedQp qp;
  DpResult result;
};

const Solved& solved5() {
  static const Solved s = [] {
    Solved out{example2(), {}, {}};
    out.qp = condense(out.problem.ocp, 5);
    out.result = run_dp(out.problem.ocp, 5, out.problem.group);
    return out;
  }();
  return s;
}

// One input, one state: u <= x and -u <= 0, so A = {1} survives only at x = 0.
CondensedQp point_region_qp() {
  CondensedQp qp;
  qp.horizon = 1;
  qp.Y = Matrix::Identity(1, 1);
  qp.F = Matrix::Zero(1, 1);
  qp.H = Matrix::Identity(1, 1);
  qp.G.resize(2, 1);
  qp.G << 1.0, -1.0;
  qp.E.resize(2, 1);
  qp.E << 1.0, 0.0;
  qp.w = Vector::Zero(2);
  qp.q = 2;
  qp.q_u = 2;
  qp.q0 = 2;
  qp.stage_of_row = {0, 0};
  return qp;
}

Eigen::Index lu_rank(const Matrix& m) {
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(1e-9);
  return lu.rank();
}

Matrix block_diagonal(const Matrix& b, int copies) {
  Matrix out = Matrix::Zero(b.rows() * copies, b.cols() * copies);
  for (int k = 0; k < copies; ++k) out.block(k * b.rows(), k * b.cols(), b.rows(), b.cols()) = b;
  return out;
}

}  // namespace

TEST(RankFilter, EmptyAndOversizedSets) {
  const auto qp = condense(example2().ocp, 1);
  EXPECT_TRUE(rank_filter(qp, ActiveSet{}));
  EXPECT_FALSE(rank_filter(qp, ActiveSet{1, 2, 9}));
}

TEST(RankFilter, DuplicateRowsRejected) {
  auto qp = condense(example2().ocp, 1);
  qp.G.row(1) = qp.G.row(0);
  EXPECT_FALSE(rank_filter(qp, ActiveSet{1, 2}));
  EXPECT_TRUE(rank_filter(qp, ActiveSet{1}));
  // state rows at stage 0 have no input dependence
  EXPECT_FALSE(rank_filter(condense(example2().ocp, 1), ActiveSet{5}));
}

TEST(RankFilter, AgreesWithLuRank) {
  const auto qp = condense(example2().ocp, 2);
  for (const auto& a : power_set(1, qp.q)) {
    if (a.size() > 4) continue;
    const bool want = a.empty() || lu_rank(rows_of(qp.G, a)) == static_cast<Eigen::Index>(a.size());
    ASSERT_EQ(rank_filter(qp, a), want) << a.to_string();
  }
}

TEST(CriticalRegion, EmptySetIsUnconstrainedOptimum) {
  const auto qp = condense(example2().ocp, 3);
  const auto law = law_of(qp, ActiveSet{});
  const Matrix want = -qp.H.llt().solve(qp.F.transpose());
  EXPECT_LE(max_abs(law.gain - want), 1e-9 * max_abs(want));
  EXPECT_EQ(max_abs(law.offset), 0.0);
  const auto region = region_of(qp, ActiveSet{});
  EXPECT_TRUE(region.contains(Vector::Zero(2), 0.0));
  EXPECT_GT(chebyshev(region).radius, 0.0);
}

TEST(CriticalRegion, PointRegionFailsFullDimension) {
  const auto qp = point_region_qp();
  EXPECT_TRUE(rank_filter(qp, ActiveSet{1}));
  EXPECT_FALSE(full_dim_check(qp, ActiveSet{1}));
  EXPECT_TRUE(full_dim_check(qp, ActiveSet{2}));

  const PostprocessResult r = postprocess(qp, std::vector<ActiveSet>{ActiveSet{1}, ActiveSet{2}},
                                          {ActiveSet{1}}, nullptr, {});
  EXPECT_EQ(r.dim_rejected, 1u);
  ASSERT_EQ(r.pieces.size(), 1u);
  EXPECT_EQ(r.pieces[0].active_set, ActiveSet{2});
}

TEST(CriticalRegion, NonDegenerateSetsSkipDimensionCheck) {
  const auto qp = point_region_qp();
  const PostprocessResult r = postprocess(qp, std::vector<ActiveSet>{ActiveSet{1}}, {}, nullptr, {});
  EXPECT_EQ(r.dim_rejected, 0u);
  EXPECT_EQ(r.pieces.size(), 1u);
}

TEST(Postprocess, LawMatchesQpInsideEveryPiece) {
  const auto& s = solved5();
  std::mt19937_64 rng(77);
  double worst = 0.0;
  for (const auto& piece : s.result.solution.pieces) {
    const auto ball = chebyshev(piece.region);
    ASSERT_GT(ball.radius, 1e-9) << piece.active_set.to_string();
    for (const Vector& x : interior_samples(piece.region, ball.center, 100, rng, 0.1 * ball.radius)) {
      const auto ref = solve_parametric(s.qp, x);
      ASSERT_TRUE(ref.feasible);
      worst = std::max(worst, (piece.gain * x + piece.offset - ref.U).cwiseAbs().maxCoeff());
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Postprocess, RegionImagesMatchPartnerRegions) {
  const auto& s = solved5();
  const auto perms = constraint_permutations(s.qp, s.problem.group);
  for (const auto& a : s.result.solution.accepted) {
    const Polytope region = region_of(s.qp, a);
    const AffineLaw law = law_of(s.qp, a);
    for (std::size_t k = 0; k < perms.size(); ++k) {
      const auto& pair = s.problem.group.elements[k];
      const ActiveSet partner = apply_perm(perms[k], a);
      EXPECT_TRUE(same_set(normalize_rows(linear_image(region, pair.theta)), region_of(s.qp, partner)))
          << a.to_string() << " element " << k;
      const AffineLaw direct = law_of(s.qp, partner);
      const Matrix block = block_diagonal(pair.omega, 5);
      EXPECT_LE(max_abs(block * law.gain * pair.theta.inverse() - direct.gain), 1e-9 * (1.0 + max_abs(direct.gain)));
      EXPECT_LE(max_abs(block * law.offset - direct.offset), 1e-9);
    }
  }
}

TEST(Postprocess, MappedPiecesEqualDirectComputation) {
  const auto& s = solved5();
  for (const auto& p : s.result.solution.pieces) {
    EXPECT_TRUE(same_set(p.region, region_of(s.qp, p.active_set))) << p.active_set.to_string();
    const auto law = law_of(s.qp, p.active_set);
    EXPECT_LE(max_abs(p.gain - law.gain), 1e-9 * (1.0 + max_abs(law.gain)));
  }
}

TEST(Postprocess, PiecesAreDistinctAndSorted) {
  const auto& pieces = solved5().result.solution.pieces;
  for (std::size_t i = 1; i < pieces.size(); ++i)
    EXPECT_TRUE(TraversalLess{}(pieces[i - 1].active_set, pieces[i].active_set));
  const auto& expanded = solved5().result.expanded;
  for (const auto& p : pieces)
    EXPECT_TRUE(std::binary_search(expanded.begin(), expanded.end(), p.active_set, TraversalLess{}))
        << p.active_set.to_string();
  EXPECT_LT(pieces.size(), expanded.size());
}

TEST(Postprocess, PiecesCoverFeasibleStatesWithoutOverlap) {
  const auto& s = solved5();
  const auto& pieces = s.result.solution.pieces;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int feasible = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const Vector x = Vector::NullaryExpr(2, [&] { return u(rng); });
    if (!solve_parametric(s.qp, x).feasible) continue;
    ++feasible;
    bool inside = false;
    for (const auto& p : pieces) inside = inside || p.region.contains(x, 1e-8);
    EXPECT_TRUE(inside) << x.transpose();
  }
  EXPECT_GT(feasible, 100);
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const Vector c = chebyshev(pieces[i].region).center;
    for (std::size_t j = 0; j < pieces.size(); ++j)
      if (i != j) EXPECT_GE(pieces[j].region.max_violation(c), -1e-9) << i << " inside " << j;
  }
}

TEST(ExpandOrbits, ExampleOneRotation) {
  const auto e = example1();
  const auto out = expand_orbits(std::vector<ActiveSet>{ActiveSet{1, 2}}, e.perms);
  EXPECT_EQ(out, (std::vector<ActiveSet>{{1, 2}, {1, 4}, {2, 3}, {3, 4}}));
  const std::vector<ConstraintPermutation> identity{identity_permutation(4)};
  const std::vector<ActiveSet> sets{ActiveSet{2}, ActiveSet{}, ActiveSet{1, 3}};
  EXPECT_EQ(expand_orbits(sets, identity), (std::vector<ActiveSet>{{}, {2}, {1, 3}}));
}

TEST(ExpandOrbits, BaselineHasOnePiecePerAcceptedSet) {
  const auto p = example2();
  DpOptions o;
  o.mode = Mode::Baseline;
  const auto r = run_dp(p.ocp, 2, p.group, o);
  EXPECT_EQ(r.solution.pieces.size(), r.solution.accepted.size());
  for (const auto& piece : r.solution.pieces) EXPECT_TRUE(piece.reduced);
}
