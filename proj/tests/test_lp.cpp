#include <gtest/gtest.h>

#include <numeric>

#include "support/reference.hpp"

using namespace symmpc;
using namespace symmpc::testing;

namespace {

const CondensedQp& qp1() {
  static const CondensedQp qp = condense(example2().ocp, 1);
  return qp;
}

}  // namespace

TEST(LpTests, EmptySetIsOptimalAroundOrigin) {
  const auto r = optimality_test(qp1(), ActiveSet{});
  ASSERT_TRUE(r.optimal);
  EXPECT_FALSE(r.degenerate);
  EXPECT_GT(r.t_star, 0.0);
  const auto ref = solve_parametric(qp1(), Vector::Zero(2));
  ASSERT_TRUE(ref.feasible);
  EXPECT_LE(ref.U.norm(), 1e-12);
  EXPECT_EQ(unambiguous_active_set(ref), ActiveSet{});
}

TEST(LpTests, OppositeFacetsCannotBeActiveTogether) {
  // rows 1 and 3 are u1 <= 1 and -u1 <= 1
  EXPECT_FALSE(optimality_test(qp1(), ActiveSet{1, 3}).optimal);
  EXPECT_FALSE(feasibility_test(qp1(), ActiveSet{1, 3}));
  EXPECT_FALSE(optimality_test(qp1(), ActiveSet{1, 2, 3}).optimal);
}

TEST(LpTests, FullSetIsNotOptimal) {
  std::vector<int> all(static_cast<std::size_t>(qp1().q));
  std::iota(all.begin(), all.end(), 1);
  EXPECT_FALSE(optimality_test(qp1(), ActiveSet(all)).optimal);
}

TEST(LpTests, EmptySetIsFeasible) { EXPECT_TRUE(feasibility_test(qp1(), ActiveSet{})); }

TEST(LpTests, WitnessesSatisfyKktAndReproduceActiveSet) {
  const auto& qp = qp1();
  int checked = 0;
  for (const auto& a : power_set(1, qp.q)) {
    const auto r = optimality_test(qp, a);
    if (!r.optimal) continue;
    EXPECT_TRUE(feasibility_test(qp, a)) << a.to_string();
    const Matrix ga = rows_of(qp.G, a);
    const Vector stat = qp.H * r.U + qp.F.transpose() * r.x0 + (a.empty() ? Vector::Zero(qp.num_inputs()) : Vector(ga.transpose() * r.lambda));
    EXPECT_LE(stat.cwiseAbs().maxCoeff(), 1e-7) << a.to_string();
    const double t = std::min(r.t_star, 1.0);
    if (!a.empty()) {
      EXPECT_GE(r.lambda.minCoeff(), t - 1e-9);
      const Vector eq = ga * r.U - rows_of(qp.E, a) * r.x0 - rows_of(qp.w, a);
      EXPECT_LE(eq.cwiseAbs().maxCoeff(), 1e-9);
    }
    if (r.slack.size() > 0) EXPECT_GE(r.slack.minCoeff(), t - 1e-9);
    if (r.degenerate) continue;
    // strictly complementary witness: the reference QP sees exactly A
    const auto ref = solve_parametric(qp, r.x0);
    ASSERT_TRUE(ref.feasible);
    EXPECT_LE((ref.U - r.U).cwiseAbs().maxCoeff(), 1e-7) << a.to_string();
    const auto seen = unambiguous_active_set(ref, 1e-3 * t);
    if (seen) EXPECT_EQ(*seen, a);
    ++checked;
  }
  EXPECT_GT(checked, 0);
}

TEST(LpTests, CountersTrackCalls) {
  LpCounter c;
  EXPECT_EQ(c.counts(), (LpCounts{0, 0}));
  optimality_test(qp1(), ActiveSet{}, {}, &c);
  EXPECT_EQ(c.counts(), (LpCounts{1, 0}));
  feasibility_test(qp1(), ActiveSet{1, 3}, {}, &c);
  EXPECT_EQ(c.counts(), (LpCounts{1, 1}));
  EXPECT_EQ(c.counts().total(), 2);
  c.reset();
  EXPECT_EQ(c.counts().total(), 0);
}

TEST(LpTests, IndexBeyondQRejected) {
  try {
    optimality_test(qp1(), ActiveSet{13});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexOverflow);
  }
}

TEST(LpTests, LpShape) {
  const auto lp = active_set_lp(qp1(), ActiveSet{1, 5}, true);
  EXPECT_EQ(lp.num_variables(), 2 + 2 + 2 + 1);
  EXPECT_EQ(lp.eq_matrix.rows(), 2 + 2);
  EXPECT_EQ(lp.ineq_matrix.rows(), 10);
  const auto lf = active_set_lp(qp1(), ActiveSet{1, 5}, false);
  EXPECT_EQ(lf.num_variables(), 2 + 2 + 1);
  EXPECT_EQ(lf.eq_matrix.rows(), 2);
}
