#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "yamabe/solver.hpp"

using namespace yamabe;

namespace {

const double kRoundCritical = 6.0 * std::pow(2.0 * std::numbers::pi * std::numbers::pi, 2.0 / 3.0);

std::vector<double> smooth_positive(const WarpedMetric& g, double eps) {
  std::vector<double> u(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) u[i] = 1.0 + eps * std::cos(std::numbers::pi * g.x[i]);
  return u;
}

double weighted_l2(const WarpedMetric& g, const std::vector<double>& f) {
  const auto q = quadrature(g);
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += q.weights[i] * f[i] * f[i];
  return std::sqrt(s);
}

}  // namespace

TEST(Quotient, HomogeneousConstantIsIndependentOfScale) {
  const HomogeneousMetric g{1, 1, 2};
  const auto k = compute_curvature(g);
  const double V = volume(g);
  for (double p : {2.0, 3.0, 5.0}) {
    const auto pp = ExponentParam::of(3, p);
    const double expected = k.R * std::pow(V, (p - 1.0) / (p + 1.0));
    for (double u : {0.1, 1.0, 7.0}) EXPECT_NEAR(quotient(g, u, pp), expected, 1e-12 * expected);
  }
  EXPECT_THROW(quotient(g, 0.0, ExponentParam::of(3, 3.0)), Error);
}

TEST(Quotient, RoundCriticalValue) {
  EXPECT_NEAR(quotient(HomogeneousMetric{1, 1, 1}, 1.0, ExponentParam::critical(3)), kRoundCritical, 1e-12);
  const auto g = WarpedMetric::round(3, 401);
  const std::vector<double> one(g.size(), 1.0);
  EXPECT_NEAR(quotient(g, one, ExponentParam::critical(3)), kRoundCritical, 1e-3 * kRoundCritical);
}

TEST(Quotient, ScalingLawUnderMetricDilation) {
  const auto g = WarpedMetric::bumpy(3, 201, 2, 0.1);
  const auto u = smooth_positive(g, 0.3);
  for (double p : {2.0, 3.0, 4.0, 5.0}) {
    const auto pp = ExponentParam::of(3, p);
    const double expo = 3.0 / 2.0 - 1.0 - 3.0 / (p + 1.0);
    for (double c : {0.25, 4.0}) {
      const double ratio = quotient(g.scaled(c), u, pp) / quotient(g, u, pp);
      EXPECT_NEAR(ratio, std::pow(c, expo), 1e-10);
    }
  }
  const HomogeneousMetric h{1, 1, 2};
  const auto crit = ExponentParam::critical(3);
  EXPECT_NEAR(quotient(h.scaled(4.0), 1.0, crit), quotient(h, 1.0, crit), 1e-12);
}

TEST(Quotient, DegreeZeroHomogeneousInU) {
  const auto g = WarpedMetric::bumpy(3, 201, 2, 0.1);
  auto u = smooth_positive(g, 0.3);
  const auto p = ExponentParam::of(3, 3.0);
  const double q0 = quotient(g, u, p);
  for (auto& v : u) v *= 3.7;
  EXPECT_NEAR(quotient(g, u, p), q0, 1e-12 * q0);
}

TEST(Quotient, RejectsNonPositiveAndMismatchedU) {
  const auto g = WarpedMetric::round(3, 51);
  std::vector<double> u(g.size(), 1.0);
  u[7] = 0.0;
  try {
    quotient(g, u, ExponentParam::of(3, 3.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveTestFunction);
  }
  EXPECT_THROW(quotient(g, std::vector<double>(10, 1.0), ExponentParam::of(3, 3.0)), Error);
}

TEST(ElResidual, HomogeneousConstantSolutionIsExact) {
  const HomogeneousMetric g{0.7, 1.3, 2.1};
  for (double p : {2.0, 3.0, 5.0}) {
    const auto pp = ExponentParam::of(3, p);
    const double V = volume(g);
    const double u = std::pow(V, -1.0 / (p + 1.0));
    const double y = compute_curvature(g).R * std::pow(V, (p - 1.0) / (p + 1.0));
    EXPECT_NEAR(el_residual(g, u, pp, y), 0.0, 1e-13);
  }
}

TEST(ElResidual, RoundWarpedConstantConvergesAtSecondOrder) {
  const auto p = ExponentParam::of(3, 3.0);
  std::vector<double> errs;
  for (std::size_t N : {101u, 201u}) {
    const auto g = WarpedMetric::round(3, N);
    const double V = 2.0 * std::numbers::pi * std::numbers::pi;
    const std::vector<double> u(N, std::pow(V, -0.25));
    const auto r = el_residual(g, u, p, 6.0 * std::sqrt(V));
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    errs.push_back(m);
  }
  EXPECT_LT(errs[1], 1e-3);
  EXPECT_GT(std::log2(errs[0] / errs[1]), 1.8);
}

TEST(ElResidual, MatchesDirectionalDerivativeOfQuotient) {
  const auto g = WarpedMetric::bumpy(3, 201, 2, 0.1);
  const auto p = ExponentParam::of(3, 3.0);
  const auto q = quadrature(g);
  auto u = smooth_positive(g, 0.1);
  double P = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) P += q.weights[i] * std::pow(u[i], p.p + 1.0);
  for (auto& v : u) v *= std::pow(P, -1.0 / (p.p + 1.0));

  const double y = quotient(g, u, p);
  const auto defect = el_residual(g, u, p, y);
  double lin = 0.0, self = 0.0;
  std::vector<double> w(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    w[i] = std::cos(2.0 * std::numbers::pi * g.x[i]);
    lin += q.weights[i] * defect[i] * w[i];
    self += q.weights[i] * defect[i] * u[i];
  }
  const double eta = 1e-5;
  auto shifted = [&](double e) {
    std::vector<double> v = u;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += e * w[i];
    return quotient(g, v, p);
  };
  const double fd = (shifted(eta) - shifted(-eta)) / (2.0 * eta);
  EXPECT_NEAR(fd, 2.0 * lin, 1e-6 * std::abs(y));
  EXPECT_NEAR(self, 0.0, 1e-10 * y);
  EXPECT_GT(std::abs(lin), 1e-4);
}

TEST(SolveSubcritical, HomogeneousClosedForm) {
  const HomogeneousMetric g{1, 1, 2};
  for (double p : {1.5, 3.0, 5.0}) {
    const auto s = solve_subcritical(g, ExponentParam::of(3, p));
    const double V = volume(g);
    EXPECT_DOUBLE_EQ(s.u.front(), std::pow(V, -1.0 / (p + 1.0)));
    EXPECT_NEAR(s.y_tilde, 4.0 * std::pow(V, (p - 1.0) / (p + 1.0)), 1e-12 * s.y_tilde);
    EXPECT_LT(s.residual_l2, 1e-12);
    EXPECT_EQ(s.iterations, 0);
  }
}

TEST(SolveSubcritical, RoundWarpedReturnsConstant) {
  const auto g = WarpedMetric::round(3, 201);
  const auto p = ExponentParam::of(3, 3.0);
  const auto s = solve_subcritical(g, p);
  const auto [lo, hi] = std::minmax_element(s.u.begin(), s.u.end());
  EXPECT_LT(*hi / *lo - 1.0, 1e-6);
  EXPECT_LT(s.residual_l2, 1e-8);
  EXPECT_LT(s.normalization_defect, 1e-10);
  const double V = volume(g);
  EXPECT_NEAR(s.y_tilde, 6.0 * std::sqrt(V), 1e-3 * s.y_tilde);
  EXPECT_TRUE(oracles::random_trial_domination(g, p, s.y_tilde, 20, 7));
}

TEST(SolveSubcritical, BumpyWarpedIsNonConstantAndDominates) {
  const auto g = WarpedMetric::bumpy(3, 201, 2, 0.1);
  const auto p = ExponentParam::of(3, 3.0);
  const auto s = solve_subcritical(g, p);
  EXPECT_LT(s.residual_l2, 1e-8);
  EXPECT_LT(s.normalization_defect, 1e-10);
  const auto [lo, hi] = std::minmax_element(s.u.begin(), s.u.end());
  EXPECT_GT(*hi / *lo - 1.0, 1e-3);
  EXPECT_NEAR(s.y_tilde, quotient(g, s.u, p), 1e-12 * s.y_tilde);
  EXPECT_LT(s.y_tilde, quotient(g, std::vector<double>(g.size(), 1.0), p));
  EXPECT_TRUE(oracles::random_trial_domination(g, p, s.y_tilde, 20, 11));
  const auto r = el_residual(g, s.u, p, s.y_tilde);
  EXPECT_LT(weighted_l2(g, r), 1e-8);
}

TEST(SolveSubcritical, WarmStartReportsDistanceAndAgrees) {
  const auto g = WarpedMetric::bumpy(3, 201, 2, 0.1);
  const auto p = ExponentParam::of(3, 3.0);
  const auto cold = solve_subcritical(g, p);
  SolverOptions o;
  o.warm_start = cold.u;
  const auto warm = solve_subcritical(g, p, o);
  EXPECT_LT(warm.warm_start_distance, 1e-8);
  EXPECT_NEAR(warm.y_tilde, cold.y_tilde, 1e-10 * cold.y_tilde);
  EXPECT_LE(warm.iterations, cold.iterations);
}

TEST(SolveSubcritical, WarpedHigherDimension) {
  const auto g = WarpedMetric::bumpy(4, 201, 2, 0.1);
  const auto p = ExponentParam::of(4, 2.0);
  const auto s = solve_subcritical(g, p);
  EXPECT_LT(s.residual_l2, 1e-8);
  EXPECT_TRUE(oracles::random_trial_domination(g, p, s.y_tilde, 10, 3));
}

TEST(ContinueToCritical, RoundScheduleEndsAtRoundValue) {
  const auto g = WarpedMetric::round(3, 201);
  const std::vector<double> schedule{2, 3, 4, 5};
  const auto sols = continue_to_critical(g, 3, schedule);
  ASSERT_EQ(sols.size(), 4u);
  EXPECT_TRUE(sols.back().p.is_critical);
  for (std::size_t k = 0; k + 1 < sols.size(); ++k) EXPECT_FALSE(sols[k].p.is_critical);
  for (const auto& s : sols) EXPECT_LT(s.residual_l2, 1e-8);
  EXPECT_NEAR(sols.back().y_tilde, kRoundCritical, 2e-3 * kRoundCritical);
  const auto h = continue_to_critical(HomogeneousMetric{1, 1, 1}, 3, schedule);
  EXPECT_NEAR(h.back().y_tilde, kRoundCritical, 1e-12);
}

TEST(ContinueToCritical, DefaultScheduleShape) {
  const auto s = default_schedule(3, 2.0, 6);
  ASSERT_EQ(s.size(), 6u);
  EXPECT_DOUBLE_EQ(s.front(), 2.0);
  EXPECT_DOUBLE_EQ(s.back(), 5.0);
  for (std::size_t k = 1; k < s.size(); ++k) EXPECT_GT(s[k], s[k - 1]);
}

TEST(ContinueToCritical, RejectsBadSchedules) {
  const HomogeneousMetric g{1, 1, 2};
  EXPECT_THROW(continue_to_critical(g, 3, std::vector<double>{}), Error);
  EXPECT_THROW(continue_to_critical(g, 3, std::vector<double>{3, 2, 5}), Error);
  EXPECT_THROW(continue_to_critical(g, 3, std::vector<double>{2, 3, 4}), Error);
}

TEST(Tridiagonal, SolvesKnownSystem) {
  // [2 -1 0; -1 2 -1; 0 -1 2] x = [1 0 1] -> x = [1 1 1]
  const auto x = detail::solve_tridiagonal({-1, -1}, {2, 2, 2}, {-1, -1}, {1, 0, 1});
  for (double v : x) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(Tridiagonal, PivotsPastZeroDiagonal) {
  // [0 1; 1 0] x = [2 3] -> x = [3 2]
  const auto x = detail::solve_tridiagonal({1}, {0, 0}, {1}, {2, 3});
  EXPECT_NEAR(x[0], 3.0, 1e-15);
  EXPECT_NEAR(x[1], 2.0, 1e-15);
}
