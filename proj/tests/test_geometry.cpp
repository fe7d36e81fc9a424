#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "yamabe/homogeneous.hpp"
#include "yamabe/params.hpp"
#include "yamabe/warped.hpp"

using namespace yamabe;
constexpr double kPi = std::numbers::pi;

namespace {

std::vector<double> cos_s(const WarpedMetric& g) {
  const auto s = g.arclength_coordinate();
  std::vector<double> u(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) u[i] = std::cos(s[i]);
  return u;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST(Params, RejectsLowDimensionAndWrongHomogeneousDimension) {
  EXPECT_THROW((ModelParams{2, Backend::WarpedSphere}.validate()), Error);
  EXPECT_THROW((ModelParams{4, Backend::Homogeneous3}.validate()), Error);
  EXPECT_NO_THROW((ModelParams{4, Backend::WarpedSphere}.validate()));
  EXPECT_NO_THROW((ModelParams{3, Backend::Homogeneous3}.validate()));
}

TEST(Params, SphereAreas) {
  EXPECT_NEAR(sphere_area(1), 2.0 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(2), 4.0 * kPi, 1e-14);
  EXPECT_NEAR(sphere_area(3), 2.0 * kPi * kPi, 1e-13);
}

TEST(Params, ExponentRangeAndCriticalSnap) {
  EXPECT_TRUE(ExponentParam::of(3, 5.0).is_critical);
  EXPECT_TRUE(ExponentParam::of(4, 3.0).is_critical);
  EXPECT_FALSE(ExponentParam::of(3, 4.999).is_critical);
  EXPECT_THROW(ExponentParam::of(3, 1.0), Error);
  EXPECT_THROW(ExponentParam::of(3, 5.01), Error);
}

// --- homogeneous -----------------------------------------------------------

TEST(HomogeneousCurvature, RoundIsEinsteinForAnyScale) {
  for (double k : {0.25, 1.0, 3.0}) {
    const auto c = compute_curvature(HomogeneousMetric{k, k, k});
    EXPECT_DOUBLE_EQ(c.ricci[0], c.ricci[1]);
    EXPECT_DOUBLE_EQ(c.ricci[1], c.ricci[2]);
    EXPECT_NEAR(c.traceless_ricci_sq, 0.0, 1e-14);
    EXPECT_NEAR(c.R, 6.0 / k, 1e-13);
  }
}

TEST(HomogeneousCurvature, MatchesCoordinateBruteForce) {
  for (auto g : {HomogeneousMetric{1, 1, 1}, HomogeneousMetric{1, 1, 2}, HomogeneousMetric{0.7, 1.3, 2.1}}) {
    const auto k = compute_curvature(g);
    auto ric = k.ricci;
    std::sort(ric.begin(), ric.end());
    for (const Eigen::Vector3d& x : {Eigen::Vector3d(0.3, -0.2, 0.4), Eigen::Vector3d(-0.5, 0.6, 0.1)}) {
      const auto b = oracles::brute_curvature_su2(g.a, g.b, g.c, x);
      EXPECT_NEAR(b.R, k.R, 1e-6);
      for (int i = 0; i < 3; ++i) EXPECT_NEAR(b.ricci[i], ric[i], 1e-6);
      EXPECT_NEAR(b.traceless_ricci_sq, k.traceless_ricci_sq, 1e-6);
      EXPECT_GE(b.traceless_ricci_sq, -1e-9);
    }
  }
}

TEST(HomogeneousCurvature, BruteForceRejectsCutLocusChart) {
  try {
    oracles::brute_curvature_su2(1, 1, 2, {2.0, 2.0, 0.0});
    FAIL() << "expected ChartDegenerate";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ChartDegenerate);
  }
}

TEST(HomogeneousCurvature, TraceAndTracelessIdentities) {
  for (auto g : {HomogeneousMetric{1, 1, 2}, HomogeneousMetric{0.3, 2.0, 5.0}, HomogeneousMetric{1, 4, 4}}) {
    const auto k = compute_curvature(g);
    EXPECT_EQ(k.ricci[0] + k.ricci[1] + k.ricci[2], k.R);
    EXPECT_NEAR(k.traceless_ricci_sq, k.ricci_sq - k.R * k.R / 3.0, 1e-12 * k.ricci_sq);
    EXPECT_GE(k.traceless_ricci_sq, 0.0);
    EXPECT_EQ(k.laplacian_R, 0.0);
  }
}

TEST(HomogeneousVolume, DeterminantScaling) {
  EXPECT_NEAR(volume(HomogeneousMetric{1, 1, 1}), 2.0 * kPi * kPi, 1e-13);
  const HomogeneousMetric g{1, 1, 2};
  EXPECT_NEAR(volume(g), 2.0 * kPi * kPi * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(volume(g.scaled(4.0)), 8.0 * volume(g), 1e-12);
}

TEST(HomogeneousMetric, RejectsNonPositive) {
  EXPECT_THROW(volume(HomogeneousMetric{1, 0, 1}), Error);
  EXPECT_THROW(compute_curvature(HomogeneousMetric{-1, 1, 1}), Error);
}

// --- warped ------------------------------------------------------------------

TEST(WarpedCurvature, RoundSphereIsConstantAndEinstein) {
  const auto g = WarpedMetric::round(3, 201);
  const auto k = compute_curvature(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(k.R[i], 6.0, 1e-6);
    EXPECT_NEAR(k.traceless_ricci_sq[i], 0.0, 1e-10);
    EXPECT_NEAR(k.laplacian_R[i], 0.0, 1e-3);
  }
}

TEST(WarpedCurvature, TraceIdentityAndNonNegativeTraceless) {
  const auto g = WarpedMetric::bumpy(3, 201, 2, 0.1);
  const auto k = compute_curvature(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(k.ric_radial[i] + 2.0 * k.ric_spherical[i], k.R[i], 1e-12 * std::abs(k.R[i]));
    const double direct = k.ricci_sq[i] - k.R[i] * k.R[i] / 3.0;
    EXPECT_NEAR(k.traceless_ricci_sq[i], direct, 1e-9 * k.ricci_sq[i]);
    EXPECT_GE(k.traceless_ricci_sq[i], 0.0);
  }
}

TEST(WarpedCurvature, HigherDimensionRoundSphere) {
  for (int n : {4, 5}) {
    const auto k = compute_curvature(WarpedMetric::round(n, 201));
    for (double r : k.R) EXPECT_NEAR(r, n * (n - 1.0), 1e-5);
  }
}

TEST(WarpedCurvature, CrossBackendAgreementOnRoundSphere) {
  for (double radius : {1.0, 1.5}) {
    const auto h = compute_curvature(HomogeneousMetric{radius * radius, radius * radius, radius * radius});
    const auto g = WarpedMetric::round(3, 401, radius);
    const auto k = compute_curvature(g);
    EXPECT_NEAR(k.R[200], h.R, 1e-6);
    EXPECT_NEAR(volume(g), volume(HomogeneousMetric{radius * radius, radius * radius, radius * radius}),
                2e-3 * volume(g));
    EXPECT_NEAR(max_abs(k.traceless_ricci_sq), 0.0, 1e-9);
  }
}

TEST(WarpedCurvature, SecondOrderSelfConvergence) {
  // Sample the midpoint x = 1/2 and x = 1/4 on grids N-1 = 100, 200, 400.
  std::vector<double> r_mid, r_q;
  for (std::size_t m : {100u, 200u, 400u}) {
    const auto g = WarpedMetric::bumpy(3, m + 1, 2, 0.1);
    const auto k = compute_curvature(g);
    r_mid.push_back(k.R[m / 2]);
    r_q.push_back(k.R[m / 4]);
  }
  for (const auto& r : {r_mid, r_q}) {
    const double e1 = std::abs(r[0] - r[1]);
    const double e2 = std::abs(r[1] - r[2]);
    EXPECT_GT(std::log2(e1 / e2), 1.8) << e1 << " " << e2;
  }
}

TEST(WarpedCurvature, RejectsBadProfiles) {
  auto g = WarpedMetric::round(3, 51);
  g.phi[10] = -0.1;
  try {
    compute_curvature(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonPositiveWarp);
  }
  auto h = WarpedMetric::round(3, 51);
  h.psi.front() *= 1.1;  // breaks dphi/ds = 1 at the left pole
  try {
    compute_curvature(h);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PoleClosureViolated);
  }
}

TEST(WarpedVolume, RoundAndScaling) {
  const auto g = WarpedMetric::round(3, 401);
  EXPECT_NEAR(volume(g), 2.0 * kPi * kPi, 1e-3);
  const auto b = WarpedMetric::bumpy(3, 201, 2, 0.1);
  EXPECT_NEAR(volume(b.scaled(4.0)), 8.0 * volume(b), 1e-12 * volume(b));
}

TEST(WarpedLaplacian, ConstantsAndEigenfunction) {
  const auto g = WarpedMetric::round(3, 401);
  const std::vector<double> one(g.size(), 2.5);
  EXPECT_LT(max_abs(laplacian_apply(g, one)), 1e-10);
  const auto u = cos_s(g);
  const auto lap = laplacian_apply(g, u);
  double err = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(lap[i] + 3.0 * u[i]));
  EXPECT_LT(err, 2e-3);
}

TEST(WarpedLaplacian, SecondOrderAccuracyOnEigenfunction) {
  std::vector<double> errs;
  for (std::size_t m : {100u, 200u}) {
    const auto g = WarpedMetric::round(3, m + 1);
    const auto u = cos_s(g);
    const auto lap = laplacian_apply(g, u);
    double err = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) err = std::max(err, std::abs(lap[i] + 3.0 * u[i]));
    errs.push_back(err);
  }
  EXPECT_GT(std::log2(errs[0] / errs[1]), 1.8);
}

TEST(WarpedLaplacian, DivergenceTheoremAndIntegrationByParts) {
  const auto g = WarpedMetric::bumpy(3, 301, 2, 0.1);
  const auto q = quadrature(g);
  std::vector<double> u(g.size()), v(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    u[i] = std::exp(0.4 * std::cos(kPi * g.x[i]));
    v[i] = 1.0 + 0.3 * std::cos(2.0 * kPi * g.x[i]);
  }
  const auto lap = laplacian_apply(g, u);
  EXPECT_NEAR(q.integrate(lap), 0.0, 1e-10);
  std::vector<double> lv(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) lv[i] = lap[i] * v[i];
  EXPECT_NEAR(q.integrate(lv) + q.dirichlet(u, v), 0.0, 1e-10);
}

TEST(WarpedLaplacian, GridMismatch) {
  const auto g = WarpedMetric::round(3, 51);
  try {
    laplacian_apply(g, std::vector<double>(50, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridMismatch);
  }
}

TEST(WarpedGradient, ConstantsAndRayleighIdentity) {
  const auto g = WarpedMetric::round(3, 401);
  EXPECT_LT(max_abs(gradient_sq(g, std::vector<double>(g.size(), 1.0))), 1e-12);
  const auto u = cos_s(g);
  const auto grad = gradient_sq(g, u);
  EXPECT_EQ(grad.front(), 0.0);
  EXPECT_EQ(grad.back(), 0.0);
  const auto q = quadrature(g);
  std::vector<double> u2(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) u2[i] = u[i] * u[i];
  EXPECT_NEAR(q.integrate(grad) / q.integrate(u2), 3.0, 1e-3);
}

TEST(WarpedGradient, UnitSpeedCoordinate) {
  // u = s is not symmetric at the poles, so only interior nodes are meaningful.
  const auto g = WarpedMetric::bumpy(3, 201, 2, 0.1);
  const auto s = g.arclength_coordinate();
  const auto grad = gradient_sq(g, s);
  for (std::size_t i = 10; i + 10 < g.size(); ++i) EXPECT_NEAR(grad[i], 1.0, 1e-4);
}

TEST(WarpedMetric, BumpyPresetIsArcNormalizedAndClosed) {
  const auto g = WarpedMetric::bumpy(3, 401, 2, 0.1);
  EXPECT_NEAR(g.arclength(), kPi, 1e-4);
  EXPECT_NO_THROW(g.validate(1e-10));
}

TEST(WarpedMetric, NeckpinchThreshold) {
  auto g = WarpedMetric::round(3, 101);
  g.phi[50] = 1e-8;
  try {
    g.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NeckpinchDetected);
  }
}
