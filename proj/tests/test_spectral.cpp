#include <gtest/gtest.h>

#include <cmath>

#include "yamabe/solver.hpp"
#include "yamabe/spectral.hpp"

using namespace yamabe;

TEST(Spectrum, RoundSphereEigenvalues) {
  const auto rep = symmetric_spectrum(WarpedMetric::round(3, 401), 6);
  ASSERT_EQ(rep.eigenvalues.size(), 6u);
  EXPECT_NEAR(rep.eigenvalues[0], 0.0, 1e-9);
  for (int k = 1; k < 6; ++k) EXPECT_NEAR(rep.eigenvalues[k] / (k * (k + 2.0)), 1.0, 1e-3) << k;
}

TEST(Spectrum, HigherDimensionRoundSphere) {
  const auto rep = symmetric_spectrum(WarpedMetric::round(4, 401), 4);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(rep.eigenvalues[k] / (k * (k + 3.0)), 1.0, 1e-3);
}

TEST(Spectrum, ConstantGroundStateAndOrdering) {
  const auto g = WarpedMetric::bumpy(3, 301, 2, 0.1);
  const auto rep = symmetric_spectrum(g, 5, true);
  EXPECT_NEAR(rep.eigenvalues[0], 0.0, 1e-9);
  for (std::size_t k = 1; k < rep.eigenvalues.size(); ++k) EXPECT_GE(rep.eigenvalues[k], rep.eigenvalues[k - 1]);
  const auto& v0 = rep.eigenvectors[0];
  for (double v : v0) EXPECT_NEAR(std::abs(v), std::abs(v0.front()), 1e-8);
}

TEST(Spectrum, EigenvectorsAreMassOrthonormal) {
  const auto g = WarpedMetric::bumpy(3, 201, 2, 0.1);
  const auto q = quadrature(g);
  const auto rep = symmetric_spectrum(g, 4, true);
  for (std::size_t a = 0; a < 4; ++a) {
    for (std::size_t b = 0; b < 4; ++b) {
      double dot = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) dot += q.weights[i] * rep.eigenvectors[a][i] * rep.eigenvectors[b][i];
      EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-10);
    }
  }
}

TEST(Spectrum, ScaleEquivariance) {
  const auto g = WarpedMetric::bumpy(3, 201, 2, 0.1);
  const auto a = symmetric_spectrum(g, 5);
  const auto b = symmetric_spectrum(g.scaled(4.0), 5);
  for (std::size_t k = 1; k < 5; ++k) EXPECT_NEAR(b.eigenvalues[k] * 4.0, a.eigenvalues[k], 1e-10 * a.eigenvalues[k]);
}

TEST(Spectrum, RejectsBadRequests) {
  const auto g = WarpedMetric::round(3, 21);
  try {
    symmetric_spectrum(g, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
  }
  try {
    symmetric_spectrum(g, 15);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GridTooCoarse);
  }
}

TEST(Koiso, RoundSphereIsMatchedAtEveryRadius) {
  for (double radius : {1.0, 2.0}) {
    const auto g = WarpedMetric::round(3, 401, radius);
    auto rep = symmetric_spectrum(g, 6);
    EXPECT_FALSE(koiso_check(g, rep));
    EXPECT_TRUE(rep.applicable);
    EXPECT_TRUE(rep.matched);
    EXPECT_NEAR(rep.target, 3.0 / (radius * radius), 1e-4);
    EXPECT_LT(rep.gap, 1e-4);
  }
}

TEST(Koiso, TightThresholdFlipsTheBoolean) {
  const auto g = WarpedMetric::round(3, 101);
  auto rep = symmetric_spectrum(g, 4);
  EXPECT_TRUE(koiso_check(g, rep, 1e-12));
  EXPECT_FALSE(rep.matched);
  EXPECT_GT(rep.gap, 1e-12);
}

TEST(Koiso, InapplicableWithoutConstantScalarCurvature) {
  const auto g = WarpedMetric::bumpy(3, 201, 2, 0.1);
  auto rep = symmetric_spectrum(g, 4);
  try {
    koiso_check(g, rep);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Inapplicable);
  }
  EXPECT_FALSE(rep.applicable);
}

TEST(Koiso, CriticalYamabeMetricOfBumpySphereIsRoundAndMatched) {
  // Constant scalar curvature metrics conformal to the round sphere are round,
  // so the first symmetric eigenvalue sits on R/(n-1).
  const auto g = WarpedMetric::bumpy(3, 401, 2, 0.1);
  const auto sols = continue_to_critical(g, 3, default_schedule(3, 2.0));
  const auto gy = g.conformal(sols.back().u);
  auto rep = symmetric_spectrum(gy, 4);
  EXPECT_FALSE(koiso_check(gy, rep));
  EXPECT_TRUE(rep.matched);
  EXPECT_LT(rep.gap, 1e-4);
}
