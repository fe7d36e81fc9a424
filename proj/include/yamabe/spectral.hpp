#pragma once

// Rotationally symmetric spectrum of -Lap on a warped sphere and the
// non-degeneracy test "R/(n-1) is not a positive eigenvalue".
//
// Only the symmetric sector is computed, so a "hypothesis holds" answer is
// partial evidence: non-symmetric eigenvalues are invisible here.

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "yamabe/error.hpp"
#include "yamabe/warped.hpp"

namespace yamabe {

inline constexpr double kKoisoDelta = 1e-3;
/// R counts as constant when max |R - mean R| <= kConstantRTolerance * |mean R|.
inline constexpr double kConstantRTolerance = 1e-3;
/// Estimated relative error lambda_k h^2 / 12 above which GridTooCoarse is raised.
inline constexpr double kSpectralErrorLimit = 0.1;

struct SpectralReport {
  std::vector<double> eigenvalues;  // ascending, lambda_0 ~ 0 first
  /// eigenvectors[k] is M-orthonormal (sum_i w_i v_i^2 = 1); empty unless requested.
  std::vector<std::vector<double>> eigenvectors;
  bool applicable = false;  // target defined (R constant)
  double target = std::numeric_limits<double>::quiet_NaN();
  bool matched = false;
  double gap = std::numeric_limits<double>::quiet_NaN();
};

/// First k eigenvalues of K v = lambda M v, with K the flux-form stiffness matrix
/// and M = diag(cell volumes) from the warped quadrature.
inline SpectralReport symmetric_spectrum(const WarpedMetric& g, std::size_t k, bool with_vectors = false) {
  g.validate();
  if (k < 2) fail(ErrorCode::InvalidArgument, "need k >= 2 eigenvalues");
  const std::size_t N = g.size();
  if (k > N) fail(ErrorCode::GridTooCoarse, "requested " + std::to_string(k) + " eigenvalues on " + std::to_string(N) + " nodes");
  const auto q = quadrature(g);

  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
  Eigen::VectorXd sub(static_cast<Eigen::Index>(N - 1));
  for (std::size_t i = 0; i + 1 < N; ++i) {
    const auto a = static_cast<Eigen::Index>(i);
    diag[a] += q.flux[i];
    diag[a + 1] += q.flux[i];
    sub[a] = -q.flux[i] / std::sqrt(q.weights[i] * q.weights[i + 1]);
  }
  for (std::size_t i = 0; i < N; ++i) diag[static_cast<Eigen::Index>(i)] /= q.weights[i];

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::SolverDiverged, "tridiagonal eigensolve failed");

  SpectralReport rep;
  for (std::size_t j = 0; j < k; ++j) rep.eigenvalues.push_back(es.eigenvalues()[static_cast<Eigen::Index>(j)]);

  double h_max = 0.0;
  for (std::size_t i = 0; i + 1 < N; ++i) h_max = std::max(h_max, 0.5 * (g.psi[i] + g.psi[i + 1]) * g.h());
  const double estimate = rep.eigenvalues.back() * h_max * h_max / 12.0;
  if (estimate > kSpectralErrorLimit)
    fail(ErrorCode::GridTooCoarse, "lambda_" + std::to_string(k - 1) + " error estimate " + std::to_string(estimate));

  if (with_vectors) {
    for (std::size_t j = 0; j < k; ++j) {
      std::vector<double> v(N);
      const auto col = es.eigenvectors().col(static_cast<Eigen::Index>(j));
      for (std::size_t i = 0; i < N; ++i) v[i] = col[static_cast<Eigen::Index>(i)] / std::sqrt(q.weights[i]);
      rep.eigenvectors.push_back(std::move(v));
    }
  }
  return rep;
}

/// True iff the hypothesis holds: min over positive eigenvalues of |lambda - R/(n-1)| / lambda > delta.
/// Fills target / matched / gap in `report`. Throws Inapplicable when R is not constant.
inline bool koiso_check(const WarpedMetric& g, const WarpedCurvature& curvature, SpectralReport& report,
                        double delta = kKoisoDelta) {
  const auto& R = curvature.R;
  double mean = 0.0;
  for (double r : R) mean += r;
  mean /= static_cast<double>(R.size());
  double dev = 0.0;
  for (double r : R) dev = std::max(dev, std::abs(r - mean));
  if (!(dev <= kConstantRTolerance * std::abs(mean))) {
    report.applicable = false;
    fail(ErrorCode::Inapplicable, "scalar curvature not constant (relative spread " +
                                      std::to_string(dev / std::abs(mean)) + ")");
  }
  report.applicable = true;
  report.target = mean / (g.n - 1);
  // lambda_0 is the constant mode; every later entry is a positive eigenvalue.
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < report.eigenvalues.size(); ++j) {
    const double lam = report.eigenvalues[j];
    if (lam > 0.0) gap = std::min(gap, std::abs(lam - report.target) / lam);
  }
  report.gap = gap;
  report.matched = gap <= delta;
  return !report.matched;
}

inline bool koiso_check(const WarpedMetric& g, SpectralReport& report, double delta = kKoisoDelta) {
  return koiso_check(g, compute_curvature(g), report, delta);
}

}  // namespace yamabe
