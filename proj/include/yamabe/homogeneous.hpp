#pragma once

// Left-invariant metrics on SU(2) = S^3 in a Milnor frame e1, e2, e3 with
// [e1,e2] = 2 e3 (cyclic). The metric is diagonal with g(e_i,e_i) = a, b, c;
// (1,1,1) is the unit round 3-sphere.

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "yamabe/error.hpp"

namespace yamabe {

inline constexpr int kHomogeneousDim = 3;

struct HomogeneousMetric {
  double a = 1.0;
  double b = 1.0;
  double c = 1.0;

  void validate() const {
    if (!(a > 0.0 && b > 0.0 && c > 0.0))
      fail(ErrorCode::InvalidArgument, "homogeneous metric eigenvalues must be positive");
  }

  /// g -> s*g
  HomogeneousMetric scaled(double s) const { return {s * a, s * b, s * c}; }
};

struct HomogeneousCurvature {
  double R = 0.0;
  std::array<double, 3> ricci{};  // Ric(f_i, f_i) in the orthonormal frame f_i
  double ricci_sq = 0.0;          // |Rc|^2
  double traceless_ricci_sq = 0.0;
  double laplacian_R = 0.0;       // identically zero
  double volume_weight = 0.0;     // spatially constant; stored as the total volume
};

/// Volume of the round unit S^3.
inline constexpr double kUnitS3Volume = 2.0 * std::numbers::pi * std::numbers::pi;

inline double volume(const HomogeneousMetric& g) {
  g.validate();
  return kUnitS3Volume * std::sqrt(g.a * g.b * g.c);
}

namespace detail {

// Milnor: Ric(f1,f1) = (mu1^2 - (mu2 - mu3)^2) / 2 with mu_i = 2 x_i / sqrt(abc).
inline double milnor_ricci(double x, double y, double z, double abc) {
  const double d = y - z;
  return 2.0 * (x * x - d * d) / abc;
}

}  // namespace detail

inline HomogeneousCurvature compute_curvature(const HomogeneousMetric& g) {
  g.validate();
  const double abc = g.a * g.b * g.c;
  HomogeneousCurvature k;
  k.ricci = {detail::milnor_ricci(g.a, g.b, g.c, abc), detail::milnor_ricci(g.b, g.c, g.a, abc),
             detail::milnor_ricci(g.c, g.a, g.b, abc)};
  const auto& r = k.ricci;
  k.R = r[0] + r[1] + r[2];
  k.ricci_sq = r[0] * r[0] + r[1] * r[1] + r[2] * r[2];
  // sum_i (r_i - R/3)^2 written through pairwise differences: exactly zero when
  // the components coincide.
  const double d01 = r[0] - r[1];
  const double d12 = r[1] - r[2];
  const double d20 = r[2] - r[0];
  k.traceless_ricci_sq = (d01 * d01 + d12 * d12 + d20 * d20) / 3.0;
  k.laplacian_R = 0.0;
  k.volume_weight = volume(g);
  return k;
}

/// Right-hand side of (a,b,c)' under dg/dt = -2 Rc: a' = -2 a Ric(f1,f1), etc.
inline std::array<double, 3> ricci_flow_velocity(const HomogeneousMetric& g) {
  const double abc = g.a * g.b * g.c;
  return {-2.0 * g.a * detail::milnor_ricci(g.a, g.b, g.c, abc),
          -2.0 * g.b * detail::milnor_ricci(g.b, g.c, g.a, abc),
          -2.0 * g.c * detail::milnor_ricci(g.c, g.a, g.b, abc)};
}

}  // namespace yamabe
