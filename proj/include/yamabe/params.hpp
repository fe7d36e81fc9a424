#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "yamabe/error.hpp"

namespace yamabe {

enum class Backend { Homogeneous3, WarpedSphere };

struct ModelParams {
  int n = 3;
  Backend backend = Backend::Homogeneous3;

  void validate() const {
    if (n < 3) fail(ErrorCode::InvalidArgument, "dimension must be >= 3, got " + std::to_string(n));
    if (backend == Backend::Homogeneous3 && n != 3)
      fail(ErrorCode::InvalidArgument, "homogeneous SU(2) backend is 3-dimensional");
  }
};

/// (n+2)/(n-2)
inline double critical_exponent(int n) { return (n + 2.0) / (n - 2.0); }

/// 4(n-1)/(n-2), the gradient weight in the Yamabe energy.
inline double conformal_coefficient(int n) { return 4.0 * (n - 1.0) / (n - 2.0); }

/// Area of the unit k-sphere in R^{k+1}: 2 pi^{(k+1)/2} / Gamma((k+1)/2).
inline double sphere_area(int k) {
  const double m = 0.5 * (k + 1);
  return 2.0 * std::pow(std::numbers::pi, m) / std::tgamma(m);
}

/// Exponent p in (1, (n+2)/(n-2)]. The critical endpoint is tracked as a flag so
/// that coefficient identities at p = (n+2)/(n-2) can be evaluated exactly.
struct ExponentParam {
  double p = 2.0;
  bool is_critical = false;

  static ExponentParam critical(int n) { return {critical_exponent(n), true}; }

  static ExponentParam of(int n, double p) {
    const double pc = critical_exponent(n);
    if (std::abs(p - pc) <= 1e-14 * pc) return critical(n);
    if (!(p > 1.0) || p > pc)
      fail(ErrorCode::InvalidArgument,
           "exponent p=" + std::to_string(p) + " outside (1, " + std::to_string(pc) + "]");
    return {p, false};
  }
};

}  // namespace yamabe
