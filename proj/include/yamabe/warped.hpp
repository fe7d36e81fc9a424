#pragma once

// Rotationally symmetric metrics  g = psi(x)^2 dx^2 + phi(x)^2 g_{S^{n-1}}  on S^n,
// sampled on a fixed uniform grid x_i in [0,1]. Arclength s is derived (ds = psi dx).
//
// Pole handling: phi is odd and psi (like every rotationally symmetric scalar)
// even across each pole; stencils read mirrored ghost values. Quotients that are
// 0/0 at the poles (phi''/phi, (1 - phi'^2)/phi^2) use their l'Hopital limits.
//
// Integrals use finite-volume cells around each node: cell volume is the exact
// integral of omega_{n-1} psi_i phi^{n-1} over the cell with phi linear on each
// half cell. The Laplacian is the matching flux form, so it is symmetric with
// respect to those weights and the discrete divergence theorem is exact.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "yamabe/error.hpp"
#include "yamabe/params.hpp"

namespace yamabe {

/// Relative tolerance on |dphi/ds| = 1 at the poles accepted by validate().
inline constexpr double kClosureTolerance = 1e-4;
/// Interior phi below this fraction of the total arclength is treated as a neckpinch.
inline constexpr double kNeckpinchFraction = 1e-6;
inline constexpr std::size_t kMinGridPoints = 9;

namespace detail {

enum class Parity { Even, Odd };

inline double ghosted(std::span<const double> f, std::ptrdiff_t i, Parity parity) {
  const auto last = static_cast<std::ptrdiff_t>(f.size()) - 1;
  double sign = 1.0;
  if (i < 0) {
    i = -i;
    if (parity == Parity::Odd) sign = -1.0;
  } else if (i > last) {
    i = 2 * last - i;
    if (parity == Parity::Odd) sign = -1.0;
  }
  return sign * f[static_cast<std::size_t>(i)];
}

// Sixth-order centered stencils for the first two derivatives. The tangential
// curvature (1 - phi_s^2)/phi^2 divides stencil error by phi^2 ~ x^2 near the
// poles, so the order here sets the curvature accuracy next to the axis.
inline double d1(std::span<const double> f, std::ptrdiff_t i, Parity par, double h) {
  auto g = [&](std::ptrdiff_t j) { return ghosted(f, j, par); };
  return (45.0 * (g(i + 1) - g(i - 1)) - 9.0 * (g(i + 2) - g(i - 2)) + (g(i + 3) - g(i - 3))) / (60.0 * h);
}

inline double d2(std::span<const double> f, std::ptrdiff_t i, Parity par, double h) {
  auto g = [&](std::ptrdiff_t j) { return ghosted(f, j, par); };
  return (270.0 * (g(i + 1) + g(i - 1)) - 27.0 * (g(i + 2) + g(i - 2)) + 2.0 * (g(i + 3) + g(i - 3)) -
          490.0 * g(i)) /
         (180.0 * h * h);
}

// Fourth order.
inline double d3(std::span<const double> f, std::ptrdiff_t i, Parity par, double h) {
  auto g = [&](std::ptrdiff_t j) { return ghosted(f, j, par); };
  return (-g(i + 3) + 8.0 * g(i + 2) - 13.0 * g(i + 1) + 13.0 * g(i - 1) - 8.0 * g(i - 2) +
          g(i - 3)) /
         (8.0 * h * h * h);
}

// psi_xx at a pole from the three nearest interior nodes (even fit A + Bx^2 + Cx^4).
// The pole node itself is skipped: closure re-enforcement sets it independently.
inline double pole_even_second_derivative(std::span<const double> f, bool left, double h) {
  const std::size_t N = f.size();
  const double f1 = left ? f[1] : f[N - 2];
  const double f2 = left ? f[2] : f[N - 3];
  const double f3 = left ? f[3] : f[N - 4];
  return (13.0 * (f2 - f1) - 3.0 * (f3 - f2)) / (12.0 * h * h);
}

// Mean of t^{n-1} over a segment on which t runs linearly from a to b.
inline double mean_power(double a, double b, int n) {
  double sum = 0.0;
  double ak = 1.0;
  for (int k = 0; k < n; ++k) {
    sum += ak * std::pow(b, n - 1 - k);
    ak *= a;
  }
  return sum / n;
}

}  // namespace detail

struct WarpedMetric {
  int n = 3;
  std::vector<double> x;
  std::vector<double> psi;
  std::vector<double> phi;

  std::size_t size() const { return x.size(); }
  double h() const { return 1.0 / static_cast<double>(x.size() - 1); }

  static std::vector<double> uniform_grid(std::size_t N) {
    std::vector<double> x(N);
    for (std::size_t i = 0; i < N; ++i) x[i] = static_cast<double>(i) / static_cast<double>(N - 1);
    return x;
  }

  /// Sets psi at both poles so that dphi/ds = +1 / -1 there exactly (in the discrete sense).
  void enforce_closure() {
    const auto last = static_cast<std::ptrdiff_t>(size()) - 1;
    phi.front() = 0.0;
    phi.back() = 0.0;
    psi.front() = detail::d1(phi, 0, detail::Parity::Odd, h());
    psi.back() = -detail::d1(phi, last, detail::Parity::Odd, h());
  }

  double arclength() const {
    double L = 0.0;
    for (std::size_t i = 0; i + 1 < size(); ++i) L += 0.5 * (psi[i] + psi[i + 1]) * h();
    return L;
  }

  /// s(x_i) by cumulative trapezoid.
  std::vector<double> arclength_coordinate() const {
    std::vector<double> s(size(), 0.0);
    for (std::size_t i = 1; i < size(); ++i) s[i] = s[i - 1] + 0.5 * (psi[i - 1] + psi[i]) * h();
    return s;
  }

  /// Smallest arclength spacing, h * min psi.
  double h_min() const { return h() * *std::min_element(psi.begin(), psi.end()); }

  void validate(double closure_tol = kClosureTolerance) const {
    const std::size_t N = size();
    if (n < 3) fail(ErrorCode::InvalidArgument, "dimension must be >= 3");
    if (N < kMinGridPoints || psi.size() != N || phi.size() != N)
      fail(ErrorCode::GridMismatch, "warped metric needs x, psi, phi of equal length >= " +
                                        std::to_string(kMinGridPoints));
    for (std::size_t i = 0; i < N; ++i) {
      if (!(psi[i] > 0.0) || !std::isfinite(psi[i]))
        fail(ErrorCode::InvalidArgument, "psi must be positive (index " + std::to_string(i) + ")");
    }
    if (phi.front() != 0.0 || phi.back() != 0.0)
      fail(ErrorCode::PoleClosureViolated, "phi must vanish at both poles");
    const double L = arclength();
    for (std::size_t i = 1; i + 1 < N; ++i) {
      if (!(phi[i] > 0.0) || !std::isfinite(phi[i]))
        fail(ErrorCode::NonPositiveWarp, "phi <= 0 at interior index " + std::to_string(i));
      if (phi[i] < kNeckpinchFraction * L)
        fail(ErrorCode::NeckpinchDetected, "phi below neckpinch threshold at index " + std::to_string(i));
    }
    const auto last = static_cast<std::ptrdiff_t>(N) - 1;
    const double left = detail::d1(phi, 0, detail::Parity::Odd, h()) / psi.front();
    const double right = detail::d1(phi, last, detail::Parity::Odd, h()) / psi.back();
    if (std::abs(left - 1.0) > closure_tol || std::abs(right + 1.0) > closure_tol)
      fail(ErrorCode::PoleClosureViolated, "dphi/ds at poles = " + std::to_string(left) + ", " +
                                               std::to_string(right) + " (expected +1, -1)");
  }

  /// Profile from sampled psi, phi on the uniform grid.
  static WarpedMetric from_profile(int n, std::vector<double> psi, std::vector<double> phi,
                                   bool close_poles = false) {
    WarpedMetric g;
    g.n = n;
    g.x = uniform_grid(psi.size());
    g.psi = std::move(psi);
    g.phi = std::move(phi);
    if (g.phi.size() != g.x.size()) fail(ErrorCode::GridMismatch, "psi and phi lengths differ");
    if (close_poles && g.size() >= kMinGridPoints) g.enforce_closure();
    g.validate();
    return g;
  }

  /// Round sphere of the given radius: phi = r sin(pi x), psi = r pi.
  static WarpedMetric round(int n, std::size_t N, double radius = 1.0) {
    std::vector<double> psi(N), phi(N);
    const auto x = uniform_grid(N);
    for (std::size_t i = 0; i < N; ++i) {
      psi[i] = radius * std::numbers::pi;
      phi[i] = radius * std::sin(std::numbers::pi * x[i]);
    }
    return from_profile(n, std::move(psi), std::move(phi), true);
  }

  /// phi ~ sin(pi x) + eps sin(k pi x); psi interpolates the closure values with
  /// (1 +- cos(pi x))/2 (even about both poles); then scaled so that L = pi.
  static WarpedMetric bumpy(int n, std::size_t N, int k, double eps) {
    const double pi = std::numbers::pi;
    const double left = pi * (1.0 + eps * k);
    const double right = -pi * (-1.0 + eps * k * std::cos(k * pi));
    if (!(left > 0.0 && right > 0.0))
      fail(ErrorCode::InvalidArgument, "bumpy profile: eps*k too large for a positive psi");
    const double scale = 2.0 * pi / (left + right);
    const auto x = uniform_grid(N);
    std::vector<double> psi(N), phi(N);
    for (std::size_t i = 0; i < N; ++i) {
      const double c = std::cos(pi * x[i]);
      psi[i] = scale * (0.5 * left * (1.0 + c) + 0.5 * right * (1.0 - c));
      phi[i] = scale * (std::sin(pi * x[i]) + eps * std::sin(k * pi * x[i]));
    }
    return from_profile(n, std::move(psi), std::move(phi), true);
  }

  /// g -> c g
  WarpedMetric scaled(double c) const {
    WarpedMetric g = *this;
    const double r = std::sqrt(c);
    for (auto& v : g.psi) v *= r;
    for (auto& v : g.phi) v *= r;
    return g;
  }

  /// v^{4/(n-2)} g for a positive, rotationally symmetric v.
  WarpedMetric conformal(std::span<const double> v) const {
    if (v.size() != size()) fail(ErrorCode::GridMismatch, "conformal factor length mismatch");
    WarpedMetric g = *this;
    const double e = 2.0 / (n - 2.0);
    for (std::size_t i = 0; i < size(); ++i) {
      if (!(v[i] > 0.0)) fail(ErrorCode::NonPositiveTestFunction, "conformal factor must be positive");
      const double f = std::pow(v[i], e);
      g.psi[i] *= f;
      g.phi[i] *= f;
    }
    g.enforce_closure();
    g.validate();
    return g;
  }
};

/// Cell volumes and interface conductances of the finite-volume discretization.
/// Both include the area of the unit (n-1)-sphere.
struct WarpedQuadrature {
  std::vector<double> weights;  // size N
  std::vector<double> flux;     // size N-1, omega phi_{i+1/2}^{n-1} / (h psi_{i+1/2})

  double integrate(std::span<const double> f) const {
    if (f.size() != weights.size()) fail(ErrorCode::GridMismatch, "integrand length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) sum += weights[i] * f[i];
    return sum;
  }

  double volume() const {
    double sum = 0.0;
    for (double w : weights) sum += w;
    return sum;
  }

  /// Flux-form Laplacian; exact adjoint of the Dirichlet form below.
  std::vector<double> laplacian(std::span<const double> u) const {
    const std::size_t N = weights.size();
    if (u.size() != N) fail(ErrorCode::GridMismatch, "grid function length mismatch");
    std::vector<double> out(N, 0.0);
    for (std::size_t i = 0; i + 1 < N; ++i) {
      const double f = flux[i] * (u[i + 1] - u[i]);
      out[i] += f;
      out[i + 1] -= f;
    }
    for (std::size_t i = 0; i < N; ++i) out[i] /= weights[i];
    return out;
  }

  /// sum over interfaces of flux * (u_{i+1}-u_i)(v_{i+1}-v_i), i.e. int <grad u, grad v> dV.
  double dirichlet(std::span<const double> u, std::span<const double> v) const {
    if (u.size() != weights.size() || v.size() != weights.size())
      fail(ErrorCode::GridMismatch, "grid function length mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i) sum += flux[i] * (u[i + 1] - u[i]) * (v[i + 1] - v[i]);
    return sum;
  }
};

inline WarpedQuadrature quadrature(const WarpedMetric& g) {
  const std::size_t N = g.size();
  const double h = g.h();
  const double omega = sphere_area(g.n - 1);
  WarpedQuadrature q;
  q.weights.assign(N, 0.0);
  q.flux.assign(N - 1, 0.0);
  for (std::size_t i = 0; i + 1 < N; ++i) {
    const double phi_mid = 0.5 * (g.phi[i] + g.phi[i + 1]);
    const double psi_mid = 0.5 * (g.psi[i] + g.psi[i + 1]);
    q.flux[i] = omega * std::pow(phi_mid, g.n - 1) / (h * psi_mid);
    q.weights[i] += omega * g.psi[i] * 0.5 * h * detail::mean_power(g.phi[i], phi_mid, g.n);
    q.weights[i + 1] += omega * g.psi[i + 1] * 0.5 * h * detail::mean_power(phi_mid, g.phi[i + 1], g.n);
  }
  return q;
}

inline double volume(const WarpedMetric& g) { return quadrature(g).volume(); }

struct WarpedCurvature {
  std::vector<double> R;
  std::vector<double> ric_radial;     // Ric(d_s, d_s)
  std::vector<double> ric_spherical;  // eigenvalue on the S^{n-1} directions, multiplicity n-1
  std::vector<double> ricci_sq;
  std::vector<double> traceless_ricci_sq;
  std::vector<double> laplacian_R;
  std::vector<double> volume_weight;  // omega psi phi^{n-1}
};

/// Radial and tangential sectional curvatures -phi''/phi and (1 - phi'^2)/phi^2
/// (primes in arclength) at every node, pole values by their l'Hopital limit.
struct SectionalCurvatures {
  std::vector<double> radial;
  std::vector<double> tangential;
};

inline SectionalCurvatures sectional_curvatures(const WarpedMetric& g) {
  using detail::Parity;
  const std::size_t N = g.size();
  const double h = g.h();
  SectionalCurvatures k{std::vector<double>(N), std::vector<double>(N)};
  for (std::size_t i = 0; i < N; ++i) {
    const auto j = static_cast<std::ptrdiff_t>(i);
    const double psi = g.psi[i];
    if (i == 0 || i + 1 == N) {
      const double phx = detail::d1(g.phi, j, Parity::Odd, h);
      const double phxxx = detail::d3(g.phi, j, Parity::Odd, h);
      const double psxx = detail::pole_even_second_derivative(g.psi, i == 0, h);
      const double limit = phxxx / (psi * psi * phx) - psxx / (psi * psi * psi);
      k.radial[i] = -limit;
      k.tangential[i] = -limit;
      continue;
    }
    const double phx = detail::d1(g.phi, j, Parity::Odd, h);
    const double phxx = detail::d2(g.phi, j, Parity::Odd, h);
    const double psx = detail::d1(g.psi, j, Parity::Even, h);
    const double ps = phx / psi;
    const double pss = phxx / (psi * psi) - phx * psx / (psi * psi * psi);
    const double phi = g.phi[i];
    k.radial[i] = -pss / phi;
    k.tangential[i] = (1.0 - ps) * (1.0 + ps) / (phi * phi);
  }
  return k;
}

inline WarpedCurvature compute_curvature(const WarpedMetric& g) {
  g.validate();
  const std::size_t N = g.size();
  const int n = g.n;
  const double omega = sphere_area(n - 1);
  const auto k = sectional_curvatures(g);
  WarpedCurvature c;
  c.R.resize(N);
  c.ric_radial.resize(N);
  c.ric_spherical.resize(N);
  c.ricci_sq.resize(N);
  c.traceless_ricci_sq.resize(N);
  c.volume_weight.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double rr = (n - 1) * k.radial[i];
    const double rs = k.radial[i] + (n - 2) * k.tangential[i];
    c.ric_radial[i] = rr;
    c.ric_spherical[i] = rs;
    c.R[i] = rr + (n - 1) * rs;
    c.ricci_sq[i] = rr * rr + (n - 1) * rs * rs;
    // |Rc - (R/n) g|^2 = ((n-1)/n) (Ric_rr - Ric_sph)^2 for this eigenstructure.
    const double d = rr - rs;
    c.traceless_ricci_sq[i] = (n - 1.0) / n * d * d;
    c.volume_weight[i] = omega * g.psi[i] * std::pow(g.phi[i], n - 1);
  }
  c.laplacian_R = quadrature(g).laplacian(c.R);
  return c;
}

inline void check_grid(const WarpedMetric& g, std::span<const double> u) {
  if (u.size() != g.size())
    fail(ErrorCode::GridMismatch,
         "grid function has " + std::to_string(u.size()) + " points, metric has " + std::to_string(g.size()));
}

inline std::vector<double> laplacian_apply(const WarpedMetric& g, std::span<const double> u) {
  check_grid(g, u);
  return quadrature(g).laplacian(u);
}

/// du/ds at the nodes for a rotationally symmetric u (zero at the poles).
inline std::vector<double> arclength_derivative(const WarpedMetric& g, std::span<const double> u) {
  check_grid(g, u);
  const std::size_t N = g.size();
  std::vector<double> du(N, 0.0);
  for (std::size_t i = 1; i + 1 < N; ++i)
    du[i] = detail::d1(u, static_cast<std::ptrdiff_t>(i), detail::Parity::Even, g.h()) / g.psi[i];
  return du;
}

/// d^2u/ds^2 at the nodes for a rotationally symmetric u.
inline std::vector<double> arclength_second_derivative(const WarpedMetric& g, std::span<const double> u) {
  using detail::Parity;
  check_grid(g, u);
  const std::size_t N = g.size();
  const double h = g.h();
  std::vector<double> out(N);
  for (std::size_t i = 0; i < N; ++i) {
    const auto j = static_cast<std::ptrdiff_t>(i);
    const double psi = g.psi[i];
    const double uxx = detail::d2(u, j, Parity::Even, h);
    if (i == 0 || i + 1 == N) {
      out[i] = uxx / (psi * psi);
    } else {
      const double ux = detail::d1(u, j, Parity::Even, h);
      const double psx = detail::d1(g.psi, j, Parity::Even, h);
      out[i] = uxx / (psi * psi) - ux * psx / (psi * psi * psi);
    }
  }
  return out;
}

inline std::vector<double> gradient_sq(const WarpedMetric& g, std::span<const double> u) {
  auto du = arclength_derivative(g, u);
  for (auto& v : du) v *= v;
  return du;
}

}  // namespace yamabe
