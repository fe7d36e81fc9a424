#pragma once

// Time derivative of the normalized Yamabe-type constant Y~_p(t) along Ricci flow.
//
//   dY~/dt = A + B + C + D
//   A = 2 c_n int R0(grad u, grad u) dV        c_n = 4(n-1)/(n-2)
//   B = 2 int |R0|^2 u^2 dV
//   C = c1(n,p) int u^2 Lap R dV
//   D = c2(n,p) int (c_n R |grad u|^2 + R^2 u^2) dV
//
// where u solves -c_n Lap u + R u = Y~ u^p with int u^{p+1} dV = 1. The finite-
// difference side re-solves for u at every saved time, warm-starting along the
// trajectory, and differentiates the resulting Y~ in time.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "yamabe/error.hpp"
#include "yamabe/flow.hpp"
#include "yamabe/homogeneous.hpp"
#include "yamabe/params.hpp"
#include "yamabe/solver.hpp"
#include "yamabe/warped.hpp"

namespace yamabe {

/// Relative error denominators never drop below this fraction of int R^2 u^2 dV.
inline constexpr double kRelErrorFloor = 1e-10;
/// A warm-start jump above this multiple of the median jump flags the report.
inline constexpr double kJumpFlagFactor = 10.0;

/// (np - 2p - 3n + 2) / ((p+1)(n-2)); exactly -(n-2)/n at the critical exponent.
inline double coeff_c1(int n, ExponentParam p) {
  if (p.is_critical) return -(n - 2.0) / n;
  return (n * p.p - 2.0 * p.p - 3.0 * n + 2.0) / ((p.p + 1.0) * (n - 2.0));
}

/// 2/n - (p-1)/(p+1); exactly 0 at the critical exponent.
inline double coeff_c2(int n, ExponentParam p) {
  if (p.is_critical) return 0.0;
  return 2.0 / n - (p.p - 1.0) / (p.p + 1.0);
}

inline double coeff_c1(int n, double p) { return coeff_c1(n, ExponentParam::of(n, p)); }
inline double coeff_c2(int n, double p) { return coeff_c2(n, ExponentParam::of(n, p)); }

struct DerivativeTerms {
  double a = 0.0;  // traceless Ricci against grad u
  double b = 0.0;  // |R0|^2 u^2
  double c = 0.0;  // u^2 Lap R
  double d = 0.0;  // R |grad u|^2 and R^2 u^2
  double total = 0.0;
  double scale = 0.0;  // int R^2 u^2 dV, used for the relative-error floor
};

namespace detail {

inline DerivativeTerms assemble(double a, double b, double c, double d, double scale) {
  DerivativeTerms t{a, b, c, d, 0.0, scale};
  t.total = t.a + t.b + t.c + t.d;
  return t;
}

inline void check_normalization(double integral, double tol) {
  if (!(std::abs(integral - 1.0) <= tol))
    fail(ErrorCode::NormalizationViolated,
         "int u^{p+1} dV = " + std::to_string(integral) + " (tolerance " + std::to_string(tol) + ")");
}

}  // namespace detail

/// Homogeneous backend with constant u: A = C = 0 identically.
inline DerivativeTerms ytilde_derivative_rhs(const HomogeneousMetric& g, double u, ExponentParam p,
                                            double normalization_tol = 1e-10) {
  const auto k = compute_curvature(g);
  const double V = volume(g);
  detail::check_normalization(std::pow(u, p.p + 1.0) * V, normalization_tol);
  const int n = kHomogeneousDim;
  const double u2V = u * u * V;
  return detail::assemble(0.0, 2.0 * k.traceless_ricci_sq * u2V, 0.0, coeff_c2(n, p) * k.R * k.R * u2V,
                          k.R * k.R * u2V);
}

inline DerivativeTerms ytilde_derivative_rhs(const WarpedMetric& g, const WarpedCurvature& k,
                                            std::span<const double> u, ExponentParam p,
                                            double normalization_tol = 1e-10) {
  check_grid(g, u);
  const auto q = quadrature(g);
  const std::size_t N = g.size();
  const int n = g.n;
  const double cn = conformal_coefficient(n);
  const auto grad2 = gradient_sq(g, u);
  std::vector<double> fa(N), fb(N), fc(N), fd(N), fs(N), fp(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double u2 = u[i] * u[i];
    const double R = k.R[i];
    fa[i] = (k.ric_radial[i] - R / n) * grad2[i];
    fb[i] = k.traceless_ricci_sq[i] * u2;
    fc[i] = u2 * k.laplacian_R[i];
    fd[i] = cn * R * grad2[i] + R * R * u2;
    fs[i] = R * R * u2;
    fp[i] = std::pow(u[i], p.p + 1.0);
  }
  detail::check_normalization(q.integrate(fp), normalization_tol);
  return detail::assemble(2.0 * cn * q.integrate(fa), 2.0 * q.integrate(fb), coeff_c1(n, p) * q.integrate(fc),
                          coeff_c2(n, p) * q.integrate(fd), q.integrate(fs));
}

inline DerivativeTerms ytilde_derivative_rhs(const WarpedMetric& g, std::span<const double> u, ExponentParam p,
                                            double normalization_tol = 1e-10) {
  return ytilde_derivative_rhs(g, compute_curvature(g), u, p, normalization_tol);
}

enum class TimeDifference {
  Centered,    // (Y(t+D) - Y(t-D)) / 2D
  Richardson,  // (4 F(D) - F(2D)) / 3 with F the centered difference
};

struct IdentityReport {
  std::vector<double> t;
  std::vector<double> fd;
  std::vector<double> rhs;
  std::vector<double> term_a, term_b, term_c, term_d;
  std::vector<double> rel_error;
  std::vector<double> warm_start_jump;  // sup |u(t) - u(t - D)|
  /// Y~ at every saved time, including the endpoints that carry no sample.
  std::vector<double> y_tilde_all;
  /// Tracked branch at t = 0: its Y~ and max u / min u (1 for the constant branch).
  double branch_y_tilde = 0.0;
  double branch_u_ratio = 1.0;
  bool family_suspect = false;

  double max_rel_error() const {
    double m = 0.0;
    for (double e : rel_error) m = std::max(m, e);
    return m;
  }
};

struct VerifyOptions {
  TimeDifference scheme = TimeDifference::Centered;
  SolverOptions solver;
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

inline double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

// Shared driver: `solve(j, warm)` returns the solution at snapshot j,
// `rhs(j, sol)` the derivative terms there.
template <class Solve, class Rhs>
IdentityReport verify_chain(std::span<const double> times, double dT, TimeDifference scheme, Solve&& solve,
                            Rhs&& rhs) {
  const std::size_t M = times.size();
  const std::size_t reach = scheme == TimeDifference::Richardson ? 2 : 1;
  if (M < 2 * reach + 1)
    fail(ErrorCode::InsufficientSnapshots, "need >= " + std::to_string(2 * reach + 1) + " snapshots");

  std::vector<ConformalSolution> sols;
  sols.reserve(M);
  for (std::size_t j = 0; j < M; ++j) {
    try {
      sols.push_back(solve(j, j == 0 ? nullptr : &sols.back()));
    } catch (const Error& e) {
      throw Error(e.code(), e.message() + " [verify at t=" + std::to_string(times[j]) + "]");
    }
  }

  IdentityReport rep;
  for (const auto& s : sols) rep.y_tilde_all.push_back(s.y_tilde);
  rep.branch_y_tilde = sols.front().y_tilde;
  const auto [lo, hi] = std::minmax_element(sols.front().u.begin(), sols.front().u.end());
  rep.branch_u_ratio = *hi / *lo;

  const auto& Y = rep.y_tilde_all;
  auto centered = [&](std::size_t j, std::size_t k) { return (Y[j + k] - Y[j - k]) / (2.0 * k * dT); };
  std::vector<double> jumps;
  for (std::size_t j = reach; j + reach < M; ++j) {
    const double fd = scheme == TimeDifference::Richardson ? (4.0 * centered(j, 1) - centered(j, 2)) / 3.0
                                                           : centered(j, 1);
    const DerivativeTerms terms = rhs(j, sols[j]);
    const double denom = std::max(std::abs(terms.total), kRelErrorFloor * terms.scale);
    rep.t.push_back(times[j]);
    rep.fd.push_back(fd);
    rep.rhs.push_back(terms.total);
    rep.term_a.push_back(terms.a);
    rep.term_b.push_back(terms.b);
    rep.term_c.push_back(terms.c);
    rep.term_d.push_back(terms.d);
    rep.rel_error.push_back(denom > 0.0 ? std::abs(fd - terms.total) / denom : std::abs(fd));
    const double jump = sup_distance(sols[j].u, sols[j - 1].u);
    rep.warm_start_jump.push_back(jump);
    jumps.push_back(jump);
  }
  const double med = median(jumps);
  for (double jmp : jumps)
    if (jmp > kJumpFlagFactor * med && jmp > 0.0) rep.family_suspect = true;
  return rep;
}

}  // namespace detail

/// Homogeneous backend: exact constant solutions, so only the time difference contributes error.
inline IdentityReport verify_along_flow(const FlowTrajectory<HomogeneousMetric>& traj, ExponentParam p,
                                        const VerifyOptions& opts = {TimeDifference::Richardson, {}}) {
  const double dT = detail::uniform_spacing(traj);
  return detail::verify_chain(
      traj.times, dT, opts.scheme,
      [&](std::size_t j, const ConformalSolution*) { return solve_subcritical(traj.snapshots[j], p); },
      [&](std::size_t j, const ConformalSolution& s) {
        return ytilde_derivative_rhs(traj.snapshots[j], s.u.front(), p, opts.solver.normalization_tol);
      });
}

inline IdentityReport verify_along_flow(const FlowTrajectory<WarpedMetric>& traj, ExponentParam p,
                                        const VerifyOptions& opts = {}) {
  const double dT = detail::uniform_spacing(traj);
  return detail::verify_chain(
      traj.times, dT, opts.scheme,
      [&](std::size_t j, const ConformalSolution* prev) {
        SolverOptions so = opts.solver;
        if (prev) so.warm_start = prev->u;
        return solve_subcritical(traj.snapshots[j], p, so);
      },
      [&](std::size_t j, const ConformalSolution& s) {
        return ytilde_derivative_rhs(traj.snapshots[j], s.u, p, opts.solver.normalization_tol);
      });
}

/// dY~/dt at the first saved time by the one-sided fourth-order difference
/// (-25 Y0 + 48 Y1 - 36 Y2 + 16 Y3 - 3 Y4) / 12D.
inline double initial_derivative(std::span<const double> y_tilde, double dT) {
  if (y_tilde.size() < 5) fail(ErrorCode::InsufficientSnapshots, "one-sided difference needs 5 samples");
  const auto& Y = y_tilde;
  return (-25.0 * Y[0] + 48.0 * Y[1] - 36.0 * Y[2] + 16.0 * Y[3] - 3.0 * Y[4]) / (12.0 * dT);
}

/// Relative defect of  int u Rc(Hess u) dV = 1/4 int u^2 Lap R dV - int Rc(grad u, grad u) dV.
/// The Hessian of a radial u has eigenvalues u_ss (radial) and (phi_s/phi) u_s (spherical).
inline double bianchi_ibp_check(const WarpedMetric& g, std::span<const double> u) {
  check_grid(g, u);
  const auto k = compute_curvature(g);
  const auto q = quadrature(g);
  const auto us = arclength_derivative(g, u);
  const auto uss = arclength_second_derivative(g, u);
  const std::size_t N = g.size();
  const int n = g.n;
  std::vector<double> lhs(N), lap_term(N), grad_term(N), floor_term(N);
  for (std::size_t i = 0; i < N; ++i) {
    double tangential;
    if (i == 0 || i + 1 == N) {
      tangential = uss[i];
    } else {
      const double phs = detail::d1(g.phi, static_cast<std::ptrdiff_t>(i), detail::Parity::Odd, g.h()) / g.psi[i];
      tangential = phs / g.phi[i] * us[i];
    }
    lhs[i] = u[i] * (k.ric_radial[i] * uss[i] + (n - 1) * k.ric_spherical[i] * tangential);
    lap_term[i] = 0.25 * u[i] * u[i] * k.laplacian_R[i];
    grad_term[i] = k.ric_radial[i] * us[i] * us[i];
    floor_term[i] = std::abs(k.R[i]) * u[i] * u[i];
  }
  const double L = q.integrate(lhs);
  const double A = q.integrate(lap_term);
  const double B = q.integrate(grad_term);
  const double scale = std::max(std::abs(L) + std::abs(A) + std::abs(B), kRelErrorFloor * q.integrate(floor_term));
  return std::abs(L - (A - B)) / scale;
}

/// int |R0|^2 dV; zero exactly on Einstein metrics.
inline double einstein_defect(const HomogeneousMetric& g) {
  return compute_curvature(g).traceless_ricci_sq * volume(g);
}

inline double einstein_defect(const WarpedMetric& g) {
  return quadrature(g).integrate(compute_curvature(g).traceless_ricci_sq);
}

}  // namespace yamabe
