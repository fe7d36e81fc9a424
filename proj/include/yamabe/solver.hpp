#pragma once

// Yamabe quotient, Euler-Lagrange residual and the (sub)critical solver.
//
//   Q_p(u) = int (c_n |grad u|^2 + R u^2) dV / (int u^{p+1} dV)^{2/(p+1)},  c_n = 4(n-1)/(n-2)
//   -c_n Lap u + R u = Y u^p,   int u^{p+1} dV = 1
//
// On the warped backend the energy is the discrete Dirichlet form of the
// finite-volume Laplacian, so the discrete Euler-Lagrange system is exactly the
// stationarity condition of the discrete quotient. Minimization runs over
// rotationally symmetric u only ("symmetric Yamabe quotient").

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "yamabe/error.hpp"
#include "yamabe/homogeneous.hpp"
#include "yamabe/params.hpp"
#include "yamabe/warped.hpp"

namespace yamabe {

/// Iterates are clamped from below here; a converged iterate on the clamp is rejected.
inline constexpr double kPositivityFloor = 1e-12;

struct SolverOptions {
  double residual_tol = 1e-8;
  double normalization_tol = 1e-10;
  int max_iterations = 20000;
  double damping = 1.0;              // v <- (1-damping) u + damping T(u)
  double newton_threshold = 1e-4;    // residual below which Newton polishing is attempted (0 disables)
  int max_newton_steps = 12;
  std::vector<double> warm_start;    // empty: start from the normalized constant
};

struct ConformalSolution {
  std::vector<double> u;  // one entry on the homogeneous backend
  ExponentParam p;
  double y_tilde = 0.0;
  double residual_l2 = 0.0;
  double normalization_defect = 0.0;
  int iterations = 0;
  double warm_start_distance = 0.0;  // sup |u - warm start|, 0 without a warm start
};

// ---------------------------------------------------------------------------
// Homogeneous backend: u is a positive constant.

inline double quotient(const HomogeneousMetric& g, double u, ExponentParam p) {
  if (!(u > 0.0)) fail(ErrorCode::NonPositiveTestFunction, "test function must be positive");
  const auto k = compute_curvature(g);
  const double V = volume(g);
  const double num = k.R * u * u * V;
  const double den = std::pow(std::pow(u, p.p + 1.0) * V, 2.0 / (p.p + 1.0));
  return num / den;
}

inline double el_residual(const HomogeneousMetric& g, double u, ExponentParam p, double y_tilde) {
  return compute_curvature(g).R * u - y_tilde * std::pow(u, p.p);
}

/// Constants solve the equation exactly: u = V^{-1/(p+1)}, Y = R V^{(p-1)/(p+1)}.
inline ConformalSolution solve_subcritical(const HomogeneousMetric& g, ExponentParam p,
                                           const SolverOptions& opts = {}) {
  const auto k = compute_curvature(g);
  const double V = volume(g);
  ConformalSolution sol;
  const double u = std::pow(V, -1.0 / (p.p + 1.0));
  sol.u = {u};
  sol.p = p;
  sol.y_tilde = k.R * std::pow(V, (p.p - 1.0) / (p.p + 1.0));
  sol.residual_l2 = std::abs(el_residual(g, u, p, sol.y_tilde)) * std::sqrt(V);
  sol.normalization_defect = std::abs(std::pow(u, p.p + 1.0) * V - 1.0);
  sol.iterations = 0;
  if (!opts.warm_start.empty()) sol.warm_start_distance = std::abs(u - opts.warm_start.front());
  return sol;
}

// ---------------------------------------------------------------------------
// Warped backend.

namespace detail {

struct WarpedYamabeProblem {
  int n;
  double c;
  WarpedQuadrature quad;
  std::vector<double> R;

  explicit WarpedYamabeProblem(const WarpedMetric& g)
      : n(g.n), c(conformal_coefficient(g.n)), quad(quadrature(g)), R(compute_curvature(g).R) {}

  void check(std::span<const double> u) const {
    if (u.size() != R.size()) fail(ErrorCode::GridMismatch, "test function length mismatch");
    for (double v : u)
      if (!(v > 0.0)) fail(ErrorCode::NonPositiveTestFunction, "test function must be positive");
  }

  double energy(std::span<const double> u) const {
    double potential = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) potential += quad.weights[i] * R[i] * u[i] * u[i];
    return c * quad.dirichlet(u, u) + potential;
  }

  double power_integral(std::span<const double> u, double p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += quad.weights[i] * std::pow(u[i], p + 1.0);
    return s;
  }

  double quotient(std::span<const double> u, double p) const {
    return energy(u) / std::pow(power_integral(u, p), 2.0 / (p + 1.0));
  }

  std::vector<double> residual(std::span<const double> u, double p, double y) const {
    auto lap = quad.laplacian(u);
    for (std::size_t i = 0; i < u.size(); ++i) lap[i] = -c * lap[i] + R[i] * u[i] - y * std::pow(u[i], p);
    return lap;
  }

  double l2(std::span<const double> f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += quad.weights[i] * f[i] * f[i];
    return std::sqrt(s);
  }

  void normalize(std::vector<double>& u, double p) const {
    const double scale = std::pow(power_integral(u, p), -1.0 / (p + 1.0));
    for (auto& v : u) v *= scale;
  }
};

/// LDL^T of a symmetric tridiagonal matrix, factored once and reused.
class TridiagonalFactor {
 public:
  TridiagonalFactor(std::vector<double> diag, std::vector<double> off) : d_(std::move(diag)), l_(off.size()) {
    for (std::size_t i = 0; i < d_.size(); ++i) {
      if (i > 0) {
        l_[i - 1] = off[i - 1] / d_[i - 1];
        d_[i] -= l_[i - 1] * off[i - 1];
      }
      if (!(d_[i] > 0.0)) fail(ErrorCode::IndefiniteOperator, "non-positive pivot in shifted operator");
    }
  }

  std::vector<double> solve(std::vector<double> b) const {
    const std::size_t N = d_.size();
    for (std::size_t i = 1; i < N; ++i) b[i] -= l_[i - 1] * b[i - 1];
    for (std::size_t i = 0; i < N; ++i) b[i] /= d_[i];
    for (std::size_t i = N - 1; i-- > 0;) b[i] -= l_[i] * b[i + 1];
    return b;
  }

 private:
  std::vector<double> d_;
  std::vector<double> l_;
};

/// General tridiagonal solve with partial pivoting (LAPACK dgtsv elimination).
/// sub[i] = A(i+1,i), sup[i] = A(i,i+1).
inline std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> diag,
                                             std::vector<double> sup, std::vector<double> b) {
  const std::size_t N = diag.size();
  std::vector<double> sup2(N, 0.0);
  for (std::size_t i = 0; i + 1 < N; ++i) {
    if (std::abs(diag[i]) >= std::abs(sub[i])) {
      if (diag[i] == 0.0) fail(ErrorCode::IndefiniteOperator, "singular tridiagonal system");
      const double fact = sub[i] / diag[i];
      diag[i + 1] -= fact * sup[i];
      b[i + 1] -= fact * b[i];
    } else {
      const double fact = diag[i] / sub[i];
      diag[i] = sub[i];
      const double temp = diag[i + 1];
      diag[i + 1] = sup[i] - fact * temp;
      if (i + 2 < N) {
        sup2[i] = sup[i + 1];
        sup[i + 1] = -fact * sup2[i];
      }
      sup[i] = temp;
      const double tb = b[i];
      b[i] = b[i + 1];
      b[i + 1] = tb - fact * b[i + 1];
    }
  }
  if (diag[N - 1] == 0.0) fail(ErrorCode::IndefiniteOperator, "singular tridiagonal system");
  b[N - 1] /= diag[N - 1];
  if (N > 1) b[N - 2] = (b[N - 2] - sup[N - 2] * b[N - 1]) / diag[N - 2];
  for (std::size_t i = N - 2; i-- > 0;) b[i] = (b[i] - sup[i] * b[i + 1] - sup2[i] * b[i + 2]) / diag[i];
  return b;
}

/// Newton on the bordered system  F(u,Y) = c K u + W R u - Y W u^p = 0,  sum W u^{p+1} = 1.
/// Returns false (leaving u, y untouched) if the residual fails to drop below tol.
inline bool newton_polish(const WarpedYamabeProblem& prob, double p, std::vector<double>& u, double& y,
                          double tol, int max_steps) {
  const std::size_t N = u.size();
  const auto& w = prob.quad.weights;
  const auto& k = prob.quad.flux;
  std::vector<double> v = u;
  double yv = y;
  for (int step = 0; step < max_steps; ++step) {
    std::vector<double> F(N), bvec(N), diag(N), off(N - 1);
    const auto lap = prob.quad.laplacian(v);
    double G = -1.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double up = std::pow(v[i], p);
      F[i] = w[i] * (-prob.c * lap[i] + prob.R[i] * v[i] - yv * up);
      bvec[i] = w[i] * up;
      diag[i] = w[i] * (prob.R[i] - p * yv * up / v[i]);
      G += w[i] * up * v[i];
    }
    for (std::size_t i = 0; i + 1 < N; ++i) {
      const double a = prob.c * k[i];
      diag[i] += a;
      diag[i + 1] += a;
      off[i] = -a;
    }
    std::vector<double> minus_f(N);
    for (std::size_t i = 0; i < N; ++i) minus_f[i] = -F[i];
    const auto x1 = solve_tridiagonal(off, diag, off, std::move(minus_f));
    const auto x2 = solve_tridiagonal(off, diag, off, bvec);
    double bx1 = 0.0, bx2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      bx1 += bvec[i] * x1[i];
      bx2 += bvec[i] * x2[i];
    }
    if (bx2 == 0.0) return false;
    const double dy = (-G / (p + 1.0) - bx1) / bx2;
    for (std::size_t i = 0; i < N; ++i) {
      v[i] += x1[i] + dy * x2[i];
      if (!(v[i] > kPositivityFloor)) return false;
    }
    prob.normalize(v, p);
    yv = prob.energy(v);
    const double res = prob.l2(prob.residual(v, p, yv));
    if (!std::isfinite(res)) return false;
    if (res <= tol) {
      u = std::move(v);
      y = yv;
      return true;
    }
  }
  return false;
}

}  // namespace detail

inline double quotient(const WarpedMetric& g, std::span<const double> u, ExponentParam p) {
  detail::WarpedYamabeProblem prob(g);
  prob.check(u);
  return prob.quotient(u, p.p);
}

/// Pointwise -c_n Lap u + R u - y_tilde u^p.
inline std::vector<double> el_residual(const WarpedMetric& g, std::span<const double> u, ExponentParam p,
                                       double y_tilde) {
  detail::WarpedYamabeProblem prob(g);
  prob.check(u);
  return prob.residual(u, p.p, y_tilde);
}

/// Spectral shift making c_n(-Lap) + R + sigma positive definite.
inline double operator_shift(std::span<const double> R, double p) {
  const double r_min = *std::min_element(R.begin(), R.end());
  return r_min > 0.0 ? 0.0 : -p * r_min + 1.0;
}

/// Shifted inverse iteration
///   (c_n(-Lap) + R + sigma) v = Y_k u_k^p + sigma u_k,   Y_k = Q_p(u_k),
/// followed by renormalization to int v^{p+1} dV = 1. A fixed point solves the
/// Euler-Lagrange system with Y = Q_p(u).
inline ConformalSolution solve_subcritical(const WarpedMetric& g, ExponentParam p, const SolverOptions& opts = {}) {
  detail::WarpedYamabeProblem prob(g);
  const std::size_t N = g.size();
  const double pp = p.p;

  std::vector<double> u = opts.warm_start.empty() ? std::vector<double>(N, 1.0) : opts.warm_start;
  prob.check(u);
  prob.normalize(u, pp);

  const double sigma = operator_shift(prob.R, pp);
  std::vector<double> diag(N), off(N - 1);
  for (std::size_t i = 0; i < N; ++i) diag[i] = prob.quad.weights[i] * (prob.R[i] + sigma);
  for (std::size_t i = 0; i + 1 < N; ++i) {
    const double a = prob.c * prob.quad.flux[i];
    diag[i] += a;
    diag[i + 1] += a;
    off[i] = -a;
  }
  const detail::TridiagonalFactor factor(std::move(diag), std::move(off));

  ConformalSolution sol;
  sol.p = p;
  bool clamped = false;
  bool try_newton = opts.newton_threshold > 0.0;
  int it = 0;
  for (;; ++it) {
    double y = prob.energy(u);
    const double res = prob.l2(prob.residual(u, pp, y));
    if (!std::isfinite(res))
      fail(ErrorCode::SolverDiverged, "non-finite residual at iteration " + std::to_string(it));
    if (res <= opts.residual_tol) break;
    if (try_newton && res <= opts.newton_threshold) {
      // Near the critical exponent the fixed point is only marginally stable
      // along conformal directions; Newton converges to the nearby critical point.
      if (detail::newton_polish(prob, pp, u, y, opts.residual_tol, opts.max_newton_steps)) {
        clamped = false;
        break;
      }
      try_newton = false;
    }
    if (it >= opts.max_iterations)
      fail(ErrorCode::SolverDiverged, "iteration cap " + std::to_string(opts.max_iterations) +
                                          " reached with residual " + std::to_string(res) +
                                          " at p=" + std::to_string(pp));
    std::vector<double> rhs(N);
    for (std::size_t i = 0; i < N; ++i)
      rhs[i] = prob.quad.weights[i] * (y * std::pow(u[i], pp) + sigma * u[i]);
    auto v = factor.solve(std::move(rhs));
    clamped = false;
    for (std::size_t i = 0; i < N; ++i) {
      v[i] = (1.0 - opts.damping) * u[i] + opts.damping * v[i];
      if (!(v[i] > kPositivityFloor)) {
        v[i] = kPositivityFloor;
        clamped = true;
      }
    }
    prob.normalize(v, pp);
    u = std::move(v);
  }
  if (clamped || *std::min_element(u.begin(), u.end()) <= kPositivityFloor)
    fail(ErrorCode::SolverDiverged, "converged iterate touches the positivity floor");

  sol.normalization_defect = std::abs(prob.power_integral(u, pp) - 1.0);
  if (sol.normalization_defect > opts.normalization_tol)
    fail(ErrorCode::NormalizationViolated, "normalization defect " + std::to_string(sol.normalization_defect));
  sol.y_tilde = prob.quotient(u, pp);
  sol.residual_l2 = prob.l2(prob.residual(u, pp, sol.y_tilde));
  sol.iterations = it;
  if (!opts.warm_start.empty()) {
    double d = 0.0;
    for (std::size_t i = 0; i < N; ++i) d = std::max(d, std::abs(u[i] - opts.warm_start[i]));
    sol.warm_start_distance = d;
  }
  sol.u = std::move(u);
  return sol;
}

/// p_k = p_crit - (p_crit - p0) 2^{-k} for k = 0..stages-2, then p_crit.
inline std::vector<double> default_schedule(int n, double p0, int stages = 6) {
  const double pc = critical_exponent(n);
  std::vector<double> s;
  for (int k = 0; k + 1 < stages; ++k) s.push_back(pc - (pc - p0) * std::ldexp(1.0, -k));
  s.push_back(pc);
  return s;
}

/// Warm-started sequence of solves along an increasing schedule ending at the critical exponent.
template <class Metric>
std::vector<ConformalSolution> continue_to_critical(const Metric& g, int n, std::span<const double> schedule,
                                                    SolverOptions opts = {}) {
  if (schedule.empty()) fail(ErrorCode::InvalidArgument, "empty p schedule");
  for (std::size_t k = 1; k < schedule.size(); ++k)
    if (!(schedule[k] > schedule[k - 1])) fail(ErrorCode::InvalidArgument, "p schedule must be increasing");
  const auto last = ExponentParam::of(n, schedule.back());
  if (!last.is_critical) fail(ErrorCode::InvalidArgument, "p schedule must end at the critical exponent");

  std::vector<ConformalSolution> out;
  for (double pk : schedule) {
    const auto p = ExponentParam::of(n, pk);
    try {
      out.push_back(solve_subcritical(g, p, opts));
    } catch (const Error& e) {
      throw Error(e.code(), e.message() + " [continuation stage p=" + std::to_string(pk) + "]");
    }
    opts.warm_start = out.back().u;
  }
  return out;
}

}  // namespace yamabe
