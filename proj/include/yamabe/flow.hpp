#pragma once

// Ricci flow dg/dt = -2 Rc on both backends.
//
// Homogeneous: (a,b,c)' = -2 (a Ric11, b Ric22, c Ric33), classical RK4.
// Warped: fixed coordinate gauge, psi_t = -Ric_rr psi, phi_t = -Ric_sph phi,
// classical RK4 with dt <= kCflLimit * h_min^2. Pole closure is re-imposed after
// every stage. The centered stencils leave a growing grid-scale mode next to each
// pole (rate ~1.7/h_s^2), so a sixth-difference dissipation term of relative size
// O(h^4) is added to both velocities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "yamabe/error.hpp"
#include "yamabe/homogeneous.hpp"
#include "yamabe/warped.hpp"

namespace yamabe {

/// Default warped time step dt = kCflFactor * h_min^2.
inline constexpr double kCflFactor = 0.2;
/// Steps above kCflLimit * h_min^2 are rejected.
/// RK4 real-axis bound 2.78 over the stiffest eigenvalue (~12.5 / h_min^2).
inline constexpr double kCflLimit = 0.22;
/// Coefficient of the h^4 d^6/ds^6 dissipation in the warped velocity.
inline constexpr double kDissipation = 0.1;
inline constexpr double kParameterMin = 1e-8;
inline constexpr double kParameterMax = 1e8;

inline HomogeneousMetric flow_step_homogeneous(const HomogeneousMetric& g, double dt) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "time step must be positive");
  g.validate();
  auto shift = [](const HomogeneousMetric& m, const std::array<double, 3>& k, double s) {
    return HomogeneousMetric{m.a + s * k[0], m.b + s * k[1], m.c + s * k[2]};
  };
  const auto k1 = ricci_flow_velocity(g);
  const auto k2 = ricci_flow_velocity(shift(g, k1, 0.5 * dt));
  const auto k3 = ricci_flow_velocity(shift(g, k2, 0.5 * dt));
  const auto k4 = ricci_flow_velocity(shift(g, k3, dt));
  HomogeneousMetric out{g.a + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
                        g.b + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
                        g.c + dt / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])};
  for (double v : {out.a, out.b, out.c})
    if (!(v > kParameterMin && v < kParameterMax))
      fail(ErrorCode::ParameterBlowup, "metric eigenvalue left (1e-8, 1e8): " + std::to_string(v));
  return out;
}

inline double cfl_bound(const WarpedMetric& g) { return kCflLimit * g.h_min() * g.h_min(); }

namespace detail {

inline double sixth_difference(std::span<const double> f, std::ptrdiff_t i, Parity par) {
  auto g = [&](std::ptrdiff_t j) { return ghosted(f, j, par); };
  return g(i - 3) + g(i + 3) - 6.0 * (g(i - 2) + g(i + 2)) + 15.0 * (g(i - 1) + g(i + 1)) - 20.0 * g(i);
}

// (psi_t, phi_t) at interior nodes; pole entries stay zero and are set by closure.
inline void warped_velocity(const WarpedMetric& g, std::vector<double>& dpsi, std::vector<double>& dphi) {
  const auto k = sectional_curvatures(g);
  const int n = g.n;
  const double h = g.h();
  dpsi.assign(g.size(), 0.0);
  dphi.assign(g.size(), 0.0);
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    const auto j = static_cast<std::ptrdiff_t>(i);
    const double damp = kDissipation / (h * h * g.psi[i] * g.psi[i]);
    dpsi[i] = -(n - 1) * k.radial[i] * g.psi[i] + damp * sixth_difference(g.psi, j, Parity::Even);
    dphi[i] = -(k.radial[i] + (n - 2) * k.tangential[i]) * g.phi[i] + damp * sixth_difference(g.phi, j, Parity::Odd);
  }
}

}  // namespace detail

/// One classical RK4 step.
inline WarpedMetric flow_step_warped(const WarpedMetric& g, double dt) {
  if (!(dt > 0.0)) fail(ErrorCode::InvalidArgument, "time step must be positive");
  if (dt > cfl_bound(g))
    fail(ErrorCode::CFLViolated, "dt=" + std::to_string(dt) + " exceeds " + std::to_string(cfl_bound(g)));
  const std::size_t N = g.size();
  std::vector<double> kp[4], kf[4];
  WarpedMetric stage = g;
  const double weights[4] = {0.5, 0.5, 1.0, 0.0};
  for (int s = 0; s < 4; ++s) {
    detail::warped_velocity(stage, kp[s], kf[s]);
    if (s == 3) break;
    for (std::size_t i = 1; i + 1 < N; ++i) {
      stage.psi[i] = g.psi[i] + weights[s] * dt * kp[s][i];
      stage.phi[i] = g.phi[i] + weights[s] * dt * kf[s][i];
    }
    stage.enforce_closure();
  }
  WarpedMetric out = g;
  for (std::size_t i = 1; i + 1 < N; ++i) {
    out.psi[i] = g.psi[i] + dt / 6.0 * (kp[0][i] + 2.0 * kp[1][i] + 2.0 * kp[2][i] + kp[3][i]);
    out.phi[i] = g.phi[i] + dt / 6.0 * (kf[0][i] + 2.0 * kf[1][i] + 2.0 * kf[2][i] + kf[3][i]);
  }
  out.enforce_closure();
  out.validate();
  return out;
}

inline HomogeneousMetric flow_step(const HomogeneousMetric& g, double dt) { return flow_step_homogeneous(g, dt); }
inline WarpedMetric flow_step(const WarpedMetric& g, double dt) { return flow_step_warped(g, dt); }

struct FlowDiagnostics {
  double t = 0.0;
  double volume = 0.0;
  double R_min = 0.0;
  double R_max = 0.0;
  double phi_min = 0.0;  // neck radius (equatorial radius without a neck); 0 on the homogeneous backend
  double traceless_ricci_l2 = 0.0;  // (int |R0|^2 dV)^{1/2}
};

inline FlowDiagnostics diagnose(const HomogeneousMetric& g, double t) {
  const auto k = compute_curvature(g);
  const double V = volume(g);
  return {t, V, k.R, k.R, 0.0, std::sqrt(k.traceless_ricci_sq * V)};
}

inline FlowDiagnostics diagnose(const WarpedMetric& g, double t) {
  const auto k = compute_curvature(g);
  const auto q = quadrature(g);
  FlowDiagnostics d;
  d.t = t;
  d.volume = q.volume();
  d.R_min = *std::min_element(k.R.begin(), k.R.end());
  d.R_max = *std::max_element(k.R.begin(), k.R.end());
  double neck = 0.0;
  for (std::size_t i = 1; i + 1 < g.size(); ++i) {
    if (g.phi[i] <= g.phi[i - 1] && g.phi[i] <= g.phi[i + 1] && i > 1 && i + 2 < g.size())
      neck = neck == 0.0 ? g.phi[i] : std::min(neck, g.phi[i]);
  }
  d.phi_min = neck > 0.0 ? neck : *std::max_element(g.phi.begin(), g.phi.end());
  d.traceless_ricci_l2 = std::sqrt(q.integrate(k.traceless_ricci_sq));
  return d;
}

template <class Metric>
struct FlowTrajectory {
  std::vector<double> times;
  std::vector<Metric> snapshots;
  std::vector<FlowDiagnostics> diagnostics;
  double dt = 0.0;
  int save_every = 1;
};

/// Integrates to round(t_end/dt) steps, saving every save_every steps (t = 0 included).
template <class Metric>
FlowTrajectory<Metric> integrate(const Metric& g0, double t_end, double dt, int save_every = 1) {
  if (!(dt > 0.0) || !(t_end >= 0.0) || save_every < 1)
    fail(ErrorCode::InvalidArgument, "integrate needs dt > 0, t_end >= 0, save_every >= 1");
  const auto steps = static_cast<std::int64_t>(std::llround(t_end / dt));
  FlowTrajectory<Metric> traj;
  traj.dt = dt;
  traj.save_every = save_every;
  Metric g = g0;
  traj.times.push_back(0.0);
  traj.snapshots.push_back(g);
  traj.diagnostics.push_back(diagnose(g, 0.0));
  for (std::int64_t s = 1; s <= steps; ++s) {
    try {
      g = flow_step(g, dt);
    } catch (const Error& e) {
      throw Error(e.code(), e.message() + " [at t=" + std::to_string(static_cast<double>(s - 1) * dt) + "]");
    }
    if (s % save_every == 0) {
      const double t = static_cast<double>(s) * dt;
      traj.times.push_back(t);
      traj.snapshots.push_back(g);
      traj.diagnostics.push_back(diagnose(g, t));
    }
  }
  return traj;
}

/// Time step and save interval so that the warped run hits t_end exactly with
/// `intervals` equal sample intervals and dt <= kCflFactor * h_min^2 (h_min of g0
/// shrunk by `margin` to leave room for contraction along the flow).
struct StepPlan {
  double dt;
  int save_every;
};

inline StepPlan plan_warped_steps(const WarpedMetric& g0, double t_end, int intervals, double margin = 1.0) {
  if (intervals < 1 || !(t_end > 0.0)) fail(ErrorCode::InvalidArgument, "bad step plan request");
  const double dt_max = kCflFactor * margin * g0.h_min() * g0.h_min();
  const double interval = t_end / intervals;
  const int per = std::max(1, static_cast<int>(std::ceil(interval / dt_max)));
  return {interval / per, per};
}

struct EvolutionIdentityReport {
  /// max |dR/dt - Lap R - 2|Rc|^2| / max |2|Rc|^2|, away from the poles
  double curvature_rel_error = 0.0;
  /// max |d log(dV density)/dt + R| / max |R|, away from the poles
  double density_rel_error = 0.0;
  /// max |dV/dt + int R dV| / int |R| dV
  double volume_rel_error = 0.0;
  std::size_t samples = 0;
};

namespace detail {

template <class Metric>
double uniform_spacing(const FlowTrajectory<Metric>& traj) {
  if (traj.snapshots.size() < 3)
    fail(ErrorCode::InsufficientSnapshots, "need >= 3 snapshots, have " + std::to_string(traj.snapshots.size()));
  const double dT = traj.times[1] - traj.times[0];
  for (std::size_t j = 1; j < traj.times.size(); ++j)
    if (std::abs((traj.times[j] - traj.times[j - 1]) - dT) > 1e-9 * dT)
      fail(ErrorCode::InvalidArgument, "snapshots are not uniformly spaced in time");
  return dT;
}

}  // namespace detail

inline EvolutionIdentityReport check_evolution_identities(const FlowTrajectory<HomogeneousMetric>& traj) {
  const double dT = detail::uniform_spacing(traj);
  EvolutionIdentityReport rep;
  for (std::size_t j = 1; j + 1 < traj.snapshots.size(); ++j) {
    const auto km = compute_curvature(traj.snapshots[j - 1]);
    const auto k0 = compute_curvature(traj.snapshots[j]);
    const auto kp = compute_curvature(traj.snapshots[j + 1]);
    const double dR = (kp.R - km.R) / (2.0 * dT);
    const double dV = (volume(traj.snapshots[j + 1]) - volume(traj.snapshots[j - 1])) / (2.0 * dT);
    const double V = volume(traj.snapshots[j]);
    rep.curvature_rel_error =
        std::max(rep.curvature_rel_error, std::abs(dR - 2.0 * k0.ricci_sq) / std::abs(2.0 * k0.ricci_sq));
    const double vol = std::abs(dV + k0.R * V) / std::abs(k0.R * V);
    rep.volume_rel_error = std::max(rep.volume_rel_error, vol);
    rep.density_rel_error = std::max(rep.density_rel_error, vol);
    ++rep.samples;
  }
  return rep;
}

inline EvolutionIdentityReport check_evolution_identities(const FlowTrajectory<WarpedMetric>& traj,
                                                         std::size_t pole_exclusion = 5) {
  const double dT = detail::uniform_spacing(traj);
  EvolutionIdentityReport rep;
  for (std::size_t j = 1; j + 1 < traj.snapshots.size(); ++j) {
    const auto& g = traj.snapshots[j];
    const std::size_t N = g.size();
    if (2 * pole_exclusion + 1 > N) fail(ErrorCode::InvalidArgument, "pole exclusion larger than grid");
    const auto km = compute_curvature(traj.snapshots[j - 1]);
    const auto k0 = compute_curvature(g);
    const auto kp = compute_curvature(traj.snapshots[j + 1]);
    double ric_scale = 0.0, r_scale = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      ric_scale = std::max(ric_scale, 2.0 * k0.ricci_sq[i]);
      r_scale = std::max(r_scale, std::abs(k0.R[i]));
    }
    for (std::size_t i = pole_exclusion; i + pole_exclusion < N; ++i) {
      if (i == 0 || i + 1 == N) continue;
      const double dR = (kp.R[i] - km.R[i]) / (2.0 * dT);
      const double err = std::abs(dR - k0.laplacian_R[i] - 2.0 * k0.ricci_sq[i]) / ric_scale;
      rep.curvature_rel_error = std::max(rep.curvature_rel_error, err);
      const double dlog = (std::log(kp.volume_weight[i]) - std::log(km.volume_weight[i])) / (2.0 * dT);
      rep.density_rel_error = std::max(rep.density_rel_error, std::abs(dlog + k0.R[i]) / r_scale);
    }
    const auto q = quadrature(g);
    std::vector<double> absR(N);
    for (std::size_t i = 0; i < N; ++i) absR[i] = std::abs(k0.R[i]);
    const double dV = (volume(traj.snapshots[j + 1]) - volume(traj.snapshots[j - 1])) / (2.0 * dT);
    rep.volume_rel_error =
        std::max(rep.volume_rel_error, std::abs(dV + q.integrate(k0.R)) / q.integrate(absR));
    ++rep.samples;
  }
  return rep;
}

}  // namespace yamabe
