#pragma once

// Subcommand pipelines behind the yamabe_lab executable. Each command writes its
// artifacts under an output directory, echoes a short summary to `log`, and
// returns a one-line key=value status.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <functional>
#include <future>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "yamabe/config.hpp"
#include "yamabe/flow.hpp"
#include "yamabe/io.hpp"
#include "yamabe/solver.hpp"
#include "yamabe/spectral.hpp"
#include "yamabe/verifier.hpp"

namespace yamabe {

inline constexpr const char* kToolVersion = "yamabe-lab 1.0.0";

struct RunContext {
  std::filesystem::path out_dir;
  int jobs = 1;
  std::ostream* log = nullptr;
};

struct RunOutcome {
  bool ok = true;
  std::string status;  // key=value pairs, no newline
};

namespace detail {

/// Evaluates fn(0..count-1) on up to `jobs` threads; results keep index order
/// and the lowest-index exception is rethrown.
template <class Fn>
auto parallel_map(std::size_t count, int jobs, Fn fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using R = decltype(fn(std::size_t{}));
  std::vector<R> out(count);
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(count);
  for (std::size_t start = 0; start < count; start += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<void>> batch;
    for (std::size_t i = start; i < std::min(count, start + static_cast<std::size_t>(jobs)); ++i)
      batch.push_back(std::async(std::launch::async, [&, i] {
        try {
          out[i] = fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }));
    for (auto& f : batch) f.get();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline std::string p_tag(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "p%.6g", p);
  return buf;
}

inline void write_manifest(const RunContext& ctx, const std::string& command, const ExperimentConfig* cfg,
                           std::uint64_t seed) {
  std::string text = "tool = " + std::string(kToolVersion) + "\ncommand = " + command + "\nseed = " +
                     std::to_string(seed) + "\njobs = " + std::to_string(ctx.jobs) + "\n";
  if (cfg) text += "\n" + cfg->echo();
  io::write_atomic(ctx.out_dir / "manifest.txt", text);
}

inline std::ostream& log(const RunContext& ctx) {
  static std::ostream null(nullptr);
  return ctx.log ? *ctx.log : null;
}

/// Uniform double in [0,1) from the top 53 bits; stable across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Max |dQ/dw| over `count` random smooth symmetric unit directions w at u.
inline double directional_certificate(const WarpedMetric& g, std::span<const double> u, ExponentParam p,
                                      std::uint64_t seed, int count = 10) {
  const WarpedYamabeProblem prob(g);
  std::mt19937_64 rng(seed);
  const std::size_t N = g.size();
  double worst = 0.0;
  for (int d = 0; d < count; ++d) {
    std::vector<double> w(N, 0.0);
    double coef[4];
    for (double& c : coef) c = 2.0 * unit_uniform(rng) - 1.0;
    for (std::size_t i = 0; i < N; ++i)
      for (int k = 0; k < 4; ++k) w[i] += coef[k] * std::cos(k * std::numbers::pi * g.x[i]);
    const double norm = prob.l2(w);
    for (auto& v : w) v /= norm;
    const double eps = 1e-5;
    std::vector<double> up(u.begin(), u.end()), um(u.begin(), u.end());
    for (std::size_t i = 0; i < N; ++i) {
      up[i] += eps * w[i];
      um[i] -= eps * w[i];
    }
    worst = std::max(worst, std::abs(prob.quotient(up, p.p) - prob.quotient(um, p.p)) / (2.0 * eps));
  }
  return worst;
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline RunOutcome cmd_curvature(const ExperimentConfig& cfg, const RunContext& ctx) {
  detail::write_manifest(ctx, "curvature", &cfg, cfg.seed);
  double r_min, r_max, defect, V;
  if (cfg.warped()) {
    const auto g = cfg.warped_metric();
    const auto k = compute_curvature(g);
    io::write_curvature(ctx.out_dir / "curvature.csv", g, k);
    r_min = *std::min_element(k.R.begin(), k.R.end());
    r_max = *std::max_element(k.R.begin(), k.R.end());
    defect = einstein_defect(g);
    V = volume(g);
  } else {
    const auto g = cfg.homogeneous_metric();
    const auto k = compute_curvature(g);
    io::write_curvature(ctx.out_dir / "curvature.csv", k);
    r_min = r_max = k.R;
    defect = einstein_defect(g);
    V = volume(g);
  }
  const std::string summary = "Rmin=" + io::num(r_min) + " Rmax=" + io::num(r_max) +
                              " einsteinDefect=" + io::num(defect) + " volume=" + io::num(V);
  io::write_atomic(ctx.out_dir / "summary.txt", summary + "\n");
  detail::log(ctx) << summary << "\n";
  return {true, "status=ok command=curvature " + summary};
}

inline RunOutcome cmd_yamabe(const ExperimentConfig& cfg, const RunContext& ctx) {
  detail::write_manifest(ctx, "yamabe", &cfg, cfg.seed);
  const auto opts = cfg.solver_options();
  std::vector<ConformalSolution> sols;
  std::vector<double> x;
  std::optional<WarpedMetric> warped;
  if (cfg.warped()) {
    warped = cfg.warped_metric();
    x = warped->x;
  }
  if (cfg.continuation) {
    const auto schedule = default_schedule(cfg.n, cfg.p0, cfg.stages);
    sols = warped ? continue_to_critical(*warped, cfg.n, schedule, opts)
                  : continue_to_critical(cfg.homogeneous_metric(), cfg.n, schedule, opts);
  } else {
    const auto ps = cfg.exponents();
    sols = detail::parallel_map(ps.size(), ctx.jobs, [&](std::size_t i) {
      return warped ? solve_subcritical(*warped, ps[i], opts) : solve_subcritical(cfg.homogeneous_metric(), ps[i], opts);
    });
  }
  std::string last;
  for (std::size_t i = 0; i < sols.size(); ++i) {
    const auto& s = sols[i];
    const std::string name = cfg.continuation ? "solution_stage" + std::to_string(i) + ".csv"
                                              : "solution_" + detail::p_tag(s.p.p) + ".csv";
    io::write_solution(ctx.out_dir / name, x, s);
    std::string line = "p=" + io::num(s.p.p) + " yTilde=" + io::num(s.y_tilde) +
                       " residualL2=" + io::num(s.residual_l2) + " iterations=" + std::to_string(s.iterations);
    if (warped) line += " certificate=" + io::num(detail::directional_certificate(*warped, s.u, s.p, cfg.seed));
    detail::log(ctx) << line << "\n";
    last = line;
  }
  return {true, "status=ok command=yamabe solutions=" + std::to_string(sols.size()) + " " + last};
}

inline RunOutcome cmd_flow(const ExperimentConfig& cfg, const RunContext& ctx) {
  detail::write_manifest(ctx, "flow", &cfg, cfg.seed);
  const auto plan = cfg.step_plan();
  EvolutionIdentityReport rep;
  if (cfg.warped()) {
    const auto traj = integrate(cfg.warped_metric(), cfg.t_end, plan.dt, plan.save_every);
    io::write_trajectory(ctx.out_dir / "trajectory.csv", traj.diagnostics);
    if (cfg.snapshots)
      for (std::size_t j = 0; j < traj.snapshots.size(); ++j) {
        char name[64];
        std::snprintf(name, sizeof name, "snapshots/metric_%04zu.csv", j);
        io::write_metric(ctx.out_dir / name, traj.snapshots[j]);
      }
    rep = check_evolution_identities(traj);
  } else {
    const auto traj = integrate(cfg.homogeneous_metric(), cfg.t_end, plan.dt, plan.save_every);
    io::write_trajectory(ctx.out_dir / "trajectory.csv", traj.diagnostics);
    io::CsvBuilder csv({"t", "a", "b", "c"});
    for (std::size_t j = 0; j < traj.snapshots.size(); ++j)
      csv.row({traj.times[j], traj.snapshots[j].a, traj.snapshots[j].b, traj.snapshots[j].c});
    csv.write(ctx.out_dir / "metric_trajectory.csv");
    rep = check_evolution_identities(traj);
  }
  const std::string summary = "dt=" + io::num(plan.dt) + " curvatureIdentity=" + io::num(rep.curvature_rel_error) +
                              " densityIdentity=" + io::num(rep.density_rel_error) +
                              " volumeIdentity=" + io::num(rep.volume_rel_error);
  detail::log(ctx) << summary << "\n";
  return {true, "status=ok command=flow " + summary};
}

inline RunOutcome cmd_verify(const ExperimentConfig& cfg, const RunContext& ctx) {
  detail::write_manifest(ctx, "verify", &cfg, cfg.seed);
  const auto plan = cfg.step_plan();
  const auto ps = cfg.exponents();
  VerifyOptions vo;
  vo.scheme = cfg.time_difference();
  vo.solver = cfg.solver_options();
  std::vector<IdentityReport> reps;
  if (cfg.warped()) {
    const auto traj = integrate(cfg.warped_metric(), cfg.t_end, plan.dt, plan.save_every);
    reps = detail::parallel_map(ps.size(), ctx.jobs, [&](std::size_t i) { return verify_along_flow(traj, ps[i], vo); });
  } else {
    const auto traj = integrate(cfg.homogeneous_metric(), cfg.t_end, plan.dt, plan.save_every);
    reps = detail::parallel_map(ps.size(), ctx.jobs, [&](std::size_t i) { return verify_along_flow(traj, ps[i], vo); });
  }
  bool ok = true;
  double worst = 0.0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& r = reps[i];
    io::write_identity_report(ctx.out_dir / ("identity_" + detail::p_tag(ps[i].p) + ".csv"), r);
    const bool pass = r.max_rel_error() < cfg.verify_tolerance;
    ok = ok && pass;
    worst = std::max(worst, r.max_rel_error());
    detail::log(ctx) << "p=" << io::num(ps[i].p) << " maxRelError=" << io::num(r.max_rel_error())
                     << " tolerance=" << io::num(cfg.verify_tolerance) << (pass ? " PASS" : " FAIL")
                     << (r.family_suspect ? " familySuspect" : "") << " branchYTilde=" << io::num(r.branch_y_tilde)
                     << "\n";
  }
  return {ok, std::string("status=") + (ok ? "ok" : "fail") + " command=verify maxRelError=" + io::num(worst) +
                  " tolerance=" + io::num(cfg.verify_tolerance)};
}

inline RunOutcome cmd_spectrum(const ExperimentConfig& cfg, const RunContext& ctx) {
  if (!cfg.warped())
    fail(ErrorCode::Config, "model.backend: spectrum is only available for the warped backend");
  detail::write_manifest(ctx, "spectrum", &cfg, cfg.seed);
  const auto g = cfg.warped_metric();
  auto rep = symmetric_spectrum(g, static_cast<std::size_t>(cfg.eigenvalues));
  std::string koiso;
  try {
    koiso = koiso_check(g, rep, cfg.koiso_delta) ? "holds" : "fails";
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Inapplicable) throw;
    koiso = "inapplicable";
  }
  io::write_spectrum(ctx.out_dir / "spectrum.csv", rep);
  std::string summary = "koiso=" + koiso + " lambda1=" + io::num(rep.eigenvalues[1]);
  if (rep.applicable) summary += " target=" + io::num(rep.target) + " gap=" + io::num(rep.gap);
  summary += " sector=symmetric";
  detail::log(ctx) << summary << "\n";
  return {true, "status=ok command=spectrum " + summary};
}

// ---------------------------------------------------------------------------
// Demo: the four identity scenarios end to end.

struct ScoreRow {
  int criterion;
  std::string name;
  double measured;
  std::string required;
  bool pass;
};

inline std::vector<ScoreRow> run_demo_scenarios(const std::filesystem::path& out) {
  std::vector<ScoreRow> rows;
  const auto crit = ExponentParam::critical(3);
  const HomogeneousMetric squashed{1.0, 1.0, 2.0};

  {  // homogeneous identity, p in {2,3,5}
    const auto traj = integrate(squashed, 0.05, 1e-4, 1);
    double worst = 0.0;
    for (double p : {2.0, 3.0, 5.0}) {
      const auto r = verify_along_flow(traj, ExponentParam::of(3, p), VerifyOptions{TimeDifference::Richardson, {}});
      io::write_identity_report(out / ("demo_homogeneous_" + detail::p_tag(p) + ".csv"), r);
      worst = std::max(worst, r.max_rel_error());
    }
    rows.push_back({1, "homogeneous identity (1,1,2), p=2,3,5", worst, "< 1e-06", worst < 1e-6});
  }
  {  // round sphere at the critical exponent
    const auto traj = integrate(HomogeneousMetric{1.0, 1.0, 1.0}, 0.05, 1e-4, 1);
    const auto r = verify_along_flow(traj, crit, VerifyOptions{TimeDifference::Richardson, {}});
    io::write_identity_report(out / "demo_round_critical.csv", r);
    double fd = 0.0;
    bool rhs_zero = true;
    for (std::size_t j = 0; j < r.t.size(); ++j) {
      fd = std::max(fd, std::abs(r.fd[j]));
      rhs_zero = rhs_zero && r.rhs[j] == 0.0;
    }
    rows.push_back({2, "Einstein case: round S3, critical p (|fd|, rhs == 0)", fd, "< 1e-08 and rhs = 0",
                    fd < 1e-8 && rhs_zero});
  }
  {  // t = 0 formula on the squashed sphere
    const double dT = 1e-4;
    const auto traj = integrate(squashed, 4.0 * dT, dT, 1);
    std::vector<double> Y;
    for (const auto& g : traj.snapshots) Y.push_back(solve_subcritical(g, crit).y_tilde);
    const double fd0 = initial_derivative(Y, dT);
    const double u0 = solve_subcritical(squashed, crit).u.front();
    const double expected = 2.0 * u0 * u0 * einstein_defect(squashed);
    const double rel = std::abs(fd0 - expected) / std::abs(expected);
    io::CsvBuilder csv({"t", "yTilde"});
    for (std::size_t j = 0; j < Y.size(); ++j) csv.row({traj.times[j], Y[j]});
    csv.comment("fd0=" + io::num(fd0) + " expected=" + io::num(expected));
    csv.write(out / "demo_initial_derivative.csv");
    rows.push_back({3, "t=0 derivative vs 2u0^2 int|R0|^2 (squashed, critical)", rel, "< 1e-06 and fd0 > 0",
                    rel < 1e-6 && fd0 > 0.0});
  }
  {  // warped identity with one refinement
    double errs[2];
    const std::size_t sizes[2] = {400, 799};
    const int intervals[2] = {20, 40};
    for (int r = 0; r < 2; ++r) {
      const auto g = WarpedMetric::bumpy(3, sizes[r], 2, 0.1);
      const auto plan = plan_warped_steps(g, 0.01, intervals[r]);
      const auto traj = integrate(g, 0.01, plan.dt, plan.save_every);
      const auto rep = verify_along_flow(traj, ExponentParam::of(3, 3.0));
      io::write_identity_report(out / ("demo_warped_N" + std::to_string(sizes[r]) + ".csv"), rep);
      errs[r] = rep.max_rel_error();
    }
    rows.push_back({4, "warped identity bumpy-2-0.1, p=3, N=400 (then N=799)", errs[0],
                    "< 0.02 and decreasing (" + io::num(errs[1]) + ")", errs[0] < 0.02 && errs[1] < errs[0]});
  }
  return rows;
}

inline RunOutcome cmd_demo(const RunContext& ctx, std::uint64_t seed = 0) {
  detail::write_manifest(ctx, "demo", nullptr, seed);
  const auto rows = run_demo_scenarios(ctx.out_dir);
  std::string board = "criterion  result  measured                 required                      scenario\n";
  bool ok = true;
  for (const auto& r : rows) {
    char line[512];
    std::snprintf(line, sizeof line, "%-9d  %-6s  %-23s  %-28s  %s\n", r.criterion, r.pass ? "PASS" : "FAIL",
                  io::num(r.measured).c_str(), r.required.c_str(), r.name.c_str());
    board += line;
    ok = ok && r.pass;
  }
  io::write_atomic(ctx.out_dir / "scoreboard.txt", board);
  detail::log(ctx) << board;
  int passed = 0;
  for (const auto& r : rows) passed += r.pass ? 1 : 0;
  return {ok, std::string("status=") + (ok ? "ok" : "fail") + " command=demo passed=" + std::to_string(passed) + "/" +
                  std::to_string(rows.size())};
}

}  // namespace yamabe
