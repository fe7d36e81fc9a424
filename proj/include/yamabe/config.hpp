#pragma once

// Experiment configuration: flat `key = value` pairs grouped in [sections].
//
//   [model]      backend = homogeneous | warped, n
//   [metric]     a, b, c | profile = round | bumpy-K-EPS | csv:PATH, N, radius
//   [yamabe]     p = 3 | 2,3,5 | critical, continuation = false, p0, stages
//   [flow]       t_end, dt (0 = CFL default), intervals, snapshots
//   [verify]     scheme = auto | centered | richardson, tolerance
//   [spectrum]   k, delta
//   [tolerance]  residual, normalization
//   [output]     dir
//   [run]        seed
//
// Unknown sections and keys are rejected by name.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "yamabe/error.hpp"
#include "yamabe/flow.hpp"
#include "yamabe/io.hpp"
#include "yamabe/params.hpp"
#include "yamabe/verifier.hpp"
#include "yamabe/warped.hpp"

namespace yamabe {

inline constexpr double kDefaultHomogeneousDt = 1e-4;

struct ExperimentConfig {
  Backend backend = Backend::Homogeneous3;
  int n = 3;

  double a = 1.0, b = 1.0, c = 2.0;
  std::string profile = "round";
  std::size_t N = 400;
  double radius = 1.0;

  std::vector<double> p_values{3.0};
  bool continuation = false;
  double p0 = 2.0;
  int stages = 6;

  double t_end = 0.01;
  double dt = 0.0;
  int intervals = 20;
  bool snapshots = false;

  std::string scheme = "auto";
  double verify_tolerance = 0.02;

  int eigenvalues = 6;
  double koiso_delta = kKoisoDelta;

  double residual_tol = 1e-8;
  double normalization_tol = 1e-10;

  std::string out_dir = "out";
  std::uint64_t seed = 20240601;

  bool warped() const { return backend == Backend::WarpedSphere; }

  /// p_values mapped to exponent parameters (critical snapped exactly).
  std::vector<ExponentParam> exponents() const {
    std::vector<ExponentParam> out;
    for (double p : p_values) out.push_back(ExponentParam::of(n, p));
    return out;
  }

  WarpedMetric warped_metric() const;
  HomogeneousMetric homogeneous_metric() const { return {a, b, c}; }

  /// Time step actually used: the configured dt, else kDefaultHomogeneousDt
  /// (homogeneous) or the largest CFL-admissible step dividing each sample interval.
  StepPlan step_plan() const;

  TimeDifference time_difference() const {
    if (scheme == "centered") return TimeDifference::Centered;
    if (scheme == "richardson") return TimeDifference::Richardson;
    return warped() ? TimeDifference::Centered : TimeDifference::Richardson;
  }

  SolverOptions solver_options() const {
    SolverOptions o;
    o.residual_tol = residual_tol;
    o.normalization_tol = normalization_tol;
    return o;
  }

  /// Resolved key = value listing, used in run manifests.
  std::string echo() const;
};

namespace detail {

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    fail(ErrorCode::Config, key + ": not a number: '" + v + "'");
  }
  if (pos != v.size()) fail(ErrorCode::Config, key + ": trailing characters in '" + v + "'");
  return out;
}

inline long long parse_int(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    fail(ErrorCode::Config, key + ": not an integer: '" + v + "'");
  }
  if (pos != v.size()) fail(ErrorCode::Config, key + ": trailing characters in '" + v + "'");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  fail(ErrorCode::Config, key + ": expected true or false, got '" + v + "'");
}

inline std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

struct BumpySpec {
  int k;
  double eps;
};

inline BumpySpec parse_bumpy(const std::string& profile) {
  // bumpy-K-EPS
  const auto rest = profile.substr(6);
  const auto dash = rest.find('-');
  if (dash == std::string::npos) fail(ErrorCode::Config, "metric.profile: expected bumpy-K-EPS, got '" + profile + "'");
  return {static_cast<int>(parse_int("metric.profile", rest.substr(0, dash))),
          parse_double("metric.profile", rest.substr(dash + 1))};
}

}  // namespace detail

inline WarpedMetric ExperimentConfig::warped_metric() const {
  if (profile == "round") return WarpedMetric::round(n, N, radius);
  if (profile.rfind("bumpy-", 0) == 0) {
    const auto b = detail::parse_bumpy(profile);
    auto g = WarpedMetric::bumpy(n, N, b.k, b.eps);
    return radius == 1.0 ? g : g.scaled(radius * radius);
  }
  if (profile.rfind("csv:", 0) == 0) return io::load_metric(profile.substr(4), n);
  fail(ErrorCode::Config, "metric.profile: unknown profile '" + profile + "'");
}

inline StepPlan ExperimentConfig::step_plan() const {
  const double step = dt > 0.0 ? dt : (warped() ? 0.0 : kDefaultHomogeneousDt);
  if (step > 0.0) {
    const double per = t_end / intervals / step;
    const auto every = static_cast<int>(std::llround(per));
    if (every < 1 || std::abs(per - every) > 1e-9 * per)
      fail(ErrorCode::Config, "flow.dt must divide t_end/intervals evenly");
    return {step, every};
  }
  return plan_warped_steps(warped_metric(), t_end, intervals);
}

inline std::string ExperimentConfig::echo() const {
  std::ostringstream os;
  os << "[model]\nbackend = " << (warped() ? "warped" : "homogeneous") << "\nn = " << n << "\n";
  os << "[metric]\n";
  if (warped())
    os << "profile = " << profile << "\nN = " << N << "\nradius = " << io::num(radius) << "\n";
  else
    os << "a = " << io::num(a) << "\nb = " << io::num(b) << "\nc = " << io::num(c) << "\n";
  os << "[yamabe]\np = ";
  for (std::size_t i = 0; i < p_values.size(); ++i) os << (i ? "," : "") << io::num(p_values[i]);
  os << "\ncontinuation = " << (continuation ? "true" : "false") << "\np0 = " << io::num(p0)
     << "\nstages = " << stages << "\n";
  os << "[flow]\nt_end = " << io::num(t_end) << "\ndt = " << io::num(dt) << "\nintervals = " << intervals
     << "\nsnapshots = " << (snapshots ? "true" : "false") << "\n";
  os << "[verify]\nscheme = " << scheme << "\ntolerance = " << io::num(verify_tolerance) << "\n";
  os << "[spectrum]\nk = " << eigenvalues << "\ndelta = " << io::num(koiso_delta) << "\n";
  os << "[tolerance]\nresidual = " << io::num(residual_tol) << "\nnormalization = " << io::num(normalization_tol)
     << "\n";
  os << "[output]\ndir = " << out_dir << "\n[run]\nseed = " << seed << "\n";
  return os.str();
}

/// Validates cross-field constraints; throws Config naming the offending key.
inline void validate(const ExperimentConfig& c) {
  auto positive = [](const char* key, double v) {
    if (!(v > 0.0)) fail(ErrorCode::Config, std::string(key) + " must be positive");
  };
  if (c.n < 3) fail(ErrorCode::Config, "model.n must be >= 3");
  if (!c.warped() && c.n != 3) fail(ErrorCode::Config, "model.n must be 3 for the homogeneous backend");
  if (!c.warped()) {
    positive("metric.a", c.a);
    positive("metric.b", c.b);
    positive("metric.c", c.c);
  }
  positive("metric.radius", c.radius);
  if (c.N < kMinGridPoints) fail(ErrorCode::Config, "metric.N must be >= " + std::to_string(kMinGridPoints));
  if (c.p_values.empty()) fail(ErrorCode::Config, "yamabe.p must list at least one exponent");
  for (double p : c.p_values) {
    try {
      ExponentParam::of(c.n, p);
    } catch (const Error& e) {
      fail(ErrorCode::Config, "yamabe.p: " + e.message());
    }
  }
  if (c.continuation) {
    if (c.stages < 2) fail(ErrorCode::Config, "yamabe.stages must be >= 2");
    if (!(c.p0 > 1.0 && c.p0 < critical_exponent(c.n))) fail(ErrorCode::Config, "yamabe.p0 must be subcritical");
  }
  positive("flow.t_end", c.t_end);
  if (c.dt < 0.0) fail(ErrorCode::Config, "flow.dt must be >= 0 (0 selects the CFL step)");
  if (c.intervals < 2) fail(ErrorCode::Config, "flow.intervals must be >= 2");
  if (c.scheme != "auto" && c.scheme != "centered" && c.scheme != "richardson")
    fail(ErrorCode::Config, "verify.scheme must be auto, centered or richardson");
  positive("verify.tolerance", c.verify_tolerance);
  if (c.eigenvalues < 2) fail(ErrorCode::Config, "spectrum.k must be >= 2");
  positive("spectrum.delta", c.koiso_delta);
  positive("tolerance.residual", c.residual_tol);
  positive("tolerance.normalization", c.normalization_tol);
  if (c.warped()) {
    WarpedMetric g;
    try {
      g = c.warped_metric();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Config) throw;
      fail(ErrorCode::Config, "metric.profile: " + e.message());
    }
    const double bound = cfl_bound(g);
    if (c.dt > bound)
      fail(ErrorCode::Config, "flow.dt=" + io::num(c.dt) + " exceeds the CFL bound " + io::num(bound));
  }
  c.step_plan();
}

/// Parses config text. `origin` labels error messages.
inline ExperimentConfig parse_config(const std::string& text, const std::string& origin = "config") {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::Config, origin + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  static const std::map<std::string, std::set<std::string>> allowed = {
      {"model", {"backend", "n"}},
      {"metric", {"a", "b", "c", "profile", "N", "radius"}},
      {"yamabe", {"p", "continuation", "p0", "stages"}},
      {"flow", {"t_end", "dt", "intervals", "snapshots"}},
      {"verify", {"scheme", "tolerance"}},
      {"spectrum", {"k", "delta"}},
      {"tolerance", {"residual", "normalization"}},
      {"output", {"dir"}},
      {"run", {"seed"}},
  };

  ExperimentConfig c;
  std::string p_spec;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty())
      fail(ErrorCode::Config, "unknown key '" + section + "' outside any section");
    const auto sec = allowed.find(section);
    if (sec == allowed.end()) fail(ErrorCode::Config, "unknown section [" + section + "]");
    for (const auto& [key, node] : body) {
      const std::string name = section + "." + key;
      if (!sec->second.count(key)) fail(ErrorCode::Config, "unknown key '" + name + "'");
      const std::string v = node.data();
      if (name == "model.backend") {
        if (v == "homogeneous") c.backend = Backend::Homogeneous3;
        else if (v == "warped") c.backend = Backend::WarpedSphere;
        else fail(ErrorCode::Config, name + ": expected homogeneous or warped, got '" + v + "'");
      } else if (name == "model.n") {
        c.n = static_cast<int>(detail::parse_int(name, v));
      } else if (name == "metric.a") {
        c.a = detail::parse_double(name, v);
      } else if (name == "metric.b") {
        c.b = detail::parse_double(name, v);
      } else if (name == "metric.c") {
        c.c = detail::parse_double(name, v);
      } else if (name == "metric.profile") {
        c.profile = v;
      } else if (name == "metric.N") {
        const auto N = detail::parse_int(name, v);
        if (N < 0) fail(ErrorCode::Config, name + " must be positive");
        c.N = static_cast<std::size_t>(N);
      } else if (name == "metric.radius") {
        c.radius = detail::parse_double(name, v);
      } else if (name == "yamabe.p") {
        p_spec = v;
      } else if (name == "yamabe.continuation") {
        c.continuation = detail::parse_bool(name, v);
      } else if (name == "yamabe.p0") {
        c.p0 = detail::parse_double(name, v);
      } else if (name == "yamabe.stages") {
        c.stages = static_cast<int>(detail::parse_int(name, v));
      } else if (name == "flow.t_end") {
        c.t_end = detail::parse_double(name, v);
      } else if (name == "flow.dt") {
        c.dt = detail::parse_double(name, v);
      } else if (name == "flow.intervals") {
        c.intervals = static_cast<int>(detail::parse_int(name, v));
      } else if (name == "flow.snapshots") {
        c.snapshots = detail::parse_bool(name, v);
      } else if (name == "verify.scheme") {
        c.scheme = v;
      } else if (name == "verify.tolerance") {
        c.verify_tolerance = detail::parse_double(name, v);
      } else if (name == "spectrum.k") {
        c.eigenvalues = static_cast<int>(detail::parse_int(name, v));
      } else if (name == "spectrum.delta") {
        c.koiso_delta = detail::parse_double(name, v);
      } else if (name == "tolerance.residual") {
        c.residual_tol = detail::parse_double(name, v);
      } else if (name == "tolerance.normalization") {
        c.normalization_tol = detail::parse_double(name, v);
      } else if (name == "output.dir") {
        c.out_dir = v;
      } else if (name == "run.seed") {
        const auto s = detail::parse_int(name, v);
        if (s < 0) fail(ErrorCode::Config, name + " must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
      }
    }
  }
  // "critical" depends on n, which may appear after p in the file.
  if (!p_spec.empty()) {
    c.p_values.clear();
    for (const auto& item : detail::split_list(p_spec))
      c.p_values.push_back(item == "critical" ? critical_exponent(c.n) : detail::parse_double("yamabe.p", item));
  }
  validate(c);
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Config, "cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace yamabe
