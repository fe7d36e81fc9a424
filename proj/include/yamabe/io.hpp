#pragma once

// CSV artifacts. Every number is printed with 17 significant digits so files
// round-trip bit-exactly; every file is written to a temporary sibling first and
// renamed into place.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "yamabe/error.hpp"
#include "yamabe/flow.hpp"
#include "yamabe/solver.hpp"
#include "yamabe/spectral.hpp"
#include "yamabe/verifier.hpp"
#include "yamabe/warped.hpp"

namespace yamabe::io {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCode::Io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::Io, "write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::Io, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

/// Builds a CSV with a header row; `comment` lines ("# ...") may follow the data.
class CsvBuilder {
 public:
  explicit CsvBuilder(std::initializer_list<std::string> header) {
    bool first = true;
    for (const auto& h : header) {
      if (!first) os_ << ',';
      os_ << h;
      first = false;
    }
    os_ << '\n';
  }

  void row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
      if (!first) os_ << ',';
      os_ << num(v);
      first = false;
    }
    os_ << '\n';
  }

  void comment(const std::string& line) { os_ << "# " << line << '\n'; }

  std::string str() const { return os_.str(); }
  void write(const std::filesystem::path& path) const { write_atomic(path, str()); }

 private:
  std::ostringstream os_;
};

inline void write_metric(const std::filesystem::path& path, const WarpedMetric& g) {
  CsvBuilder csv({"x", "psi", "phi"});
  for (std::size_t i = 0; i < g.size(); ++i) csv.row({g.x[i], g.psi[i], g.phi[i]});
  csv.write(path);
}

/// Reads an (x, psi, phi) CSV. The x column must be the uniform grid on [0,1].
/// With close_poles, psi at the poles is recomputed from phi.
inline WarpedMetric load_metric(const std::filesystem::path& path, int n, bool close_poles = true) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open profile " + path.string());
  std::string line;
  std::vector<double> x, psi, phi;
  bool header = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      if (line.rfind("x,psi,phi", 0) != 0)
        fail(ErrorCode::Config, path.string() + ": header must be x,psi,phi");
      continue;
    }
    std::istringstream ls(line);
    double v[3];
    char comma = 0;
    if (!(ls >> v[0] >> comma >> v[1] >> comma >> v[2]))
      fail(ErrorCode::Config, path.string() + ":" + std::to_string(lineno) + ": expected three numbers");
    x.push_back(v[0]);
    psi.push_back(v[1]);
    phi.push_back(v[2]);
  }
  if (x.size() < kMinGridPoints) fail(ErrorCode::Config, path.string() + ": too few grid points");
  const auto grid = WarpedMetric::uniform_grid(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(x[i] - grid[i]) > 1e-12) fail(ErrorCode::GridMismatch, path.string() + ": x is not the uniform grid");
  return WarpedMetric::from_profile(n, std::move(psi), std::move(phi), close_poles);
}

inline void write_solution(const std::filesystem::path& path, std::span<const double> x, const ConformalSolution& s) {
  CsvBuilder csv({"x", "u"});
  for (std::size_t i = 0; i < s.u.size(); ++i) csv.row({x.empty() ? 0.0 : x[i], s.u[i]});
  csv.comment("p=" + num(s.p.p) + " yTilde=" + num(s.y_tilde) + " residualL2=" + num(s.residual_l2) +
              " iterations=" + std::to_string(s.iterations));
  csv.write(path);
}

inline void write_trajectory(const std::filesystem::path& path, const std::vector<FlowDiagnostics>& d) {
  CsvBuilder csv({"t", "V", "Rmin", "Rmax", "phiMin", "tracelessRicciL2"});
  for (const auto& r : d) csv.row({r.t, r.volume, r.R_min, r.R_max, r.phi_min, r.traceless_ricci_l2});
  csv.write(path);
}

inline void write_identity_report(const std::filesystem::path& path, const IdentityReport& r) {
  CsvBuilder csv({"t", "fd", "rhs", "termA", "termB", "termC", "termD", "relError", "warmStartJump"});
  for (std::size_t j = 0; j < r.t.size(); ++j)
    csv.row({r.t[j], r.fd[j], r.rhs[j], r.term_a[j], r.term_b[j], r.term_c[j], r.term_d[j], r.rel_error[j],
             r.warm_start_jump[j]});
  csv.write(path);
}

inline void write_spectrum(const std::filesystem::path& path, const SpectralReport& r) {
  CsvBuilder csv({"index", "eigenvalue"});
  for (std::size_t k = 0; k < r.eigenvalues.size(); ++k) csv.row({static_cast<double>(k), r.eigenvalues[k]});
  if (r.applicable)
    csv.comment("target=" + num(r.target) + " matched=" + (r.matched ? "true" : "false") + " gap=" + num(r.gap));
  else
    csv.comment("target=inapplicable");
  csv.write(path);
}

inline void write_curvature(const std::filesystem::path& path, const WarpedMetric& g, const WarpedCurvature& k) {
  CsvBuilder csv({"x", "s", "R", "ricRadial", "ricSpherical", "tracelessRicciSq", "laplacianR", "volumeWeight"});
  const auto s = g.arclength_coordinate();
  for (std::size_t i = 0; i < g.size(); ++i)
    csv.row({g.x[i], s[i], k.R[i], k.ric_radial[i], k.ric_spherical[i], k.traceless_ricci_sq[i], k.laplacian_R[i],
             k.volume_weight[i]});
  csv.write(path);
}

inline void write_curvature(const std::filesystem::path& path, const HomogeneousCurvature& k) {
  CsvBuilder csv({"R", "ric1", "ric2", "ric3", "tracelessRicciSq", "laplacianR", "volume"});
  csv.row({k.R, k.ricci[0], k.ricci[1], k.ricci[2], k.traceless_ricci_sq, k.laplacian_R, k.volume_weight});
  csv.write(path);
}

}  // namespace yamabe::io
