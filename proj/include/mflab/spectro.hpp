#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "mflab/error.hpp"
#include "mflab/ffsim.hpp"
#include "mflab/model.hpp"

namespace mflab::spectro {

inline constexpr int kDefaultGridPoints = 201;
inline constexpr double kDefaultFloor = 1e-3;

enum class Source { FFSim, SVSim, Shots };

inline const char* source_name(Source s) {
  switch (s) {
    case Source::FFSim: return "ffsim";
    case Source::SVSim: return "svsim";
    case Source::Shots: return "shots";
  }
  return "?";
}

/// Uniform grid over [-pi, pi], endpoints included.
inline std::vector<double> frequency_grid(int points = kDefaultGridPoints) {
  if (points < 2) throw ConfigError("frequency grid needs at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = -kPi + 2.0 * kPi * i / (points - 1);
  return g;
}

/// (1/D) sum_n e^{i omega n} series[n]
template <class Range>
cplx fourier_component(const Range& series, double omega) {
  const auto depth = static_cast<double>(std::size(series));
  if (depth < 1) throw ConfigError("fourier_component: empty series");
  cplx acc = 0.0;
  int n = 0;
  for (const auto& v : series) acc += std::polar(1.0, omega * n++) * cplx(v);
  return acc / depth;
}

struct FourierSeries {
  Rep rep = Rep::L;
  int n_sites = 0;
  int depth = 0;
  Source source = Source::FFSim;
  std::vector<Vector> series;  // series[n](mu-1) = <gamma^rep_mu(n)>
  std::vector<double> grid;
  CMatrix values;              // values(mu-1, g) = F_mu(grid[g])

  /// F_mu(omega) for every mu at an arbitrary frequency.
  [[nodiscard]] CVector evaluate(double omega) const {
    CVector acc = CVector::Zero(2 * n_sites);
    for (std::size_t n = 0; n < series.size(); ++n) {
      acc += std::polar(1.0, omega * static_cast<double>(n)) * series[n].cast<cplx>();
    }
    return acc / static_cast<double>(depth);
  }
};

inline FourierSeries fourier_series(std::vector<Vector> series, Rep rep, Source source,
                                    std::vector<double> grid = frequency_grid()) {
  if (series.empty()) throw ConfigError("fourier_series: empty series");
  FourierSeries f;
  f.rep = rep;
  f.n_sites = static_cast<int>(series.front().size() / 2);
  f.depth = static_cast<int>(series.size());
  f.source = source;
  f.series = std::move(series);
  f.grid = std::move(grid);
  f.values.resize(2 * f.n_sites, static_cast<Eigen::Index>(f.grid.size()));
  for (std::size_t g = 0; g < f.grid.size(); ++g) f.values.col(static_cast<Eigen::Index>(g)) = f.evaluate(f.grid[g]);
  return f;
}

/// Exact series from the free-fermion engine on the plus state.
inline FourierSeries ffsim_fourier(const ChainSpec& spec, Rep rep, int depth,
                                   std::vector<double> grid = frequency_grid()) {
  const auto sp = ffsim::build_single_particle_unitary(spec);
  return fourier_series(ffsim::heisenberg_series(sp, ffsim::plus_state_moments(spec.n_sites, rep), depth), rep,
                        Source::FFSim, std::move(grid));
}

/// psi_mu = c F_mu / sqrt(c F_anchor), then renormalized; c is the anchor's
/// sign on the plus state so the square root is of a positive number.
inline ffsim::MajoranaMode reconstruct_wavefunction(const FourierSeries& f, ffsim::MajoranaFrequency freq,
                                                    double floor = kDefaultFloor) {
  const double omega = ffsim::label_frequency(freq);
  const CVector values = f.evaluate(omega);
  const int anchor = ffsim::anchor_index(f.rep, f.n_sites) - 1;
  const double c = ffsim::anchor_sign(f.rep);
  const cplx weight = c * values(anchor);
  if (std::abs(weight) < floor) {
    throw NoModeError(std::string("no mode at omega = ") + ffsim::frequency_name(freq) + " (|F| = " +
                      std::to_string(std::abs(weight)) + " below floor)");
  }
  if (weight.real() <= 0.0 || std::abs(weight.imag()) > 1e-6 * std::abs(weight) + 1e-12) {
    throw DataQualityError("anchor Fourier weight is not real-positive");
  }
  const CVector scaled = c * values / std::sqrt(weight.real());
  if (scaled.imag().norm() > 1e-6 * scaled.norm() + 1e-12) {
    throw DataQualityError("reconstructed wavefunction has an imaginary part");
  }
  Vector psi = scaled.real();
  psi.normalize();
  ffsim::MajoranaMode m;
  m.frequency = freq;
  m.side = f.rep;
  m.psi = psi;
  m.edge_weight = psi(anchor);
  m.splitting = std::numeric_limits<double>::quiet_NaN();
  m.localization_length = ffsim::localization_length(psi, f.rep);
  return m;
}

/// |<a, b>| for real unit vectors.
inline double overlap(const Vector& a, const Vector& b) { return std::abs(a.dot(b)) / (a.norm() * b.norm()); }

struct DensityMap {
  int n_sites = 0;
  std::vector<double> grid;
  Matrix g;  // g(x-1, k)
};

/// g(x, omega) = |F^L_{2x-1}(omega)|^2 + |F^R_{2x-1}(omega)|^2
inline DensityMap mode_density_map(const FourierSeries& left, const FourierSeries& right) {
  if (left.grid != right.grid || left.n_sites != right.n_sites) {
    throw ConfigError("mode_density_map: L and R series are on different grids");
  }
  DensityMap d;
  d.n_sites = left.n_sites;
  d.grid = left.grid;
  d.g.resize(d.n_sites, static_cast<Eigen::Index>(d.grid.size()));
  for (int x = 0; x < d.n_sites; ++x) {
    for (Eigen::Index k = 0; k < d.g.cols(); ++k) {
      d.g(x, k) = std::norm(left.values(2 * x, k)) + std::norm(right.values(2 * x, k));
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Phase classification
// ---------------------------------------------------------------------------

enum class Phase { Trivial, MZM, MPM, MZMAndMPM };

inline const char* phase_name(Phase p) {
  switch (p) {
    case Phase::Trivial: return "TRIVIAL";
    case Phase::MZM: return "MZM";
    case Phase::MPM: return "MPM";
    case Phase::MZMAndMPM: return "MZM_AND_MPM";
  }
  return "?";
}

struct EdgeEvidence {
  ffsim::MajoranaFrequency frequency;
  double splitting = 0.0;
  double localization_length = 0.0;
  bool trusted = false;  // n_probe >= 4 x localization length
};

struct PhaseLabel {
  Phase phase = Phase::Trivial;
  int n_probe = 0;
  std::vector<EdgeEvidence> evidence;
};

/// Uniform angles of `spec` evaluated on a chain of n_probe sites.
inline PhaseLabel classify_phase(const ChainSpec& spec, int n_probe = 100) {
  spec.validate();
  if (!spec.is_free()) throw NotFreeFermionError("not free-fermion: classify_phase requires zz_angle = 0");
  if (n_probe < 4) throw ConfigError("classify_phase: n_probe must be >= 4");
  ChainSpec probe;
  if (spec.n_sites == n_probe) {
    probe = spec;
  } else {
    const auto& z = spec.z_angle;
    const auto& xx = spec.xx_angle;
    const bool uniform = std::all_of(z.begin(), z.end(), [&](double v) { return v == z.front(); }) &&
                         std::all_of(xx.begin(), xx.end(), [&](double v) { return v == xx.front(); });
    if (!uniform) throw ConfigError("classify_phase: per-site specs must already have n_probe sites");
    probe = ChainSpec::uniform(n_probe, z.front(), xx.front());
  }
  const auto modes = ffsim::eigenmodes(ffsim::build_single_particle_unitary(probe));
  const double limit = 0.5 * n_probe;

  PhaseLabel label;
  label.n_probe = n_probe;
  bool zero = false;
  bool pi = false;
  for (ffsim::MajoranaFrequency f : {ffsim::MajoranaFrequency::Zero, ffsim::MajoranaFrequency::Pi}) {
    const auto* l = modes.find(f, Rep::L);
    const auto* r = modes.find(f, Rep::R);
    if (l == nullptr || r == nullptr) continue;
    const double loc = std::max(l->localization_length, r->localization_length);
    if (!(loc < limit)) continue;
    label.evidence.push_back({f, l->splitting, loc, n_probe >= 4.0 * loc});
    (f == ffsim::MajoranaFrequency::Zero ? zero : pi) = true;
  }
  label.phase = zero && pi ? Phase::MZMAndMPM : zero ? Phase::MZM : pi ? Phase::MPM : Phase::Trivial;
  return label;
}

// ---------------------------------------------------------------------------
// Finite depth and decay
// ---------------------------------------------------------------------------

/// f_D(omega, Gamma) = (1/D) (1 - e^{(i omega - Gamma) D}) / (1 - e^{i omega - Gamma})
inline cplx broadening_factor(double omega, double gamma, int depth) {
  if (depth < 1) throw ConfigError("broadening_factor: depth must be >= 1");
  if (gamma < 0.0) throw ConfigError("broadening_factor: gamma must be >= 0");
  const cplx z = std::exp(cplx(-gamma, omega));
  if (std::abs(1.0 - z) < 1e-8) {
    cplx acc = 0.0;
    cplx zn = 1.0;
    for (int n = 0; n < depth; ++n, zn *= z) acc += zn;
    return acc / static_cast<double>(depth);
  }
  return (1.0 - std::pow(z, depth)) / (1.0 - z) / static_cast<double>(depth);
}

/// series[n] * e^{Gamma n}
template <class T>
std::vector<T> compensate_decay(const std::vector<T>& series, double gamma) {
  if (gamma < 0.0) throw ConfigError("compensate_decay: gamma must be >= 0");
  if (gamma * static_cast<double>(series.size()) > 50.0) {
    throw ConfigError("compensate_decay: gamma * depth > 50 would amplify noise beyond e^50");
  }
  std::vector<T> out(series.size());
  for (std::size_t n = 0; n < series.size(); ++n) out[n] = series[n] * std::exp(gamma * static_cast<double>(n));
  return out;
}

}  // namespace mflab::spectro
