#pragma once

// FAS braiding. The channel is the randomized-time average
//   E_alpha(O) = lim (1/D) sum_n U_n^dag O U_n,   U_n = U_F^n V(alpha) U_F^n,
// V(alpha) = exp(-alpha gamma_1 gamma_2N). On Majorana coefficients E_alpha is
// the matrix M^T with M = <u^n R(alpha) u^n>_n.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mflab/engine.hpp"
#include "mflab/error.hpp"
#include "mflab/ffsim.hpp"
#include "mflab/model.hpp"
#include "mflab/svsim.hpp"

namespace mflab::braid {

/// Depth value selecting the exact D -> infinity channel.
inline constexpr int kExact = 0;

/// arcsin(1 / (sqrt(2) xi))
inline double alpha0_from_xi(double xi) {
  if (!(xi * xi >= 0.5 - 1e-12)) throw ConfigError("edge weight too small for FAS (xi^2 < 1/2)");
  return std::asin(std::min(1.0, 1.0 / (std::sqrt(2.0) * std::abs(xi))));
}

/// sqrt(2 xi^2 - 1)
inline double attenuation(double xi) { return std::sqrt(std::max(0.0, 2.0 * xi * xi - 1.0)); }

struct BraidOutcome {
  double alpha = 0.0;
  double alpha0 = 0.0;
  double xi = 0.0;
  std::string xi_source = "eigenmodes";
  double p = 0.0;
  int depth = kExact;
  Engine engine = Engine::FFSim;
  Vector psi_L;  // reference modes
  Vector psi_R;
  Vector psi_tilde_L;
  Vector psi_tilde_R;
  double sign = 1.0;  // hypothesis psi~L = sign psi_R, psi~R = -sign psi_L
  double residual_L = 0.0;
  double residual_R = 0.0;
  double correction_bound = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

inline ffsim::ModeSet free_modes(const ChainSpec& spec) {
  ChainSpec free = spec;
  std::fill(free.zz_angle.begin(), free.zz_angle.end(), 0.0);
  return ffsim::eigenmodes(ffsim::build_single_particle_unitary(free));
}

inline std::pair<const ffsim::MajoranaMode*, const ffsim::MajoranaMode*> zero_pair(const ffsim::ModeSet& modes) {
  const auto* l = modes.find(ffsim::MajoranaFrequency::Zero, Rep::L);
  const auto* r = modes.find(ffsim::MajoranaFrequency::Zero, Rep::R);
  if (l == nullptr || r == nullptr) throw NoModeError("no MZM pair detected");
  return {l, r};
}

}  // namespace detail

/// M = lim (1/D) sum_n u^n R u^n: keeps cluster pairs with omega_c + omega_c' = 0 mod 2pi.
inline Matrix exact_channel_matrix(const ffsim::ModeSet& modes, double alpha) {
  const auto clusters = ffsim::frequency_clusters(modes, modes.tol);
  const CMatrix r = ffsim::braid_rotation(alpha, modes.n_sites).cast<cplx>();
  std::vector<CMatrix> proj;
  proj.reserve(clusters.size());
  for (const auto& c : clusters) proj.push_back(c.projector());
  const auto dim = static_cast<Eigen::Index>(2 * modes.n_sites);
  CMatrix m = CMatrix::Zero(dim, dim);
  for (std::size_t a = 0; a < clusters.size(); ++a) {
    for (std::size_t b = 0; b < clusters.size(); ++b) {
      if (ffsim::circular_distance(clusters[a].omega + clusters[b].omega, 0.0) <= modes.tol) {
        m += proj[a] * r * proj[b];
      }
    }
  }
  return m.real();
}

/// (1/D) sum_{n<D} u^n R u^n
inline Matrix finite_channel_matrix(const ffsim::SingleParticleUnitary& sp, double alpha, int depth) {
  if (depth < 1) throw ConfigError("channel depth must be >= 1");
  const Matrix r = ffsim::braid_rotation(alpha, sp.n_sites);
  Matrix acc = Matrix::Zero(sp.dim(), sp.dim());
  Matrix power = Matrix::Identity(sp.dim(), sp.dim());
  for (int n = 0; n < depth; ++n) {
    acc += power * r * power;
    power = sp.u * power;
  }
  return acc / static_cast<double>(depth);
}

/// xi^{-2} max_mu sqrt(sum_nu |kappa_{mu nu}|^2) with
/// kappa_{mu nu} = sum over non-zero-frequency modes of psi*_mu psi*_nu (psi_1^2 + psi_2N^2).
/// Summed per frequency cluster as P_{1 mu} P_{1 nu} + P_{2N mu} P_{2N nu}, which
/// is the same sum for simple modes and does not depend on the basis chosen
/// inside a degenerate cluster.
inline double correction_bound(const ffsim::ModeSet& modes, double xi) {
  const auto dim = static_cast<Eigen::Index>(2 * modes.n_sites);
  CMatrix kappa = CMatrix::Zero(dim, dim);
  for (const auto& c : ffsim::frequency_clusters(modes, modes.tol)) {
    if (ffsim::circular_distance(c.omega, 0.0) <= modes.tol) continue;
    const CMatrix p = c.projector();
    const CVector first = p.row(0).transpose();
    const CVector last = p.row(dim - 1).transpose();
    kappa += first * first.transpose() + last * last.transpose();
  }
  return kappa.rowwise().norm().maxCoeff() / (xi * xi);
}

struct ExchangeReport {
  double alpha0 = 0.0;
  double xi = 0.0;
  double p_theory = 0.0;
  double p_measured = 0.0;        // <psi_L, E(Gamma_R)>
  double p_measured_L = 0.0;      // -<psi_R, E(Gamma_L)>
  double residual_R = 0.0;        // ||E(Gamma_R) - p Gamma_L||
  double residual_L = 0.0;        // ||E(Gamma_L) + p Gamma_R||
  double double_residual = 0.0;   // ||E(E(Gamma_L)) + p^2 Gamma_L||
  double gamma_r_coefficient = 0.0;  // 1 - 2 (psi^R_2N)^2 sin^2 alpha0
  std::vector<double> deviations;    // per mu: ||E(gamma_mu) - p(psi^R_mu Gamma_L - psi^L_mu Gamma_R)||
  double max_deviation = 0.0;
  double bound = 0.0;
  std::vector<std::string> warnings;
};

/// Applies the exact channel to the mode vectors themselves. alpha0 <= 0 uses
/// the value from the L-mode edge weight.
inline ExchangeReport verify_exchange(const ChainSpec& spec, double alpha0 = -1.0) {
  spec.validate();
  if (!spec.is_free()) throw NotFreeFermionError("not free-fermion: verify_exchange runs on the exact engine");
  const auto modes = ffsim::eigenmodes(ffsim::build_single_particle_unitary(spec));
  auto [ml, mr] = detail::zero_pair(modes);
  ExchangeReport rep;
  if (!spec.is_reflection_symmetric()) rep.warnings.emplace_back("chain is not reflection symmetric");
  rep.xi = ml->edge_weight;
  rep.alpha0 = alpha0 > 0.0 ? alpha0 : alpha0_from_xi(rep.xi);
  rep.p_theory = attenuation(rep.xi);
  const Matrix e = exact_channel_matrix(modes, rep.alpha0).transpose();
  const Vector& l = ml->psi;
  const Vector& r = mr->psi;
  const Vector er = e * r;
  const Vector el = e * l;
  rep.p_measured = l.dot(er);
  rep.p_measured_L = -r.dot(el);
  rep.residual_R = (er - rep.p_theory * l).norm();
  rep.residual_L = (el + rep.p_theory * r).norm();
  rep.double_residual = (e * el + rep.p_theory * rep.p_theory * l).norm();
  const double s = std::sin(rep.alpha0);
  rep.gamma_r_coefficient = 1.0 - 2.0 * r(r.size() - 1) * r(r.size() - 1) * s * s;
  for (Eigen::Index mu = 0; mu < l.size(); ++mu) {
    const Vector target = rep.p_theory * (r(mu) * l - l(mu) * r);
    const double d = (e.col(mu) - target).norm();
    rep.deviations.push_back(d);
    rep.max_deviation = std::max(rep.max_deviation, d);
  }
  rep.bound = correction_bound(modes, rep.xi);
  return rep;
}

struct BraidOptions {
  int depth = kExact;
  Engine engine = Engine::FFSim;
  long shots = 0;  // 0: exact expectations (svsim only otherwise)
  std::uint64_t seed = 0;
};

namespace detail {

// <gamma^rep_mu> averaged over chi_n = U^n V U^n psi0, n < D.
inline Vector svsim_braided_moments(const ChainSpec& spec, double alpha, Rep rep, const BraidOptions& opt) {
  const int n = spec.n_sites;
  std::vector<PauliString> obs;
  for (int mu = 1; mu <= 2 * n; ++mu) obs.push_back(majorana_to_pauli({mu, rep}, n));
  Vector acc = Vector::Zero(2 * n);
  svsim::StateVector forward = svsim::plus_product(n);
  for (int step = 0; step < opt.depth; ++step) {
    svsim::StateVector chi = forward;
    svsim::apply_braid_unitary(chi, alpha);
    for (int k = 0; k < step; ++k) svsim::apply_floquet_cycle(chi, spec);
    for (int mu = 0; mu < 2 * n; ++mu) {
      const auto& p = obs[static_cast<std::size_t>(mu)];
      if (opt.shots > 0) {
        std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                          static_cast<std::uint32_t>(step), static_cast<std::uint32_t>(mu),
                          static_cast<std::uint32_t>(rep == Rep::L ? 0 : 1)};
        std::mt19937_64 rng(seq);
        acc(mu) += svsim::sample_shots(chi, p, opt.shots, rng());
      } else {
        acc(mu) += svsim::hermitian_expectation(chi, p);
      }
    }
    svsim::apply_floquet_cycle(forward, spec);
  }
  return acc / static_cast<double>(opt.depth);
}

}  // namespace detail

/// Braided wavefunctions psi~^s = normalize(c_s <gamma^s(alpha)>), c_s the anchor sign.
inline BraidOutcome fas_braided_wavefunction(const ChainSpec& spec, double alpha, const BraidOptions& opt = {}) {
  spec.validate();
  if (!(alpha >= 0.0 && alpha <= kPi)) throw ConfigError("alpha must lie in [0, pi]");
  if (opt.engine == Engine::FFSim && !spec.is_free()) {
    throw NotFreeFermionError("not free-fermion: use the svsim engine for interacting specs");
  }
  if (opt.engine == Engine::SVSim && opt.depth == kExact) {
    throw ConfigError("exact depth is only available on the ffsim engine");
  }
  if (opt.shots > 0 && opt.engine != Engine::SVSim) throw ConfigError("shots require the svsim engine");
  if (opt.depth < 0) throw ConfigError("depth must be >= 0");

  const auto modes = detail::free_modes(spec);
  auto [ml, mr] = detail::zero_pair(modes);
  BraidOutcome out;
  out.alpha = alpha;
  out.depth = opt.depth;
  out.engine = opt.engine;
  out.xi = ml->edge_weight;
  out.alpha0 = alpha0_from_xi(out.xi);
  out.p = attenuation(out.xi);
  out.psi_L = ml->psi;
  out.psi_R = mr->psi;
  out.correction_bound = correction_bound(modes, out.xi);
  if (!spec.is_reflection_symmetric()) {
    out.warnings.emplace_back("chain is not reflection symmetric; psi^L_1 and psi^R_2N may differ");
  }

  const int n = spec.n_sites;
  const int dim = 2 * n;
  if (opt.engine == Engine::FFSim) {
    const Matrix m = opt.depth == kExact
                         ? exact_channel_matrix(modes, alpha)
                         : finite_channel_matrix(ffsim::build_single_particle_unitary(spec), alpha, opt.depth);
    out.psi_tilde_L = m.col(0).normalized();
    out.psi_tilde_R = m.col(dim - 1).normalized();
  } else {
    out.psi_tilde_L = (ffsim::anchor_sign(Rep::L) * detail::svsim_braided_moments(spec, alpha, Rep::L, opt)).normalized();
    out.psi_tilde_R = (ffsim::anchor_sign(Rep::R) * detail::svsim_braided_moments(spec, alpha, Rep::R, opt)).normalized();
  }

  double best = std::numeric_limits<double>::infinity();
  for (double s : {1.0, -1.0}) {
    const double rl = (out.psi_tilde_L - s * out.psi_R).norm();
    const double rr = (out.psi_tilde_R + s * out.psi_L).norm();
    if (rl + rr < best) {
      best = rl + rr;
      out.sign = s;
      out.residual_L = rl;
      out.residual_R = rr;
    }
  }
  return out;
}

/// sum_x (psi~L_{2x-1}^2 + psi~L_{2x}^2) (N - x)^2
inline double braid_cost(const Vector& psi_tilde_L) {
  const auto n = psi_tilde_L.size() / 2;
  double c = 0;
  for (Eigen::Index x = 1; x <= n; ++x) {
    const double w = psi_tilde_L(2 * x - 2) * psi_tilde_L(2 * x - 2) + psi_tilde_L(2 * x - 1) * psi_tilde_L(2 * x - 1);
    c += w * static_cast<double>((n - x) * (n - x));
  }
  return c;
}

/// 9 points over [0.15 pi, 0.40 pi].
inline std::vector<double> default_alpha_grid() {
  std::vector<double> g;
  for (int i = 0; i < 9; ++i) g.push_back(kPi * (0.15 + 0.25 * i / 8.0));
  return g;
}

struct AlphaFit {
  double alpha_star = 0.0;
  std::vector<double> grid;
  std::vector<double> cost;
  std::vector<double> cost_std;
  double a1 = 0.0, a2 = 0.0, a3 = 0.0;  // cost ~ a1 alpha^2 + a2 alpha + a3
  bool degenerate = false;              // non-positive curvature: grid argmin returned
};

/// Quadratic least-squares fit of cost(alpha); the vertex is clamped to the grid span.
inline AlphaFit fit_quadratic(std::vector<double> grid, std::vector<double> cost) {
  if (grid.size() < 3 || grid.size() != cost.size()) throw ConfigError("quadratic fit needs >= 3 points");
  AlphaFit fit;
  Matrix a(static_cast<Eigen::Index>(grid.size()), 3);
  Vector b(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    a(r, 0) = grid[i] * grid[i];
    a(r, 1) = grid[i];
    a(r, 2) = 1.0;
    b(r) = cost[i];
  }
  const Vector x = a.colPivHouseholderQr().solve(b);
  fit.a1 = x(0);
  fit.a2 = x(1);
  fit.a3 = x(2);
  const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
  if (fit.a1 > 0.0) {
    fit.alpha_star = std::clamp(-fit.a2 / (2.0 * fit.a1), *lo, *hi);
  } else {
    fit.degenerate = true;
    fit.alpha_star = grid[static_cast<std::size_t>(std::min_element(cost.begin(), cost.end()) - cost.begin())];
  }
  fit.grid = std::move(grid);
  fit.cost = std::move(cost);
  return fit;
}

/// Evaluates the cost on the grid (averaging `repetitions` shot-noise runs
/// when shots > 0) and fits a parabola.
inline AlphaFit optimize_alpha(const ChainSpec& spec, std::vector<double> grid, const BraidOptions& opt = {},
                               int repetitions = 1) {
  if (grid.size() < 3) throw ConfigError("optimize_alpha: grid needs >= 3 angles");
  if (repetitions < 1) throw ConfigError("optimize_alpha: repetitions must be >= 1");
  std::vector<double> mean;
  std::vector<double> stddev;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<double> samples;
    const int reps = opt.shots > 0 ? repetitions : 1;
    for (int rep = 0; rep < reps; ++rep) {
      BraidOptions o = opt;
      o.seed = opt.seed + 1000003ull * g + 7919ull * static_cast<std::uint64_t>(rep);
      samples.push_back(braid_cost(fas_braided_wavefunction(spec, grid[g], o).psi_tilde_L));
    }
    double s = 0;
    for (double v : samples) s += v;
    const double m = s / static_cast<double>(samples.size());
    double v2 = 0;
    for (double v : samples) v2 += (v - m) * (v - m);
    mean.push_back(m);
    stddev.push_back(samples.size() > 1 ? std::sqrt(v2 / static_cast<double>(samples.size() - 1)) : 0.0);
  }
  AlphaFit fit = fit_quadratic(std::move(grid), std::move(mean));
  fit.cost_std = std::move(stddev);
  return fit;
}

}  // namespace mflab::braid
