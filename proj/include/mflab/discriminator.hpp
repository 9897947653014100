#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mflab/engine.hpp"
#include "mflab/error.hpp"
#include "mflab/ffsim.hpp"
#include "mflab/model.hpp"
#include "mflab/svsim.hpp"

namespace mflab::discriminator {

inline constexpr double kDefaultA = kPi / 8;
inline constexpr double kDefaultThreshold = 0.1;
inline constexpr int kMaxSvsimSites = 14;

namespace detail {

inline void check_engine(const ChainSpec& spec, Engine engine) {
  spec.validate();
  if (engine == Engine::FFSim && !spec.is_free()) {
    throw NotFreeFermionError("not free-fermion: the ffsim engine requires zz_angle = 0");
  }
  if (engine == Engine::SVSim && spec.n_sites > kMaxSvsimSites) {
    throw CapacityError("correlator: svsim path is capped at N <= " + std::to_string(kMaxSvsimSites));
  }
}

}  // namespace detail

/// Time averages (1/D) sum_n <gamma_mu gamma_nu (n)> from |psi~0>, one per 1-based pair.
inline std::vector<cplx> correlator_averages(const ChainSpec& spec, double a, const std::vector<int>& bits,
                                             const std::vector<std::pair<int, int>>& pairs, int depth,
                                             Engine engine = Engine::FFSim) {
  detail::check_engine(spec, engine);
  std::vector<cplx> out(pairs.size(), 0.0);
  if (engine == Engine::FFSim) {
    const auto sp = ffsim::build_single_particle_unitary(spec);
    const auto m0 = ffsim::initial_two_point_matrix(spec.n_sites, a, bits);
    const auto series = ffsim::two_point_series(sp, m0, pairs, depth);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      for (const cplx& v : series[p]) out[p] += v;
    }
  } else {
    std::vector<PauliString> obs;
    for (auto [mu, nu] : pairs) {
      obs.push_back(majorana_to_pauli({mu, Rep::L}, spec.n_sites) * majorana_to_pauli({nu, Rep::L}, spec.n_sites));
    }
    const auto table =
        svsim::observable_series(spec, svsim::correlator_state(spec.n_sites, a, bits), obs, depth);
    for (const auto& row : table) {
      for (std::size_t p = 0; p < pairs.size(); ++p) out[p] += row[p];
    }
  }
  for (auto& v : out) v /= static_cast<double>(depth);
  return out;
}

/// T_{mu nu}: finite-D time average of <gamma_mu gamma_nu> from |psi~0>.
inline cplx correlator_T(const ChainSpec& spec, double a, const std::vector<int>& bits, std::pair<int, int> pair,
                         int depth, Engine engine = Engine::FFSim) {
  return correlator_averages(spec, a, bits, {pair}, depth, engine).front();
}

struct CorrelatorProfile {
  int n_sites = 0;
  int depth = 0;
  double a = kDefaultA;
  Engine engine = Engine::FFSim;
  std::vector<std::vector<double>> realizations;  // [r][x-1] = |T_{1,2x}|
  std::vector<std::vector<int>> bits;
  std::vector<double> mean;
  std::vector<double> stddev;  // sample standard deviation
};

/// Bits for realization r, drawn from a sub-seed derived from (seed, r).
inline std::vector<int> realization_bits(int n_sites, std::uint64_t seed, int r) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(r)};
  std::mt19937_64 rng(seq);
  std::bernoulli_distribution coin(0.5);
  std::vector<int> bits(static_cast<std::size_t>(std::max(0, n_sites - 2)));
  for (auto& b : bits) b = coin(rng) ? 1 : 0;
  return bits;
}

inline CorrelatorProfile scan_T_profile(const ChainSpec& spec, double a, int n_realizations, int depth,
                                        std::uint64_t seed, Engine engine = Engine::FFSim) {
  if (n_realizations < 1) throw ConfigError("scan_T_profile: n_realizations must be >= 1");
  const int n = spec.n_sites;
  std::vector<std::pair<int, int>> pairs;
  for (int x = 1; x <= n; ++x) pairs.emplace_back(1, 2 * x);

  CorrelatorProfile prof;
  prof.n_sites = n;
  prof.depth = depth;
  prof.a = a;
  prof.engine = engine;
  for (int r = 0; r < n_realizations; ++r) {
    auto bits = realization_bits(n, seed, r);
    const auto t = correlator_averages(spec, a, bits, pairs, depth, engine);
    std::vector<double> row;
    row.reserve(t.size());
    for (const auto& v : t) row.push_back(std::abs(v));
    prof.realizations.push_back(std::move(row));
    prof.bits.push_back(std::move(bits));
  }
  prof.mean.assign(static_cast<std::size_t>(n), 0.0);
  prof.stddev.assign(static_cast<std::size_t>(n), 0.0);
  for (std::size_t x = 0; x < prof.mean.size(); ++x) {
    double s = 0;
    for (const auto& row : prof.realizations) s += row[x];
    const double m = s / n_realizations;
    double v = 0;
    for (const auto& row : prof.realizations) v += (row[x] - m) * (row[x] - m);
    prof.mean[x] = m;
    prof.stddev[x] = n_realizations > 1 ? std::sqrt(v / (n_realizations - 1)) : 0.0;
  }
  return prof;
}

enum class Verdict { Topological, Trivial, NoMode };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Topological: return "TOPOLOGICAL";
    case Verdict::Trivial: return "TRIVIAL";
    case Verdict::NoMode: return "NO_MODE";
  }
  return "?";
}

struct Classification {
  Verdict verdict = Verdict::NoMode;
  double threshold = kDefaultThreshold;
  double left_peak = 0.0;   // max mean over x in {1, 2}
  double right_peak = 0.0;  // max mean over x in {N-1, N}
};

/// A left-edge peak means the partner of gamma_1 sits at the same edge, so
/// any profile with one is TRIVIAL; right-only is TOPOLOGICAL.
inline Classification classify_modes(const CorrelatorProfile& profile, double threshold = kDefaultThreshold) {
  const auto n = profile.mean.size();
  if (n < 2) throw ConfigError("classify_modes: empty profile");
  Classification c;
  c.threshold = threshold;
  c.left_peak = std::max(profile.mean[0], profile.mean[1]);
  c.right_peak = std::max(profile.mean[n - 2], profile.mean[n - 1]);
  const bool left = c.left_peak > threshold;
  const bool right = c.right_peak > threshold;
  c.verdict = left ? Verdict::Trivial : right ? Verdict::Topological : Verdict::NoMode;
  return c;
}

}  // namespace mflab::discriminator
