#pragma once

// Dense statevector engine. Site j (1-based) is bit j-1 of the amplitude
// index; |0> is the +1 eigenstate of Z.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mflab/error.hpp"
#include "mflab/ffsim.hpp"
#include "mflab/model.hpp"

namespace mflab::svsim {

inline constexpr int kMaxSites = 24;
inline constexpr int kMaxDenseSites = 8;
inline constexpr int kMaxTransferSites = 3;

struct StateVector {
  int n_sites = 0;
  CVector amp;

  StateVector() = default;
  StateVector(int n, CVector a) : n_sites(n), amp(std::move(a)) {}

  /// |index> in the computational basis.
  static StateVector basis(int n, std::uint64_t index) {
    check_size(n);
    StateVector s(n, CVector::Zero(Eigen::Index{1} << n));
    s.amp(static_cast<Eigen::Index>(index)) = 1.0;
    return s;
  }

  /// Haar-ish random state from a seeded Gaussian draw.
  static StateVector random(int n, std::uint64_t seed) {
    check_size(n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    CVector a(Eigen::Index{1} << n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = cplx(g(rng), g(rng));
    a.normalize();
    return {n, a};
  }

  [[nodiscard]] Eigen::Index dim() const { return amp.size(); }
  [[nodiscard]] double norm() const { return amp.norm(); }

  static void check_size(int n) {
    if (n < 1) throw ConfigError("statevector: n_sites must be positive");
    if (n > kMaxSites) {
      throw CapacityError("statevector: n_sites = " + std::to_string(n) + " exceeds the cap of " +
                          std::to_string(kMaxSites));
    }
  }
};

struct NoiseModel {
  double gamma = 0.0;  // per-cycle observable damping

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("noise: gamma must be finite and >= 0");
  }
};

// ---------------------------------------------------------------------------
// State preparation
// ---------------------------------------------------------------------------

inline StateVector product_state(const std::vector<CVector>& sites) {
  const int n = static_cast<int>(sites.size());
  StateVector::check_size(n);
  CVector amp = CVector::Ones(Eigen::Index{1} << n);
  for (Eigen::Index i = 0; i < amp.size(); ++i) {
    for (int j = 0; j < n; ++j) amp(i) *= sites[static_cast<std::size_t>(j)]((i >> j) & 1);
  }
  return {n, amp};
}

/// |+>^N
inline StateVector plus_product(int n_sites) {
  StateVector::check_size(n_sites);
  const Eigen::Index dim = Eigen::Index{1} << n_sites;
  return {n_sites, CVector::Constant(dim, cplx(std::pow(2.0, -0.5 * n_sites), 0.0))};
}

/// |psi_a> |s_2> ... |s_{N-1}> |psi_a> with |psi_a> = cos a|0> + i sin a|1>.
inline StateVector correlator_state(int n_sites, double a, const std::vector<int>& bits) {
  if (n_sites < 2) throw ConfigError("correlator_state: n_sites must be >= 2");
  if (bits.size() != static_cast<std::size_t>(n_sites - 2)) {
    throw ConfigError("correlator_state: expected " + std::to_string(n_sites - 2) + " bits, got " +
                      std::to_string(bits.size()));
  }
  CVector edge(2);
  edge << cplx(std::cos(a), 0.0), cplx(0.0, std::sin(a));
  std::vector<CVector> sites{edge};
  for (int b : bits) {
    if (b != 0 && b != 1) throw ConfigError("bits must be 0 or 1");
    CVector s = CVector::Zero(2);
    s(b) = 1.0;
    sites.push_back(s);
  }
  sites.push_back(edge);
  return product_state(sites);
}

// ---------------------------------------------------------------------------
// Pauli strings on states
// ---------------------------------------------------------------------------

namespace detail {

struct PauliMasks {
  std::uint64_t flip = 0;   // X or Y
  std::uint64_t sign = 0;   // Y or Z
  cplx prefactor{1.0, 0.0}; // i^phase * i^{#Y}
};

inline PauliMasks masks(const PauliString& p) {
  PauliMasks m;
  int ys = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const Pauli l = p.letters[j];
    if (l == Pauli::X || l == Pauli::Y) m.flip |= std::uint64_t{1} << j;
    if (l == Pauli::Y || l == Pauli::Z) m.sign |= std::uint64_t{1} << j;
    if (l == Pauli::Y) ++ys;
  }
  static const cplx powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  m.prefactor = powers[(p.phase + ys) & 3];
  return m;
}

inline void check_length(const StateVector& s, const PauliString& p) {
  if (static_cast<int>(p.size()) != s.n_sites) throw ConfigError("Pauli string length does not match state");
}

}  // namespace detail

/// P|psi>
inline StateVector apply_pauli(const StateVector& s, const PauliString& p) {
  detail::check_length(s, p);
  const auto m = detail::masks(p);
  CVector out(s.dim());
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    const double sg = (std::popcount(u & m.sign) & 1) ? -1.0 : 1.0;
    out(static_cast<Eigen::Index>(u ^ m.flip)) = m.prefactor * sg * s.amp(i);
  }
  return {s.n_sites, out};
}

/// <psi|P|psi>
inline cplx pauli_expectation(const StateVector& s, const PauliString& p) {
  detail::check_length(s, p);
  const auto m = detail::masks(p);
  cplx acc = 0.0;
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    const double sg = (std::popcount(u & m.sign) & 1) ? -1.0 : 1.0;
    acc += std::conj(s.amp(static_cast<Eigen::Index>(u ^ m.flip))) * sg * s.amp(i);
  }
  return m.prefactor * acc;
}

/// Real expectation of a Hermitian string; throws if the imaginary part is not round-off.
inline double hermitian_expectation(const StateVector& s, const PauliString& p) {
  if (!p.is_hermitian()) throw ConfigError("expected a Hermitian Pauli string, got " + p.label());
  const cplx v = pauli_expectation(s, p);
  if (std::abs(v.imag()) > 1e-12) throw DataQualityError("Hermitian expectation has imaginary part");
  return v.real();
}

/// exp(-i angle P) for Hermitian P.
inline void apply_rotation(StateVector& s, const PauliString& p, double angle) {
  if (!p.is_hermitian()) throw ConfigError("rotation generator must be Hermitian");
  const StateVector ps = apply_pauli(s, p);
  s.amp = std::cos(angle) * s.amp - cplx(0.0, std::sin(angle)) * ps.amp;
}

// Layer gates, 1-based sites.

inline void apply_rz(StateVector& s, int site, double angle) {
  const std::uint64_t bit = std::uint64_t{1} << (site - 1);
  const cplx up = std::polar(1.0, -angle);
  const cplx down = std::polar(1.0, angle);
  for (Eigen::Index i = 0; i < s.dim(); ++i) s.amp(i) *= (static_cast<std::uint64_t>(i) & bit) ? down : up;
}

inline void apply_rzz(StateVector& s, int site, double angle) {
  const std::uint64_t mask = std::uint64_t{3} << (site - 1);
  const cplx same = std::polar(1.0, -angle);
  const cplx diff = std::polar(1.0, angle);
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    s.amp(i) *= (std::popcount(static_cast<std::uint64_t>(i) & mask) & 1) ? diff : same;
  }
}

inline void apply_rxx(StateVector& s, int site, double angle) {
  const std::uint64_t mask = std::uint64_t{3} << (site - 1);
  const double c = std::cos(angle);
  const cplx is(0.0, std::sin(angle));
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    const auto j = static_cast<Eigen::Index>(u ^ mask);
    if (j < i) continue;
    const cplx a = s.amp(i);
    const cplx b = s.amp(j);
    s.amp(i) = c * a - is * b;
    s.amp(j) = c * b - is * a;
  }
}

/// One Floquet period: Z layer, then XX layer, then ZZ layer.
inline void apply_floquet_cycle(StateVector& s, const ChainSpec& spec) {
  if (spec.n_sites != s.n_sites) throw ConfigError("apply_floquet_cycle: n_sites mismatch");
  for (int k = 1; k <= spec.n_sites; ++k) {
    const double a = spec.z_angle[static_cast<std::size_t>(k - 1)];
    if (a != 0.0) apply_rz(s, k, a);
  }
  for (int k = 1; k < spec.n_sites; ++k) {
    const double a = spec.xx_angle[static_cast<std::size_t>(k - 1)];
    if (a != 0.0) apply_rxx(s, k, a);
  }
  for (int k = 1; k < spec.n_sites; ++k) {
    const double a = spec.zz_angle[static_cast<std::size_t>(k - 1)];
    if (a != 0.0) apply_rzz(s, k, a);
  }
}

/// value[n][k] = <psi_n|P_k|psi_n> e^{-gamma n}, psi_n = U_F^n psi, n = 0..depth-1.
inline std::vector<std::vector<cplx>> observable_series(const ChainSpec& spec, const StateVector& init,
                                                        const std::vector<PauliString>& observables,
                                                        int depth, const NoiseModel& noise = {}) {
  if (depth < 1) throw ConfigError("observable_series: depth must be >= 1");
  noise.validate();
  spec.validate();
  StateVector s = init;
  std::vector<std::vector<cplx>> out(static_cast<std::size_t>(depth));
  for (int n = 0; n < depth; ++n) {
    const double damp = std::exp(-noise.gamma * n);
    auto& row = out[static_cast<std::size_t>(n)];
    row.reserve(observables.size());
    for (const auto& p : observables) row.push_back(pauli_expectation(s, p) * damp);
    if (n + 1 < depth) apply_floquet_cycle(s, spec);
  }
  return out;
}

/// Born-rule estimate of <P> from `shots` projective measurements. P has
/// eigenvalues +-1, so the +1 count is binomial with p = (1 + <P>)/2.
inline double sample_shots(const StateVector& s, const PauliString& p, long shots, std::uint64_t seed) {
  if (!p.is_hermitian()) throw ConfigError("sample_shots: observable must be Hermitian");
  if (shots < 1) throw ConfigError("sample_shots: shots must be >= 1");
  const double mean = std::clamp(hermitian_expectation(s, p), -1.0, 1.0);
  const double prob = 0.5 * (1.0 + mean);
  std::mt19937_64 rng(seed);
  std::binomial_distribution<long> draw(shots, prob);
  const long plus = draw(rng);
  return (2.0 * static_cast<double>(plus) - static_cast<double>(shots)) / static_cast<double>(shots);
}

/// gamma^L_1 gamma^L_2N
inline PauliString edge_pair_string(int n_sites) {
  return majorana_to_pauli({1, Rep::L}, n_sites) * majorana_to_pauli({2 * n_sites, Rep::L}, n_sites);
}

/// exp(-alpha gamma_1 gamma_2N) = cos(alpha) - sin(alpha) gamma_1 gamma_2N.
inline void apply_braid_unitary(StateVector& s, double alpha) {
  const StateVector gs = apply_pauli(s, edge_pair_string(s.n_sites));
  s.amp = std::cos(alpha) * s.amp - std::sin(alpha) * gs.amp;
}

// ---------------------------------------------------------------------------
// Dense operators (tiny N)
// ---------------------------------------------------------------------------

using OperatorSum = std::vector<std::pair<cplx, PauliString>>;

inline CMatrix dense_pauli(const PauliString& p) {
  const int n = static_cast<int>(p.size());
  if (n > kMaxDenseSites) throw CapacityError("dense operators are capped at N <= 8");
  const Eigen::Index dim = Eigen::Index{1} << n;
  CMatrix m = CMatrix::Zero(dim, dim);
  const auto mk = detail::masks(p);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    const double sg = (std::popcount(u & mk.sign) & 1) ? -1.0 : 1.0;
    m(static_cast<Eigen::Index>(u ^ mk.flip), i) = mk.prefactor * sg;
  }
  return m;
}

inline CMatrix dense_operator(const OperatorSum& op, int n_sites) {
  if (n_sites > kMaxDenseSites) throw CapacityError("dense operators are capped at N <= 8");
  const Eigen::Index dim = Eigen::Index{1} << n_sites;
  CMatrix m = CMatrix::Zero(dim, dim);
  for (const auto& [c, p] : op) {
    if (static_cast<int>(p.size()) != n_sites) throw ConfigError("operator term has wrong length");
    m += c * dense_pauli(p);
  }
  return m;
}

/// Columns are U_F |basis>.
inline CMatrix floquet_matrix(const ChainSpec& spec) {
  if (spec.n_sites > kMaxDenseSites) {
    throw CapacityError("dense Floquet unitary is capped at N <= " + std::to_string(kMaxDenseSites));
  }
  const Eigen::Index dim = Eigen::Index{1} << spec.n_sites;
  CMatrix u(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    StateVector s = StateVector::basis(spec.n_sites, static_cast<std::uint64_t>(i));
    apply_floquet_cycle(s, spec);
    u.col(i) = s.amp;
  }
  return u;
}

/// sum_mu coeffs_mu gamma^rep_mu as a Pauli sum.
inline OperatorSum majorana_operator(const CVector& coeffs, Rep rep = Rep::L) {
  const int n = static_cast<int>(coeffs.size() / 2);
  OperatorSum op;
  for (int mu = 1; mu <= 2 * n; ++mu) {
    const cplx c = coeffs(mu - 1);
    if (c != cplx(0.0)) op.emplace_back(c, majorana_to_pauli({mu, rep}, n));
  }
  return op;
}

/// || U_F^dag D U_F - e^{-i omega} D ||_2 (spectral norm), N <= 8.
inline double operator_residual(const ChainSpec& spec, const OperatorSum& candidate, double omega) {
  spec.validate();
  if (spec.n_sites > kMaxDenseSites) {
    throw CapacityError("operator_residual: N = " + std::to_string(spec.n_sites) + " exceeds the cap of " +
                        std::to_string(kMaxDenseSites));
  }
  const CMatrix u = floquet_matrix(spec);
  const CMatrix d = dense_operator(candidate, spec.n_sites);
  const CMatrix r = u.adjoint() * d * u - std::polar(1.0, -omega) * d;
  Eigen::JacobiSVD<CMatrix> svd(r);
  return svd.singularValues()(0);
}

// ---------------------------------------------------------------------------
// Pauli transfer matrix (N <= 3)
// ---------------------------------------------------------------------------

/// Pauli string with base-4 digits of `index` (site 1 least significant).
inline PauliString pauli_basis_element(std::size_t index, int n_sites) {
  PauliString p(static_cast<std::size_t>(n_sites));
  for (int j = 0; j < n_sites; ++j) {
    p.letters[static_cast<std::size_t>(j)] = static_cast<Pauli>(index & 3u);
    index >>= 2;
  }
  return p;
}

struct TransferReport {
  int n_sites = 0;
  Matrix e;                  // E_{ab} = 2^-N Tr(U^dag P_a U P_b)
  double max_imag = 0.0;
  double orthogonality = 0.0;  // ||E E^T - I||_F
  double unit_circle = 0.0;    // max | |lambda| - 1 |
  std::vector<double> omega;   // per eigenoperator
  CMatrix w;                   // columns: Pauli coefficients of Delta_b
  double eigen_residual = 0.0;  // max_b ||U^dag Delta_b U - e^{-i omega_b} Delta_b||_F
  double trace_residual = 0.0;  // max |Tr(Delta_b^dag Delta_b') - 2^N delta|

  [[nodiscard]] bool ok(double tol = 1e-10) const {
    return max_imag <= tol && orthogonality <= tol && unit_circle <= tol && eigen_residual <= tol &&
           trace_residual <= tol * std::pow(2.0, n_sites);
  }
};

inline TransferReport pauli_transfer_matrix(const ChainSpec& spec) {
  spec.validate();
  if (spec.n_sites > kMaxTransferSites) {
    throw CapacityError("pauli_transfer_matrix: N = " + std::to_string(spec.n_sites) + " exceeds the cap of 3");
  }
  const int n = spec.n_sites;
  const auto count = std::size_t{1} << (2 * n);
  const double scale = std::pow(2.0, -n);
  const CMatrix u = floquet_matrix(spec);
  std::vector<CMatrix> basis;
  basis.reserve(count);
  for (std::size_t a = 0; a < count; ++a) basis.push_back(dense_pauli(pauli_basis_element(a, n)));

  TransferReport rep;
  rep.n_sites = n;
  const auto m = static_cast<Eigen::Index>(count);
  rep.e.resize(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    const CMatrix heis = u.adjoint() * basis[static_cast<std::size_t>(a)] * u;
    for (Eigen::Index b = 0; b < m; ++b) {
      const cplx v = scale * (heis * basis[static_cast<std::size_t>(b)]).trace();
      rep.max_imag = std::max(rep.max_imag, std::abs(v.imag()));
      rep.e(a, b) = v.real();
    }
  }
  rep.orthogonality = (rep.e * rep.e.transpose() - Matrix::Identity(m, m)).norm();

  // U^dag Delta U = sum_b (E^T w)_b P_b, so eigenoperators are eigenvectors of E^T.
  const Matrix et = rep.e.transpose();
  auto spec_raw = ffsim::detail::schur_spectrum(et);
  rep.w = spec_raw.psi;
  for (std::size_t k = 0; k < spec_raw.omega.size(); ++k) {
    // E^T w = e^{i w'} w  ->  U^dag Delta U = e^{-i omega} Delta with omega = -w'.
    rep.omega.push_back(ffsim::wrap_angle(-spec_raw.omega[k]));
  }
  const Eigen::ComplexEigenSolver<CMatrix> ev(et.cast<cplx>(), false);
  for (Eigen::Index k = 0; k < m; ++k) {
    rep.unit_circle = std::max(rep.unit_circle, std::abs(std::abs(ev.eigenvalues()(k)) - 1.0));
  }

  std::vector<CMatrix> deltas;
  deltas.reserve(count);
  for (Eigen::Index b = 0; b < m; ++b) {
    CMatrix d = CMatrix::Zero(u.rows(), u.cols());
    for (Eigen::Index a = 0; a < m; ++a) d += rep.w(a, b) * basis[static_cast<std::size_t>(a)];
    const double w = rep.omega[static_cast<std::size_t>(b)];
    rep.eigen_residual =
        std::max(rep.eigen_residual, (u.adjoint() * d * u - std::polar(1.0, -w) * d).norm());
    deltas.push_back(std::move(d));
  }
  const double dim = std::pow(2.0, n);
  for (Eigen::Index b = 0; b < m; ++b) {
    for (Eigen::Index c = 0; c < m; ++c) {
      const cplx t = (deltas[static_cast<std::size_t>(b)].adjoint() * deltas[static_cast<std::size_t>(c)]).trace();
      rep.trace_residual = std::max(rep.trace_residual, std::abs(t - (b == c ? dim : 0.0)));
    }
  }
  return rep;
}

/// Finite-D Fourier channel on a Pauli coefficient vector:
/// (1/D) sum_n e^{i omega n} (E^T)^n v.
inline CVector fourier_channel_average(const Matrix& e, double omega, const CVector& v, int depth) {
  if (depth < 1) throw ConfigError("fourier_channel_average: depth must be >= 1");
  const CMatrix et = e.transpose().cast<cplx>();
  CVector acc = CVector::Zero(v.size());
  CVector cur = v;
  for (int n = 0; n < depth; ++n) {
    acc += std::polar(1.0, omega * n) * cur;
    cur = et * cur;
  }
  return acc / static_cast<double>(depth);
}

/// D -> infinity limit: projection onto eigenoperators with frequency omega.
inline CVector eigen_projection(const TransferReport& rep, double omega, const CVector& v, double tol = 1e-8) {
  CVector out = CVector::Zero(v.size());
  for (std::size_t b = 0; b < rep.omega.size(); ++b) {
    if (ffsim::circular_distance(rep.omega[b], omega) <= tol) {
      const auto col = rep.w.col(static_cast<Eigen::Index>(b));
      out += col * col.dot(v);
    }
  }
  return out;
}

/// Pauli coefficients of sum_mu c_mu gamma^L_mu in the transfer-matrix basis.
inline CVector majorana_pauli_vector(const CVector& coeffs, int n_sites) {
  const auto count = std::size_t{1} << (2 * n_sites);
  CVector v = CVector::Zero(static_cast<Eigen::Index>(count));
  static const cplx powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int mu = 1; mu <= 2 * n_sites; ++mu) {
    const PauliString p = majorana_to_pauli({mu, Rep::L}, n_sites);
    std::size_t index = 0;
    for (int j = n_sites - 1; j >= 0; --j) index = index * 4 + static_cast<std::size_t>(p.letters[static_cast<std::size_t>(j)]);
    v(static_cast<Eigen::Index>(index)) += powers[p.phase & 3] * coeffs(mu - 1);
  }
  return v;
}

}  // namespace mflab::svsim
