#pragma once

// Exact free-fermion engine for zz_angle = 0.
//
// Conjugation by one Floquet cycle acts linearly on Majorana operators,
//   U_F^dag gamma_mu U_F = sum_nu u_{mu nu} gamma_nu,
// with u = exp(4 h_xx[theta]) exp(4 h_z[phi]) a real 2N x 2N rotation. Two
// index conventions follow from this and both appear below:
//   * expectation vectors evolve as  v_{n} = u^n v_0       (<gamma_mu(n)>)
//   * operator coefficient vectors as c_{n} = (u^T)^n c_0  (O = sum c_mu gamma_mu)
// Single-fermion modes solve psi^T u = e^{-i omega} psi^T, i.e. u psi = e^{i omega} psi.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mflab/error.hpp"
#include "mflab/model.hpp"

namespace mflab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using cplx = std::complex<double>;

namespace ffsim {

/// Default Majorana-flag tolerance on |omega - {0, pi}|.
inline constexpr double kDefaultMajoranaTol = 1e-6 * 2.0 * kPi;

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double w) {
  double r = std::remainder(w, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

/// Distance between two angles on the circle.
inline double circular_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

// ---------------------------------------------------------------------------
// Generators and u
// ---------------------------------------------------------------------------

struct Generators {
  Matrix h_z;
  Matrix h_xx;
};

/// h_z = -1/2 sum_k (|2k+1><2k+2| - h.c.),  h_xx = 1/2 sum_k (|2k+2><2k+3| - h.c.)
/// (1-based kets). With per-site weights the k-th term is scaled by the
/// site's z angle / bond's xx angle; unit weights reproduce the bare generators.
inline Generators build_generators(int n_sites) {
  if (n_sites < 2) throw ConfigError("build_generators: n_sites must be >= 2");
  const auto dim = 2 * static_cast<Eigen::Index>(n_sites);
  Generators g{Matrix::Zero(dim, dim), Matrix::Zero(dim, dim)};
  for (Eigen::Index k = 0; k < n_sites; ++k) {
    g.h_z(2 * k, 2 * k + 1) = -0.5;
    g.h_z(2 * k + 1, 2 * k) = 0.5;
  }
  for (Eigen::Index k = 0; k + 1 < n_sites; ++k) {
    g.h_xx(2 * k + 1, 2 * k + 2) = 0.5;
    g.h_xx(2 * k + 2, 2 * k + 1) = -0.5;
  }
  return g;
}

/// Generators with the spec's angles folded in, so u = exp(4 h_xx) exp(4 h_z).
inline Generators weighted_generators(const ChainSpec& spec) {
  Generators g = build_generators(spec.n_sites);
  for (Eigen::Index k = 0; k < spec.n_sites; ++k) {
    const double a = spec.z_angle[static_cast<std::size_t>(k)];
    g.h_z(2 * k, 2 * k + 1) *= a;
    g.h_z(2 * k + 1, 2 * k) *= a;
  }
  for (Eigen::Index k = 0; k + 1 < spec.n_sites; ++k) {
    const double a = spec.xx_angle[static_cast<std::size_t>(k)];
    g.h_xx(2 * k + 1, 2 * k + 2) *= a;
    g.h_xx(2 * k + 2, 2 * k + 1) *= a;
  }
  return g;
}

struct SingleParticleUnitary {
  int n_sites = 0;
  Matrix u;

  [[nodiscard]] Eigen::Index dim() const { return u.rows(); }
};

inline double orthogonality_residual(const Matrix& u) {
  return (u.transpose() * u - Matrix::Identity(u.rows(), u.cols())).norm();
}

/// Both layers are products of disjoint 2x2 Givens rotations, so the matrix
/// exponentials are exact closed forms.
inline SingleParticleUnitary build_single_particle_unitary(const ChainSpec& spec) {
  spec.validate();
  if (!spec.is_free()) {
    throw NotFreeFermionError("not free-fermion: zz_angle must vanish for the free-fermion engine");
  }
  const auto dim = static_cast<Eigen::Index>(spec.majorana_count());
  Matrix z_layer = Matrix::Identity(dim, dim);
  for (Eigen::Index k = 0; k < spec.n_sites; ++k) {
    const double a = 2.0 * spec.z_angle[static_cast<std::size_t>(k)];
    const double c = std::cos(a);
    const double s = std::sin(a);
    z_layer(2 * k, 2 * k) = c;
    z_layer(2 * k, 2 * k + 1) = -s;
    z_layer(2 * k + 1, 2 * k) = s;
    z_layer(2 * k + 1, 2 * k + 1) = c;
  }
  Matrix xx_layer = Matrix::Identity(dim, dim);
  for (Eigen::Index k = 0; k + 1 < spec.n_sites; ++k) {
    const double a = 2.0 * spec.xx_angle[static_cast<std::size_t>(k)];
    const double c = std::cos(a);
    const double s = std::sin(a);
    const Eigen::Index i = 2 * k + 1;
    const Eigen::Index j = 2 * k + 2;
    xx_layer(i, i) = c;
    xx_layer(i, j) = s;
    xx_layer(j, i) = -s;
    xx_layer(j, j) = c;
  }
  return {spec.n_sites, xx_layer * z_layer};
}

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

enum class MajoranaFrequency { Zero, Pi };

inline double label_frequency(MajoranaFrequency f) { return f == MajoranaFrequency::Zero ? 0.0 : kPi; }
inline const char* frequency_name(MajoranaFrequency f) { return f == MajoranaFrequency::Zero ? "0" : "pi"; }

struct SingleMode {
  double omega = 0.0;  // (-pi, pi]
  CVector psi;         // u psi = e^{i omega} psi, unit norm
  std::size_t partner = 0;
  std::optional<MajoranaFrequency> majorana;
};

struct MajoranaMode {
  MajoranaFrequency frequency = MajoranaFrequency::Zero;
  double splitting = 0.0;  // |omega - label| of the underlying eigenpair
  Rep side = Rep::L;
  Vector psi;              // real, unit norm; psi_1 > 0 (L) or psi_2N > 0 (R)
  double edge_weight = 0.0;
  double localization_length = 0.0;  // sites
};

struct ModeSet {
  int n_sites = 0;
  double tol = kDefaultMajoranaTol;
  std::vector<SingleMode> modes;
  std::vector<MajoranaMode> majoranas;

  /// Flagged modes report their label frequency (0 or pi), everything else its own.
  [[nodiscard]] double effective_frequency(std::size_t k) const {
    const auto& m = modes[k];
    return m.majorana ? label_frequency(*m.majorana) : m.omega;
  }

  [[nodiscard]] const MajoranaMode* find(MajoranaFrequency f, Rep side) const {
    for (const auto& m : majoranas) {
      if (m.frequency == f && m.side == side) return &m;
    }
    return nullptr;
  }

  [[nodiscard]] bool has(MajoranaFrequency f) const { return find(f, Rep::L) != nullptr; }

  [[nodiscard]] CMatrix wavefunctions() const {
    const auto dim = static_cast<Eigen::Index>(2 * n_sites);
    CMatrix m(dim, static_cast<Eigen::Index>(modes.size()));
    for (std::size_t k = 0; k < modes.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = modes[k].psi;
    return m;
  }
};

/// Decay length (in sites) of a Majorana wavefunction measured from its own
/// edge: least-squares slope of log site weight over the first half of the
/// chain. Infinite when the weight does not decrease.
inline double localization_length(const Vector& psi, Rep side) {
  const auto n = static_cast<int>(psi.size() / 2);
  if (n < 2) return std::numeric_limits<double>::infinity();
  const int window = std::max(2, n / 2);
  std::vector<double> w(static_cast<std::size_t>(window));
  for (int x = 0; x < window; ++x) {
    const int site = side == Rep::L ? x : n - 1 - x;
    w[static_cast<std::size_t>(x)] = std::hypot(psi(2 * site), psi(2 * site + 1));
  }
  // Points under the round-off floor carry no decay information.
  const double floor = 1e-12 * *std::max_element(w.begin(), w.end());
  int used = 0;
  while (used < window && w[static_cast<std::size_t>(used)] > floor) ++used;
  if (used < window && used <= 1) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int x = 0; x < used; ++x) {
    const double y = std::log(w[static_cast<std::size_t>(x)]);
    sx += x;
    sy += y;
    sxx += double(x) * x;
    sxy += x * y;
  }
  const double m = used;
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  if (!(slope < 0.0)) return std::numeric_limits<double>::infinity();
  return -1.0 / slope;
}

namespace detail {

struct RawSpectrum {
  std::vector<double> omega;
  CMatrix psi;
  std::vector<std::size_t> partner;
};

// Orthonormal eigenbasis of a real orthogonal matrix from its real Schur form.
inline RawSpectrum schur_spectrum(const Matrix& u) {
  const Eigen::Index n = u.rows();
  Eigen::RealSchur<Matrix> schur(u);
  if (schur.info() != Eigen::Success) throw Error("real Schur decomposition did not converge");
  const Matrix& t = schur.matrixT();
  const Matrix& q = schur.matrixU();

  RawSpectrum out;
  out.psi.resize(n, n);
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < n;) {
    const bool block = i + 1 < n && t(i + 1, i) != 0.0;
    if (!block) {
      out.omega.push_back(t(i, i) >= 0.0 ? 0.0 : kPi);
      out.psi.col(col) = q.col(i).cast<cplx>();
      out.partner.push_back(static_cast<std::size_t>(col));
      ++col;
      i += 1;
      continue;
    }
    // Blocks of an orthogonal matrix are rotations [[c, -s], [s, c]] up to
    // round-off; using that form keeps psi and conj(psi) exactly orthogonal
    // even when s is tiny.
    const double c = 0.5 * (t(i, i) + t(i + 1, i + 1));
    const double sr = 0.5 * (t(i + 1, i) - t(i, i + 1));
    const double s = std::abs(sr);
    CVector v(2);
    v << cplx(1.0, 0.0), cplx(0.0, sr >= 0.0 ? -1.0 : 1.0);
    v /= std::sqrt(2.0);
    const CVector psi = q.col(i).cast<cplx>() * v(0) + q.col(i + 1).cast<cplx>() * v(1);
    const double w = std::atan2(s, c);
    out.omega.push_back(w);
    out.omega.push_back(-w);
    out.psi.col(col) = psi;
    out.psi.col(col + 1) = psi.conjugate();
    out.partner.push_back(static_cast<std::size_t>(col + 1));
    out.partner.push_back(static_cast<std::size_t>(col));
    col += 2;
    i += 2;
  }
  return out;
}

// Real orthonormal basis for the span of the given complex columns (closed
// under conjugation), with the requested dimension.
inline Matrix real_span(const CMatrix& cols, Eigen::Index dim) {
  Matrix stacked(cols.rows(), 2 * cols.cols());
  stacked << cols.real(), cols.imag();
  Eigen::JacobiSVD<Matrix> svd(stacked, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(dim);
}

// Orthonormal pair (L, R) inside span(basis), L hugging site 1 and R site N.
inline std::pair<Vector, Vector> edge_pair(const Matrix& basis) {
  const Eigen::Index last = basis.rows() - 1;
  Vector left;
  Vector right;
  if (basis.cols() == 2) {
    // Rotate the plane to maximize psi^L_1 + psi^R_2N over both orientations.
    double best = -std::numeric_limits<double>::infinity();
    for (double flip : {1.0, -1.0}) {
      const Vector a = basis.col(0);
      const Vector b = flip * basis.col(1);
      const double t = std::atan2(b(0) - a(last), a(0) + b(last));
      const Vector l = std::cos(t) * a + std::sin(t) * b;
      const Vector r = -std::sin(t) * a + std::cos(t) * b;
      const double score = l(0) + r(last);
      if (score > best) {
        best = score;
        left = l;
        right = r;
      }
    }
  } else {
    const Matrix proj = basis * basis.transpose();
    left = proj.col(0);
    if (left.norm() > 0) left.normalize();
    right = proj.col(last);
    right -= left * left.dot(right);
    if (right.norm() > 0) right.normalize();
  }
  if (left(0) < 0) left = -left;
  if (right(last) < 0) right = -right;
  return {left, right};
}

}  // namespace detail

struct EigenOptions {
  double tol = kDefaultMajoranaTol;
  /// Also flag the pair nearest 0 / pi when it is edge-localized and well
  /// separated from the rest of the spectrum, even if its finite-size
  /// splitting exceeds tol.
  bool edge_aware = true;
  /// Localization threshold in sites; <= 0 means n_sites / 2.
  double max_localization = 0.0;
  /// Minimum ratio (gap to next mode) / splitting for edge-aware flagging.
  double isolation = 10.0;
};

inline ModeSet eigenmodes(const SingleParticleUnitary& sp, const EigenOptions& opt = {}) {
  auto raw = detail::schur_spectrum(sp.u);
  const Eigen::Index dim = sp.u.rows();

  const CMatrix gram = raw.psi.adjoint() * raw.psi;
  if ((gram - CMatrix::Identity(dim, dim)).norm() > 1e-8) {
    throw Error("eigenmodes: orthonormality residual exceeds 1e-8");
  }

  ModeSet set;
  set.n_sites = sp.n_sites;
  set.tol = opt.tol;
  set.modes.resize(raw.omega.size());
  for (std::size_t k = 0; k < raw.omega.size(); ++k) {
    set.modes[k].omega = raw.omega[k];
    set.modes[k].psi = raw.psi.col(static_cast<Eigen::Index>(k));
    set.modes[k].partner = raw.partner[k];
  }

  const double max_loc =
      opt.max_localization > 0 ? opt.max_localization : 0.5 * static_cast<double>(sp.n_sites);

  for (MajoranaFrequency f : {MajoranaFrequency::Zero, MajoranaFrequency::Pi}) {
    const double target = label_frequency(f);
    std::vector<std::size_t> order(set.modes.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return circular_distance(set.modes[a].omega, target) <
             circular_distance(set.modes[b].omega, target);
    });
    if (order.size() < 2) continue;

    std::vector<std::size_t> cluster;
    for (std::size_t k : order) {
      if (circular_distance(set.modes[k].omega, target) <= opt.tol) cluster.push_back(k);
    }
    bool exact = cluster.size() >= 2;
    if (!exact) {
      if (!opt.edge_aware) continue;
      cluster = {order[0], order[1]};
    }
    // A lone real eigenvector at the target can't form an L/R pair.
    if (cluster.size() < 2) continue;

    CMatrix cols(dim, static_cast<Eigen::Index>(cluster.size()));
    for (std::size_t c = 0; c < cluster.size(); ++c) {
      cols.col(static_cast<Eigen::Index>(c)) = set.modes[cluster[c]].psi;
    }
    const Matrix basis = detail::real_span(cols, static_cast<Eigen::Index>(cluster.size()));
    auto [left, right] = detail::edge_pair(basis);
    const double loc_l = localization_length(left, Rep::L);
    const double loc_r = localization_length(right, Rep::R);

    double splitting = 0.0;
    for (std::size_t k : cluster) {
      splitting = std::max(splitting, circular_distance(set.modes[k].omega, target));
    }
    if (!exact) {
      const double next = cluster.size() < order.size()
                              ? circular_distance(set.modes[order[cluster.size()]].omega, target)
                              : kPi;
      const bool isolated = next >= opt.isolation * splitting;
      if (!(isolated && loc_l < max_loc && loc_r < max_loc)) continue;
    }

    for (std::size_t k : cluster) set.modes[k].majorana = f;
    set.majoranas.push_back({f, splitting, Rep::L, left, left(0), loc_l});
    set.majoranas.push_back({f, splitting, Rep::R, right, right(dim - 1), loc_r});
  }
  return set;
}

namespace detail {

inline nlohmann::json complex_vector_json(const CVector& v) {
  std::vector<double> re(static_cast<std::size_t>(v.size()));
  std::vector<double> im(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    re[static_cast<std::size_t>(i)] = v(i).real();
    im[static_cast<std::size_t>(i)] = v(i).imag();
  }
  return {{"re", re}, {"im", im}};
}

}  // namespace detail

inline nlohmann::json to_json(const MajoranaMode& m) {
  std::vector<double> psi(m.psi.data(), m.psi.data() + m.psi.size());
  return {{"frequency", frequency_name(m.frequency)},
          {"splitting", m.splitting},
          {"side", rep_name(m.side)},
          {"edge_weight", m.edge_weight},
          {"localization_length", std::isfinite(m.localization_length) ? nlohmann::json(m.localization_length)
                                                                         : nlohmann::json(nullptr)},
          {"psi", psi}};
}

inline nlohmann::json to_json(const ModeSet& set) {
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : set.modes) {
    modes.push_back({{"omega", m.omega},
                     {"partner", m.partner},
                     {"majorana", m.majorana ? nlohmann::json(frequency_name(*m.majorana)) : nlohmann::json(nullptr)},
                     {"psi", detail::complex_vector_json(m.psi)}});
  }
  nlohmann::json majoranas = nlohmann::json::array();
  for (const auto& m : set.majoranas) majoranas.push_back(to_json(m));
  return {{"n", set.n_sites}, {"tol", set.tol}, {"modes", modes}, {"majoranas", majoranas}};
}

// ---------------------------------------------------------------------------
// Frequency clusters and projections
// ---------------------------------------------------------------------------

struct FrequencyCluster {
  double omega = 0.0;
  CMatrix basis;  // orthonormal columns

  [[nodiscard]] CMatrix projector() const { return basis * basis.adjoint(); }
};

/// Groups modes whose effective frequencies lie within tol on the circle.
inline std::vector<FrequencyCluster> frequency_clusters(const ModeSet& modes, double tol) {
  std::vector<std::vector<std::size_t>> members;
  std::vector<double> reps;
  for (std::size_t k = 0; k < modes.modes.size(); ++k) {
    const double w = modes.effective_frequency(k);
    bool placed = false;
    for (std::size_t c = 0; c < reps.size(); ++c) {
      if (circular_distance(reps[c], w) <= tol) {
        members[c].push_back(k);
        placed = true;
        break;
      }
    }
    if (!placed) {
      reps.push_back(w);
      members.push_back({k});
    }
  }
  std::vector<FrequencyCluster> out;
  const auto dim = static_cast<Eigen::Index>(2 * modes.n_sites);
  for (std::size_t c = 0; c < reps.size(); ++c) {
    FrequencyCluster fc;
    fc.omega = reps[c];
    fc.basis.resize(dim, static_cast<Eigen::Index>(members[c].size()));
    for (std::size_t j = 0; j < members[c].size(); ++j) {
      fc.basis.col(static_cast<Eigen::Index>(j)) = modes.modes[members[c][j]].psi;
    }
    out.push_back(std::move(fc));
  }
  return out;
}

/// D -> infinity limit of (1/D) sum_n e^{i omega n} (u^T)^n coeffs: projection
/// onto single-fermion modes whose effective frequency equals omega.
inline CVector frequency_projection(const ModeSet& modes, double omega, const CVector& coeffs) {
  CVector out = CVector::Zero(coeffs.size());
  for (std::size_t k = 0; k < modes.modes.size(); ++k) {
    if (circular_distance(modes.effective_frequency(k), omega) <= modes.tol) {
      const auto& psi = modes.modes[k].psi;
      out += psi * psi.dot(coeffs);
    }
  }
  return out;
}

/// Real coefficients stay real: every frequency subspace used here is closed
/// under conjugation.
inline Vector frequency_projection(const ModeSet& modes, double omega, const Vector& coeffs) {
  return frequency_projection(modes, omega, CVector(coeffs.cast<cplx>())).real();
}

// ---------------------------------------------------------------------------
// Time evolution
// ---------------------------------------------------------------------------

/// <gamma_mu(n)> for every mu: v_n = u^n v_0, n = 0..depth-1.
inline std::vector<Vector> heisenberg_series(const SingleParticleUnitary& sp, const Vector& init,
                                             int depth) {
  if (depth < 1) throw ConfigError("heisenberg_series: depth must be >= 1");
  if (init.size() != sp.dim()) throw ConfigError("heisenberg_series: init has wrong length");
  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(depth));
  Vector v = init;
  for (int n = 0; n < depth; ++n) {
    out.push_back(v);
    v = sp.u * v;
  }
  return out;
}

/// <+...+| gamma^rep_mu |+...+>: +e_1 for L, -e_2N for R (gamma^R_2N = -X_N).
inline Vector plus_state_moments(int n_sites, Rep rep) {
  Vector v = Vector::Zero(2 * n_sites);
  if (rep == Rep::L) {
    v(0) = 1.0;
  } else {
    v(2 * n_sites - 1) = -1.0;
  }
  return v;
}

/// Sign of the anchor moment (gamma_1 for L, gamma_2N for R) on the plus state.
inline double anchor_sign(Rep rep) { return rep == Rep::L ? 1.0 : -1.0; }

/// 1-based anchor index of a representation.
inline int anchor_index(Rep rep, int n_sites) { return rep == Rep::L ? 1 : 2 * n_sites; }

/// M_{mu nu} = <psi~0| gamma_mu gamma_nu |psi~0> (L representation) for
/// |psi~0> = |psi_a> |s_2> ... |s_{N-1}> |psi_a>,  |psi_a> = cos a|0> + i sin a|1>.
/// Boundary pairs carry C1 = (-1)^{N+S} sin^2(2a) on (1, 2N) and C2 = cos(2a)
/// on (1, 2) and (2N-1, 2N); each bulk site k adds (-1)^{s_k} on (2k-1, 2k).
inline CMatrix initial_two_point_matrix(int n_sites, double a, const std::vector<int>& bits) {
  if (n_sites < 2) throw ConfigError("initial_two_point_matrix: n_sites must be >= 2");
  if (bits.size() != static_cast<std::size_t>(n_sites - 2)) {
    throw ConfigError("initial_two_point_matrix: expected " + std::to_string(n_sites - 2) +
                      " bits, got " + std::to_string(bits.size()));
  }
  int total = 0;
  for (int b : bits) {
    if (b != 0 && b != 1) throw ConfigError("bits must be 0 or 1");
    total += b;
  }
  const auto dim = static_cast<Eigen::Index>(2 * n_sites);
  CMatrix m = CMatrix::Identity(dim, dim);
  auto put = [&](Eigen::Index i, Eigen::Index j, double c) {
    m(i, j) += cplx(0.0, c);
    m(j, i) -= cplx(0.0, c);
  };
  const double c1 = ((n_sites + total) % 2 == 0 ? 1.0 : -1.0) * std::pow(std::sin(2 * a), 2);
  const double c2 = std::cos(2 * a);
  put(0, dim - 1, c1);
  put(0, 1, c2);
  put(dim - 2, dim - 1, c2);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i + 1);  // 0-based site
    put(2 * k, 2 * k + 1, bits[i] == 0 ? 1.0 : -1.0);
  }
  return m;
}

/// <gamma_mu gamma_nu (n)> = sum_{ab} (u^n)_{mu a} (u^n)_{nu b} M0_{ab} for
/// each 1-based pair; result[p][n].
inline std::vector<std::vector<cplx>> two_point_series(const SingleParticleUnitary& sp,
                                                       const CMatrix& m0,
                                                       const std::vector<std::pair<int, int>>& pairs,
                                                       int depth) {
  if (depth < 1) throw ConfigError("two_point_series: depth must be >= 1");
  const Eigen::Index dim = sp.dim();
  for (auto [mu, nu] : pairs) {
    if (mu < 1 || nu < 1 || mu > dim || nu > dim) throw ConfigError("two_point_series: pair out of range");
  }
  std::vector<std::vector<cplx>> out(pairs.size(), std::vector<cplx>(static_cast<std::size_t>(depth)));
  Matrix power = Matrix::Identity(dim, dim);
  for (int n = 0; n < depth; ++n) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto row_mu = power.row(pairs[p].first - 1).cast<cplx>();
      const auto row_nu = power.row(pairs[p].second - 1).cast<cplx>();
      out[p][static_cast<std::size_t>(n)] = (row_mu * m0 * row_nu.transpose())(0, 0);
    }
    power = sp.u * power;
  }
  return out;
}

/// Conjugation by V(alpha) = exp(-alpha gamma_1 gamma_2N) on Majorana indices:
/// gamma_1 -> cos2a gamma_1 - sin2a gamma_2N, gamma_2N -> cos2a gamma_2N + sin2a gamma_1.
inline Matrix braid_rotation(double alpha, int n_sites) {
  const auto dim = static_cast<Eigen::Index>(2 * n_sites);
  Matrix r = Matrix::Identity(dim, dim);
  const double c = std::cos(2 * alpha);
  const double s = std::sin(2 * alpha);
  r(0, 0) = c;
  r(0, dim - 1) = -s;
  r(dim - 1, dim - 1) = c;
  r(dim - 1, 0) = s;
  return r;
}

}  // namespace ffsim
}  // namespace mflab
