#include <gtest/gtest.h>

#include <random>

#include "mflab/ffsim.hpp"
#include "mflab/svsim.hpp"
#include "oracle.hpp"

using namespace mflab;
using namespace mflab::svsim;

namespace {

PauliString gamma(int mu, int n, Rep rep = Rep::L) { return majorana_to_pauli({mu, rep}, n); }

}  // namespace

TEST(States, PlusProductAndCorrelatorState) {
  const auto p = plus_product(2);
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(p.amp(i) - 0.5), 0.0, 1e-15);

  const auto z = correlator_state(3, 0.0, {0});
  EXPECT_NEAR(std::abs(z.amp(0)), 1.0, 1e-15);

  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    std::vector<int> bits{int(rng() & 1), int(rng() & 1), int(rng() & 1)};
    const auto s = correlator_state(5, kPi / 4, bits);
    for (int site : {1, 5}) {
      PauliString zs(5), ys(5);
      zs.letters[static_cast<std::size_t>(site - 1)] = Pauli::Z;
      ys.letters[static_cast<std::size_t>(site - 1)] = Pauli::Y;
      EXPECT_NEAR(hermitian_expectation(s, zs), 0.0, 1e-14);
      EXPECT_NEAR(hermitian_expectation(s, ys), 1.0, 1e-14);
    }
  }
  EXPECT_THROW(correlator_state(4, 0.1, {0}), ConfigError);
}

TEST(States, CapacityCap) {
  EXPECT_THROW(StateVector::basis(25, 0), CapacityError);
  EXPECT_THROW(plus_product(0), ConfigError);
}

TEST(Floquet, IdentityAndXXEigenstate) {
  const auto psi = StateVector::random(4, 7);
  auto s = psi;
  apply_floquet_cycle(s, ChainSpec::uniform(4, 0, 0));
  EXPECT_LT((s.amp - psi.amp).norm(), 1e-15);

  auto pp = plus_product(2);
  apply_floquet_cycle(pp, ChainSpec::uniform(2, 0, kPi / 4));
  const cplx overlap = plus_product(2).amp.dot(pp.amp);
  EXPECT_NEAR(std::abs(overlap), 1.0, 1e-14);
}

TEST(Floquet, MatchesDenseUnitary) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  for (int n = 2; n <= 5; ++n) {
    auto spec = oracle::random_free_spec(rng, n);
    for (auto& v : spec.zz_angle) v = a(rng);
    const auto psi = StateVector::random(n, 100 + n);
    auto s = psi;
    apply_floquet_cycle(s, spec);
    EXPECT_LT((s.amp - oracle::floquet(spec) * psi.amp).norm(), 1e-12);
    EXPECT_LT((floquet_matrix(spec) - oracle::floquet(spec)).norm(), 1e-12);
  }
}

TEST(Floquet, ConjugationMatchesSingleParticleMatrix) {
  std::mt19937_64 rng(31);
  for (int n = 2; n <= 6; ++n) {
    const auto spec = oracle::random_free_spec(rng, n);
    const auto u = ffsim::build_single_particle_unitary(spec).u;
    const CMatrix uf = floquet_matrix(spec);
    for (int mu = 1; mu <= 2 * n; ++mu) {
      CMatrix expect = CMatrix::Zero(uf.rows(), uf.cols());
      for (int nu = 1; nu <= 2 * n; ++nu) expect += u(mu - 1, nu - 1) * dense_pauli(gamma(nu, n));
      EXPECT_LT((uf.adjoint() * dense_pauli(gamma(mu, n)) * uf - expect).norm(), 1e-12);
    }
  }
}

TEST(Floquet, NormPreservedOverManyCycles) {
  auto s = StateVector::random(7, 3);
  const auto spec = ChainSpec::uniform(7, 0.31, 0.77, 0.12);
  for (int t = 0; t < 100; ++t) apply_floquet_cycle(s, spec);
  EXPECT_NEAR(s.norm(), 1.0, 1e-12);
}

TEST(Expectation, BasicValues) {
  EXPECT_NEAR(hermitian_expectation(plus_product(1), PauliString::from_label("X")), 1.0, 1e-15);
  const int n = 5;
  const auto psi0 = plus_product(n);
  for (int mu = 1; mu <= 2 * n; ++mu) EXPECT_NEAR(hermitian_expectation(psi0, gamma(mu, n)), mu == 1 ? 1.0 : 0.0, 1e-14);
  for (double a : {0.0, kPi / 8, 0.4}) {
    const auto s = correlator_state(n, a, {1, 0, 1});
    const cplx v = pauli_expectation(s, gamma(1, n) * gamma(2, n));
    EXPECT_LT(std::abs(v - cplx(0, std::cos(2 * a))), 1e-14);
  }
  EXPECT_THROW(hermitian_expectation(psi0, PauliString::from_label("+iXIIII")), ConfigError);
}

TEST(Expectation, MatchesDenseOnRandomStrings) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> l(0, 3);
  const std::string abc = "IXYZ";
  for (int t = 0; t < 30; ++t) {
    const int n = 1 + t % 5;
    std::string s;
    for (int k = 0; k < n; ++k) s += abc[static_cast<std::size_t>(l(rng))];
    const auto psi = StateVector::random(n, static_cast<std::uint64_t>(t));
    const auto v = pauli_expectation(psi, PauliString::from_label(s));
    EXPECT_LT(std::abs(v - oracle::expect(psi.amp, oracle::pauli(s))), 1e-13);
  }
}

TEST(Series, DepthOneAndFfsimAgreement) {
  const int n = 10;
  const auto spec = ChainSpec::uniform(n, kPi / 8, kPi / 4);
  const auto one = observable_series(spec, plus_product(n), {gamma(1, n)}, 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_NEAR(one[0][0].real(), 1.0, 1e-14);

  std::vector<PauliString> obs;
  for (int mu = 1; mu <= 2 * n; ++mu) obs.push_back(gamma(mu, n));
  const auto sv = observable_series(spec, plus_product(n), obs, 20);
  const auto ff = ffsim::heisenberg_series(ffsim::build_single_particle_unitary(spec),
                                           ffsim::plus_state_moments(n, Rep::L), 20);
  for (int t = 0; t < 20; ++t) {
    for (int mu = 0; mu < 2 * n; ++mu) EXPECT_NEAR(sv[t][mu].real(), ff[t](mu), 1e-10);
  }

  const auto damped = observable_series(spec, plus_product(n), obs, 20, NoiseModel{0.0328});
  for (int t = 0; t < 20; ++t) {
    for (int mu = 0; mu < 2 * n; ++mu) EXPECT_NEAR(damped[t][mu].real(), sv[t][mu].real() * std::exp(-0.0328 * t), 1e-14);
  }
  EXPECT_THROW(NoiseModel{-0.1}.validate(), ConfigError);
}

TEST(Shots, DeterministicOutcomeAndBinomialBound) {
  const auto plus = plus_product(1);
  const auto x = PauliString::from_label("X");
  for (long shots : {1L, 17L, 8192L}) EXPECT_EQ(sample_shots(plus, x, shots, 5), 1.0);
  const auto zero = StateVector::basis(1, 0);
  int inside = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) inside += std::abs(sample_shots(zero, x, 8192, seed)) <= 4 / std::sqrt(8192.0);
  EXPECT_GE(inside, 199);
  EXPECT_EQ(sample_shots(zero, x, 100, 42), sample_shots(zero, x, 100, 42));
  EXPECT_THROW(sample_shots(zero, PauliString::from_label("+iX"), 10, 1), ConfigError);
  EXPECT_THROW(sample_shots(zero, x, 0, 1), ConfigError);
}

TEST(Braid, IdentityAndConjugation) {
  const int n = 3;
  auto s = StateVector::random(n, 9);
  const auto before = s;
  apply_braid_unitary(s, 0.0);
  EXPECT_LT((s.amp - before.amp).norm(), 1e-15);

  for (double alpha : {0.3, kPi / 8, 1.1}) {
    const CMatrix v = [&] {
      CMatrix m(8, 8);
      for (Eigen::Index i = 0; i < 8; ++i) {
        auto b = StateVector::basis(n, static_cast<std::uint64_t>(i));
        apply_braid_unitary(b, alpha);
        m.col(i) = b.amp;
      }
      return m;
    }();
    const auto r = ffsim::braid_rotation(alpha, n);
    for (int mu = 1; mu <= 2 * n; ++mu) {
      CMatrix expect = CMatrix::Zero(8, 8);
      for (int nu = 1; nu <= 2 * n; ++nu) expect += r(mu - 1, nu - 1) * dense_pauli(gamma(nu, n));
      EXPECT_LT((v.adjoint() * dense_pauli(gamma(mu, n)) * v - expect).norm(), 1e-12);
    }
  }

  auto h = StateVector::random(n, 10);
  auto direct = apply_pauli(h, gamma(1, n) * gamma(2 * n, n));
  apply_braid_unitary(h, kPi / 2);
  EXPECT_LT((h.amp + direct.amp).norm(), 1e-14);
}

TEST(Residual, ExactModeIdentityAndCap) {
  const auto spec = ChainSpec::uniform(4, kPi / 16, kPi / 4);
  EXPECT_NEAR(operator_residual(spec, {{1.0, PauliString(4)}}, 0.0), 0.0, 1e-14);
  const auto modes = ffsim::eigenmodes(ffsim::build_single_particle_unitary(spec));
  for (const auto& m : modes.modes) {
    EXPECT_LT(operator_residual(spec, majorana_operator(m.psi), m.omega), 1e-10);
  }
  EXPECT_THROW(operator_residual(ChainSpec::uniform(9, 0.1, 0.1), {{1.0, PauliString(9)}}, 0.0), CapacityError);
}

TEST(Residual, GrowsWithInteraction) {
  const int n = 6;
  auto spec = ChainSpec::uniform(n, kPi / 16, kPi / 4);
  const auto modes = ffsim::eigenmodes(ffsim::build_single_particle_unitary(spec));
  const auto& mode = modes.modes.back();
  double prev = operator_residual(spec, majorana_operator(mode.psi), mode.omega);
  EXPECT_LE(prev, 1e-10);
  for (double phi : {kPi / 32, kPi / 16, kPi / 8}) {
    spec.zz_angle.assign(n - 1, phi);
    const double r = operator_residual(spec, majorana_operator(mode.psi), mode.omega);
    EXPECT_GT(r, prev);
    prev = r;
  }
}

TEST(TransferMatrix, IdentityAndOrthogonality) {
  const auto id = pauli_transfer_matrix(ChainSpec::uniform(2, 0, 0));
  EXPECT_LT((id.e - Matrix::Identity(16, 16)).norm(), 1e-14);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  for (int n : {2, 3}) {
    const auto rep = pauli_transfer_matrix(ChainSpec::uniform(n, a(rng), a(rng), a(rng)));
    EXPECT_LE(rep.orthogonality, 1e-10);
    EXPECT_LE(rep.max_imag, 1e-10);
    EXPECT_TRUE(rep.ok()) << rep.eigen_residual << " " << rep.trace_residual;
  }
  EXPECT_THROW(pauli_transfer_matrix(ChainSpec::uniform(4, 0, 0)), CapacityError);
}

TEST(TransferMatrix, SingleMajoranaSectorReproducesFreeModes) {
  std::mt19937_64 rng(41);
  for (int n : {2, 3}) {
    const auto spec = oracle::random_free_spec(rng, n);
    const auto rep = pauli_transfer_matrix(spec);
    const auto modes = ffsim::eigenmodes(ffsim::build_single_particle_unitary(spec));
    for (const auto& m : modes.modes) {
      const CVector v = majorana_pauli_vector(m.psi, n);
      // The free mode is an eigenoperator: its Pauli vector sits inside B_omega.
      EXPECT_LT((eigen_projection(rep, m.omega, v, 1e-7) - v).norm(), 1e-8);
    }
  }
}

TEST(TransferMatrix, FourierAverageConvergesToProjection) {
  // The rate is ~1/(D gap); this spec keeps every other eigenphase >= 0.16 from 0 and pi.
  const auto spec = ChainSpec::uniform(3, 0.77, 0.88, 0.34);
  const auto rep = pauli_transfer_matrix(spec);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  CVector v(64);
  for (Eigen::Index i = 0; i < 64; ++i) v(i) = g(rng);
  v.normalize();
  for (double omega : {0.0, kPi}) {
    const CVector target = eigen_projection(rep, omega, v);
    for (int depth : {100, 1000, 10000}) {
      EXPECT_LE((fourier_channel_average(rep.e, omega, v, depth) - target).norm(), 10.0 / depth);
    }
  }
}
