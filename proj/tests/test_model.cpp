#include <gtest/gtest.h>

#include <random>

#include "mflab/ffsim.hpp"
#include "mflab/model.hpp"
#include "oracle.hpp"

using namespace mflab;

TEST(Angles, ParsesPiMultiplesAndRadians) {
  EXPECT_DOUBLE_EQ(parse_angle("pi/16"), kPi / 16);
  EXPECT_DOUBLE_EQ(parse_angle("3pi/8"), 3 * kPi / 8);
  EXPECT_DOUBLE_EQ(parse_angle("-3*pi/4"), -3 * kPi / 4);
  EXPECT_DOUBLE_EQ(parse_angle("pi"), kPi);
  EXPECT_DOUBLE_EQ(parse_angle("0.1*pi"), 0.1 * kPi);
  EXPECT_DOUBLE_EQ(parse_angle("2.5"), 2.5);
  EXPECT_DOUBLE_EQ(angle_from_json(nlohmann::json(0.25)), 0.25);
  EXPECT_DOUBLE_EQ(angle_from_json(nlohmann::json("pi/4")), kPi / 4);
  EXPECT_THROW(parse_angle("pie"), ConfigError);
  EXPECT_THROW(parse_angle(""), ConfigError);
}

TEST(ChainSpec, ValidatesLengthsAndFiniteness) {
  auto s = ChainSpec::uniform(4, 0.1, 0.2, 0.3);
  EXPECT_NO_THROW(s.validate());
  EXPECT_FALSE(s.is_free());
  s.xx_angle.pop_back();
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_THROW(ChainSpec::uniform(1, 0, 0).validate(), ConfigError);
  auto bad = ChainSpec::uniform(3, 0, 0);
  bad.z_angle[1] = std::nan("");
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(ChainSpec, JsonRoundTripAndUnknownKeys) {
  auto s = build_trivial_testbed(6, kPi / 16, kPi / 4);
  s.zz_angle[2] = 0.05;
  const nlohmann::json j = s;
  EXPECT_EQ(j.get<ChainSpec>(), s);

  const auto u = nlohmann::json::parse(R"({"n": 5, "z_angle": "pi/16", "xx_angle": 0.7853981633974483})");
  const auto parsed = u.get<ChainSpec>();
  EXPECT_EQ(parsed.n_sites, 5);
  EXPECT_DOUBLE_EQ(parsed.z_angle[4], kPi / 16);
  EXPECT_EQ(parsed.xx_angle.size(), 4u);
  EXPECT_TRUE(parsed.is_free());

  EXPECT_THROW(nlohmann::json::parse(R"({"n": 3, "zangle": 1})").get<ChainSpec>(), ConfigError);
  EXPECT_THROW(nlohmann::json::parse(R"({"n": 3, "xx_angle": [1, 2, 3]})").get<ChainSpec>(), ConfigError);
}

TEST(Schedule, AnglesFromSchedule) {
  auto s = angles_from_schedule({1.0, 0.5, 0.75, kPi, kPi / 8, 0.0}, 4);
  EXPECT_NEAR(s.z_angle[0], kPi / 16, 1e-15);
  EXPECT_NEAR(s.xx_angle[0], kPi / 4, 1e-15);
  EXPECT_EQ(s.zz_angle[0], 0.0);

  s = angles_from_schedule({1.0, 0.5, 0.75, 0.0, 0.0, 0.0}, 4);
  for (double a : s.z_angle) EXPECT_EQ(a, 0.0);
  for (double a : s.xx_angle) EXPECT_EQ(a, 0.0);

  s = angles_from_schedule({2.0, 1.0, 1.5, kPi / 2, kPi / 16, kPi / 32}, 10);
  EXPECT_NEAR(s.z_angle[9], kPi / 16, 1e-15);
  EXPECT_NEAR(s.xx_angle[8], kPi / 4, 1e-15);
  EXPECT_NEAR(s.zz_angle[0], kPi / 64, 1e-15);  // lambda (T - tau2) = pi/32 * 0.5

  EXPECT_THROW(angles_from_schedule({1.0, 0.8, 0.75, 1, 1, 0}, 4), ConfigError);
  EXPECT_THROW(angles_from_schedule({1.0, 0.5, 1.2, 1, 1, 0}, 4), ConfigError);
}

TEST(Schedule, LinearInCouplings) {
  const ProtocolSchedule a{1.3, 0.2, 0.9, 0.7, 1.1, 0.4};
  ProtocolSchedule b = a;
  b.J *= 2;
  b.h *= 2;
  b.lambda *= 2;
  const auto sa = angles_from_schedule(a, 3);
  const auto sb = angles_from_schedule(b, 3);
  EXPECT_NEAR(sb.z_angle[0], 2 * sa.z_angle[0], 1e-15);
  EXPECT_NEAR(sb.xx_angle[0], 2 * sa.xx_angle[0], 1e-15);
  EXPECT_NEAR(sb.zz_angle[0], 2 * sa.zz_angle[0], 1e-15);
}

TEST(Pauli, ProductPhases) {
  const auto x = PauliString::from_label("X");
  const auto y = PauliString::from_label("Y");
  EXPECT_EQ((x * y).label(), "+iZ");
  EXPECT_EQ((y * x).label(), "-iZ");
  const auto g1 = majorana_to_pauli({1, Rep::L}, 2);
  const auto g2 = majorana_to_pauli({2, Rep::L}, 2);
  EXPECT_EQ((g1 * g2).label(), "+iZI");
  EXPECT_THROW(PauliString::from_label("XY") * PauliString::from_label("X"), ConfigError);
}

TEST(Pauli, HermitianSquaresToIdentityAndProductIsAssociative) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> letter(0, 3), ph(0, 3);
  auto random_string = [&](int n) {
    PauliString p(static_cast<std::size_t>(n));
    for (auto& l : p.letters) l = static_cast<Pauli>(letter(rng));
    p.phase = static_cast<std::uint8_t>(ph(rng));
    return p;
  };
  for (int t = 0; t < 200; ++t) {
    auto a = random_string(5), b = random_string(5), c = random_string(5);
    EXPECT_EQ((a * b) * c, a * (b * c));
    a.phase &= 2;
    const auto sq = a * a;
    EXPECT_TRUE(sq.is_identity());
    EXPECT_EQ(sq.phase, 0);
  }
}

TEST(Pauli, ProductMatchesDenseMatrices) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> letter(0, 3);
  const std::string abc = "IXYZ";
  for (int t = 0; t < 50; ++t) {
    std::string la, lb;
    for (int k = 0; k < 3; ++k) {
      la += abc[static_cast<std::size_t>(letter(rng))];
      lb += abc[static_cast<std::size_t>(letter(rng))];
    }
    const auto p = PauliString::from_label(la) * PauliString::from_label(lb);
    const std::complex<double> phase[] = {1.0, {0, 1}, -1.0, {0, -1}};
    std::string letters = p.label().substr(p.phase % 2 ? 2 : 1);
    const oracle::CMat dense = phase[p.phase] * oracle::pauli(letters);
    EXPECT_LT((dense - oracle::pauli(la) * oracle::pauli(lb)).norm(), 1e-14);
    EXPECT_EQ(commutes(PauliString::from_label(la), PauliString::from_label(lb)),
              (oracle::pauli(la) * oracle::pauli(lb) - oracle::pauli(lb) * oracle::pauli(la)).norm() < 1e-12);
  }
}

TEST(JordanWigner, ExplicitStrings) {
  EXPECT_EQ(majorana_to_pauli({1, Rep::L}, 3).label(), "+XII");
  EXPECT_EQ(majorana_to_pauli({4, Rep::L}, 3).label(), "-ZYI");
  EXPECT_EQ(majorana_to_pauli({6, Rep::R}, 3).label(), "-IIX");
  EXPECT_EQ(majorana_to_pauli({1, Rep::R}, 3).label(), "+YZZ");
  EXPECT_THROW(majorana_to_pauli({0, Rep::L}, 3), ConfigError);
  EXPECT_THROW(majorana_to_pauli({7, Rep::R}, 3), ConfigError);
}

class JordanWignerDense : public ::testing::TestWithParam<int> {};

TEST_P(JordanWignerDense, CliffordAlgebraAndDefinitions) {
  const int n = GetParam();
  const auto d = 1 << n;
  for (Rep rep : {Rep::L, Rep::R}) {
    for (int mu = 1; mu <= 2 * n; ++mu) {
      const auto p = majorana_to_pauli({mu, rep}, n);
      EXPECT_TRUE(p.is_hermitian());
      const std::complex<double> phase = p.phase == 0 ? 1.0 : -1.0;
      const auto gm = oracle::majorana(mu, rep, n);
      EXPECT_LT((phase * oracle::pauli(p.label().substr(1)) - gm).norm(), 1e-14) << rep_name(rep) << mu;
      for (int nu = 1; nu <= 2 * n; ++nu) {
        const auto gn = oracle::majorana(nu, rep, n);
        const oracle::CMat anti = gm * gn + gn * gm;
        const oracle::CMat expect = mu == nu ? oracle::CMat(2.0 * oracle::CMat::Identity(d, d)) : oracle::CMat::Zero(d, d);
        EXPECT_LT((anti - expect).norm(), 1e-13);
      }
    }
  }
}

TEST_P(JordanWignerDense, RepresentationsDifferByParityString) {
  const int n = GetParam();
  for (int mu = 1; mu <= 2 * n; ++mu) {
    const auto p = majorana_to_pauli({mu, Rep::L}, n) * majorana_to_pauli({mu, Rep::R}, n);
    for (auto l : p.letters) EXPECT_EQ(l, Pauli::Z);
  }
}

INSTANTIATE_TEST_SUITE_P(Sizes, JordanWignerDense, ::testing::Values(2, 3, 4, 5));

TEST(TrivialTestbed, Layout) {
  const auto s = build_trivial_testbed(10, kPi / 16, kPi / 4);
  ASSERT_EQ(s.xx_angle.size(), 9u);
  EXPECT_EQ(s.xx_angle.front(), 0.0);
  EXPECT_EQ(s.xx_angle.back(), 0.0);
  for (std::size_t i = 1; i + 1 < s.xx_angle.size(); ++i) EXPECT_DOUBLE_EQ(s.xx_angle[i], kPi / 16);
  EXPECT_EQ(s.z_angle.front(), 0.0);
  EXPECT_EQ(s.z_angle.back(), 0.0);
  for (std::size_t i = 1; i + 1 < s.z_angle.size(); ++i) EXPECT_DOUBLE_EQ(s.z_angle[i], kPi / 4);

  const auto small = build_trivial_testbed(4, kPi / 16, kPi / 4);
  EXPECT_EQ(std::count_if(small.xx_angle.begin(), small.xx_angle.end(), [](double a) { return a != 0.0; }), 1);
  EXPECT_THROW(build_trivial_testbed(3, 0.1, 0.1), ConfigError);
}

TEST(TrivialTestbed, EdgeMajoranasConserved) {
  const int n = 4;
  const auto u = oracle::single_particle(build_trivial_testbed(n, kPi / 16, kPi / 4));
  for (int mu : {1, 2, 2 * n - 1, 2 * n}) {
    for (int nu = 1; nu <= 2 * n; ++nu) EXPECT_NEAR(u(mu - 1, nu - 1), mu == nu ? 1.0 : 0.0, 1e-12);
  }
}
