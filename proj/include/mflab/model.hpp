#pragma once

// Chain parameters, Pauli-string algebra and the two Jordan-Wigner
// encodings of Majorana operators used throughout the library.
//
// Angle naming: z_angle is the single-qubit Z rotation, xx_angle the XX
// coupling and zz_angle the ZZ interaction. Majorana indices are 1-based
// on every public interface.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mflab/error.hpp"

namespace mflab {

inline constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Angles
// ---------------------------------------------------------------------------

/// Parses "pi/16", "3pi/8", "-3*pi/4", "pi", "2.5", "0.1*pi".
inline double parse_angle(std::string_view text) {
  std::string s;
  for (char c : text) {
    if (c != ' ') s.push_back(c);
  }
  if (s.empty()) throw ConfigError("empty angle string");

  auto to_number = [&](const std::string& part) -> double {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(part, &used);
    } catch (const std::exception&) {
      throw ConfigError("malformed angle '" + std::string(text) + "'");
    }
    if (used != part.size()) throw ConfigError("malformed angle '" + std::string(text) + "'");
    return v;
  };

  const auto pos = s.find("pi");
  if (pos == std::string::npos) return to_number(s);

  std::string coeff = s.substr(0, pos);
  std::string rest = s.substr(pos + 2);
  if (!coeff.empty() && coeff.back() == '*') coeff.pop_back();
  double value = kPi;
  if (coeff == "-") {
    value = -kPi;
  } else if (coeff == "+" || coeff.empty()) {
    value = kPi;
  } else {
    value = to_number(coeff) * kPi;
  }
  if (!rest.empty()) {
    if (rest.front() != '/') throw ConfigError("malformed angle '" + std::string(text) + "'");
    const double den = to_number(rest.substr(1));
    if (den == 0.0) throw ConfigError("zero denominator in angle '" + std::string(text) + "'");
    value /= den;
  }
  return value;
}

inline double angle_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_angle(j.get<std::string>());
  throw ConfigError("angle must be a number or a string like \"pi/16\"");
}

// ---------------------------------------------------------------------------
// ChainSpec / ProtocolSchedule
// ---------------------------------------------------------------------------

/// One Floquet model instance. Angles are stored per site / per bond and are
/// never reduced modulo 2pi.
struct ChainSpec {
  int n_sites = 0;
  std::vector<double> z_angle;   // length n_sites
  std::vector<double> xx_angle;  // length n_sites - 1
  std::vector<double> zz_angle;  // length n_sites - 1

  static ChainSpec uniform(int n, double z, double xx, double zz = 0.0) {
    if (n < 2) throw ConfigError("chain needs n_sites >= 2, got " + std::to_string(n));
    ChainSpec spec;
    spec.n_sites = n;
    spec.z_angle.assign(static_cast<std::size_t>(n), z);
    spec.xx_angle.assign(static_cast<std::size_t>(n - 1), xx);
    spec.zz_angle.assign(static_cast<std::size_t>(n - 1), zz);
    spec.validate();
    return spec;
  }

  void validate() const {
    if (n_sites < 2) throw ConfigError("chain needs n_sites >= 2, got " + std::to_string(n_sites));
    const auto n = static_cast<std::size_t>(n_sites);
    if (z_angle.size() != n) throw ConfigError("z_angle must have length n");
    if (xx_angle.size() != n - 1) throw ConfigError("xx_angle must have length n-1");
    if (zz_angle.size() != n - 1) throw ConfigError("zz_angle must have length n-1");
    for (const auto* arr : {&z_angle, &xx_angle, &zz_angle}) {
      for (double a : *arr) {
        if (!std::isfinite(a)) throw ConfigError("angles must be finite");
      }
    }
  }

  [[nodiscard]] std::size_t majorana_count() const { return 2 * static_cast<std::size_t>(n_sites); }

  [[nodiscard]] bool is_free() const {
    for (double a : zz_angle) {
      if (a != 0.0) return false;
    }
    return true;
  }

  /// True when the angle profile reads the same from both ends.
  [[nodiscard]] bool is_reflection_symmetric(double tol = 1e-14) const {
    const auto n = z_angle.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(z_angle[i] - z_angle[n - 1 - i]) > tol) return false;
    }
    const auto b = xx_angle.size();
    for (std::size_t i = 0; i < b; ++i) {
      if (std::abs(xx_angle[i] - xx_angle[b - 1 - i]) > tol) return false;
      if (std::abs(zz_angle[i] - zz_angle[b - 1 - i]) > tol) return false;
    }
    return true;
  }

  bool operator==(const ChainSpec&) const = default;
};

struct ProtocolSchedule {
  double period = 1.0;
  double tau1 = 0.5;
  double tau2 = 0.75;
  double J = 0.0;
  double h = 0.0;
  double lambda = 0.0;
};

/// Z rotation = h*tau1, XX = J*(tau2 - tau1), ZZ = lambda*(T - tau2).
inline ChainSpec angles_from_schedule(const ProtocolSchedule& s, int n_sites) {
  if (!(0.0 < s.tau1 && s.tau1 < s.tau2 && s.tau2 < s.period)) {
    throw ConfigError("schedule requires 0 < tau1 < tau2 < T");
  }
  return ChainSpec::uniform(n_sites, s.h * s.tau1, s.J * (s.tau2 - s.tau1),
                            s.lambda * (s.period - s.tau2));
}

/// Boundary qubits decoupled: first/last XX bond and first/last Z angle are
/// zero, so gamma_1, gamma_2, gamma_{2N-1}, gamma_{2N} are conserved.
inline ChainSpec build_trivial_testbed(int n_sites, double bulk_xx, double bulk_z) {
  if (n_sites < 4) throw ConfigError("trivial testbed needs n_sites >= 4");
  ChainSpec spec = ChainSpec::uniform(n_sites, bulk_z, bulk_xx, 0.0);
  spec.xx_angle.front() = 0.0;
  spec.xx_angle.back() = 0.0;
  spec.z_angle.front() = 0.0;
  spec.z_angle.back() = 0.0;
  return spec;
}

namespace detail {

inline nlohmann::json angles_to_json(const std::vector<double>& v) {
  bool uniform = true;
  for (double a : v) uniform = uniform && a == v.front();
  if (uniform && !v.empty()) return v.front();
  return v;
}

inline std::vector<double> angles_from_json(const nlohmann::json& j, std::size_t len,
                                            const char* key) {
  if (j.is_array()) {
    if (j.size() != len) {
      throw ConfigError(std::string(key) + " array must have length " + std::to_string(len));
    }
    std::vector<double> out;
    out.reserve(len);
    for (const auto& e : j) out.push_back(angle_from_json(e));
    return out;
  }
  return std::vector<double>(len, angle_from_json(j));
}

}  // namespace detail

inline void to_json(nlohmann::json& j, const ChainSpec& spec) {
  j = nlohmann::json{{"n", spec.n_sites},
                     {"z_angle", detail::angles_to_json(spec.z_angle)},
                     {"xx_angle", detail::angles_to_json(spec.xx_angle)},
                     {"zz_angle", detail::angles_to_json(spec.zz_angle)}};
}

inline void from_json(const nlohmann::json& j, ChainSpec& spec) {
  if (!j.is_object()) throw ConfigError("spec must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (key != "n" && key != "z_angle" && key != "xx_angle" && key != "zz_angle") {
      throw ConfigError("unknown spec key '" + key + "'");
    }
  }
  if (!j.contains("n") || !j.at("n").is_number_integer()) {
    throw ConfigError("spec.n must be an integer");
  }
  const int n = j.at("n").get<int>();
  if (n < 2) throw ConfigError("spec.n must be >= 2");
  const auto sn = static_cast<std::size_t>(n);
  spec.n_sites = n;
  spec.z_angle = detail::angles_from_json(j.value("z_angle", nlohmann::json(0.0)), sn, "z_angle");
  spec.xx_angle =
      detail::angles_from_json(j.value("xx_angle", nlohmann::json(0.0)), sn - 1, "xx_angle");
  spec.zz_angle =
      detail::angles_from_json(j.value("zz_angle", nlohmann::json(0.0)), sn - 1, "zz_angle");
  spec.validate();
}

// ---------------------------------------------------------------------------
// Pauli strings
// ---------------------------------------------------------------------------

enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

inline char pauli_char(Pauli p) {
  constexpr std::array<char, 4> chars{'I', 'X', 'Y', 'Z'};
  return chars[static_cast<std::size_t>(p)];
}

/// phase is the exponent k of i^k, so 0:+1, 1:+i, 2:-1, 3:-i.
struct PauliString {
  std::uint8_t phase = 0;
  std::vector<Pauli> letters;

  PauliString() = default;
  explicit PauliString(std::size_t n) : letters(n, Pauli::I) {}

  static PauliString from_label(std::string_view label) {
    PauliString p;
    std::size_t i = 0;
    if (label.starts_with("+i")) { p.phase = 1; i = 2; }
    else if (label.starts_with("-i")) { p.phase = 3; i = 2; }
    else if (label.starts_with('+')) { i = 1; }
    else if (label.starts_with('-')) { p.phase = 2; i = 1; }
    for (; i < label.size(); ++i) {
      switch (label[i]) {
        case 'I': p.letters.push_back(Pauli::I); break;
        case 'X': p.letters.push_back(Pauli::X); break;
        case 'Y': p.letters.push_back(Pauli::Y); break;
        case 'Z': p.letters.push_back(Pauli::Z); break;
        default: throw ConfigError("bad Pauli label '" + std::string(label) + "'");
      }
    }
    return p;
  }

  [[nodiscard]] std::size_t size() const { return letters.size(); }
  [[nodiscard]] bool is_hermitian() const { return phase % 2 == 0; }
  [[nodiscard]] bool is_identity() const {
    for (Pauli l : letters) {
      if (l != Pauli::I) return false;
    }
    return true;
  }

  [[nodiscard]] std::string label() const {
    static constexpr std::array<const char*, 4> prefix{"+", "+i", "-", "-i"};
    std::string s = prefix[phase & 3u];
    for (Pauli l : letters) s.push_back(pauli_char(l));
    return s;
  }

  PauliString& scale_phase(int k) {
    phase = static_cast<std::uint8_t>((phase + k % 4 + 4) & 3u);
    return *this;
  }

  bool operator==(const PauliString&) const = default;
};

namespace detail {

// Single-site product a*b = i^k c. Returns (k, c).
inline std::pair<int, Pauli> site_product(Pauli a, Pauli b) {
  if (a == Pauli::I) return {0, b};
  if (b == Pauli::I) return {0, a};
  if (a == b) return {0, Pauli::I};
  const int ia = static_cast<int>(a);
  const int ib = static_cast<int>(b);
  const auto c = static_cast<Pauli>(6 - ia - ib);
  // cyclic X->Y->Z gives +i
  const bool cyclic = (ib - ia + 3) % 3 == 1;
  return {cyclic ? 1 : 3, c};
}

}  // namespace detail

inline PauliString pauli_product(const PauliString& a, const PauliString& b) {
  if (a.size() != b.size()) throw ConfigError("pauli_product: length mismatch");
  PauliString out(a.size());
  int k = a.phase + b.phase;
  for (std::size_t i = 0; i < a.size(); ++i) {
    auto [dk, c] = detail::site_product(a.letters[i], b.letters[i]);
    k += dk;
    out.letters[i] = c;
  }
  out.phase = static_cast<std::uint8_t>(k & 3);
  return out;
}

inline PauliString operator*(const PauliString& a, const PauliString& b) {
  return pauli_product(a, b);
}

/// Two strings commute iff they anticommute on an even number of sites.
inline bool commutes(const PauliString& a, const PauliString& b) {
  if (a.size() != b.size()) throw ConfigError("commutes: length mismatch");
  int anti = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Pauli x = a.letters[i];
    const Pauli y = b.letters[i];
    if (x != Pauli::I && y != Pauli::I && x != y) ++anti;
  }
  return anti % 2 == 0;
}

// ---------------------------------------------------------------------------
// Majorana operators
// ---------------------------------------------------------------------------

enum class Rep : std::uint8_t { L, R };

inline const char* rep_name(Rep r) { return r == Rep::L ? "L" : "R"; }

struct MajoranaLabel {
  int index = 1;  // 1..2N
  Rep rep = Rep::L;
};

/// Jordan-Wigner string for gamma^rep_index.
///   L: gamma_{2k-1} = prod_{i<k}(-Z_i) X_k,  gamma_{2k} = prod_{i<k}(-Z_i) Y_k
///   R: gamma_{2k-1} = prod_{i>k}(-Z_i) Y_k,  gamma_{2k} = -prod_{i>k}(-Z_i) X_k
inline PauliString majorana_to_pauli(MajoranaLabel label, int n_sites) {
  if (n_sites < 1) throw ConfigError("n_sites must be positive");
  if (label.index < 1 || label.index > 2 * n_sites) {
    throw ConfigError("Majorana index " + std::to_string(label.index) + " out of range 1.." +
                      std::to_string(2 * n_sites));
  }
  const int k = (label.index + 1) / 2;  // 1-based site
  const bool odd = label.index % 2 == 1;
  PauliString p(static_cast<std::size_t>(n_sites));
  int minus_signs = 0;
  if (label.rep == Rep::L) {
    for (int i = 1; i < k; ++i) {
      p.letters[static_cast<std::size_t>(i - 1)] = Pauli::Z;
      ++minus_signs;
    }
    p.letters[static_cast<std::size_t>(k - 1)] = odd ? Pauli::X : Pauli::Y;
  } else {
    for (int i = k + 1; i <= n_sites; ++i) {
      p.letters[static_cast<std::size_t>(i - 1)] = Pauli::Z;
      ++minus_signs;
    }
    p.letters[static_cast<std::size_t>(k - 1)] = odd ? Pauli::Y : Pauli::X;
    if (!odd) ++minus_signs;
  }
  p.phase = static_cast<std::uint8_t>((minus_signs % 2) * 2);
  return p;
}

}  // namespace mflab
