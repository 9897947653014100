#pragma once

// Gate-level compilation. Every rotation gate is exp(-i angle P) with P the
// Pauli word named by the gate, its first letter on the first listed qubit:
//   RYX q=[j, j+1], angle  pi/4  ->  U^{YX}_j = exp(-i pi/4 Y_j X_{j+1})
//   RXY q=[j, j+1], angle -pi/4  ->  U^{XY}_j = exp(+i pi/4 X_j Y_{j+1})
// G = H S^dag. Sites are 1-based.

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mflab/error.hpp"
#include "mflab/model.hpp"
#include "mflab/svsim.hpp"

namespace mflab::circuits {

enum class GateKind { RZ, RXX, RZZ, RYX, RXY, RYY, G };

inline const char* gate_name(GateKind k) {
  switch (k) {
    case GateKind::RZ: return "rz";
    case GateKind::RXX: return "rxx";
    case GateKind::RZZ: return "rzz";
    case GateKind::RYX: return "ryx";
    case GateKind::RXY: return "rxy";
    case GateKind::RYY: return "ryy";
    case GateKind::G: return "g";
  }
  return "?";
}

inline GateKind parse_gate_kind(std::string_view s) {
  for (GateKind k : {GateKind::RZ, GateKind::RXX, GateKind::RZZ, GateKind::RYX, GateKind::RXY, GateKind::RYY,
                     GateKind::G}) {
    if (s == gate_name(k)) return k;
  }
  throw ConfigError("unknown gate '" + std::string(s) + "'");
}

inline int arity(GateKind k) { return (k == GateKind::RZ || k == GateKind::G) ? 1 : 2; }

struct Gate {
  GateKind kind = GateKind::RZ;
  std::vector<int> q;
  double angle = 0.0;  // unused for G

  bool operator==(const Gate&) const = default;
};

struct Measurement {
  int q = 1;
  Pauli basis = Pauli::Z;

  bool operator==(const Measurement&) const = default;
};

struct Circuit {
  int n_sites = 0;
  std::vector<Gate> gates;
  std::optional<Measurement> measure;
  int sign = 1;
  std::string label;

  bool operator==(const Circuit&) const = default;

  void validate() const {
    if (n_sites < 1) throw ConfigError("circuit: n_sites must be positive");
    for (const auto& g : gates) {
      if (static_cast<int>(g.q.size()) != arity(g.kind)) throw ConfigError(std::string("circuit: wrong arity for ") + gate_name(g.kind));
      for (int q : g.q) {
        if (q < 1 || q > n_sites) throw ConfigError("circuit: gate site out of range");
      }
      if (g.q.size() == 2 && g.q[0] == g.q[1]) throw ConfigError("circuit: two-qubit gate on one site");
      if ((g.kind == GateKind::RYX || g.kind == GateKind::RXY) && std::abs(std::abs(g.angle) - kPi / 4) > 1e-12) {
        throw ConfigError("circuit: ryx/rxy angles are fixed at +-pi/4");
      }
    }
    if (measure && (measure->q < 1 || measure->q > n_sites || measure->basis == Pauli::I)) {
      throw ConfigError("circuit: bad measurement");
    }
    if (sign != 1 && sign != -1) throw ConfigError("circuit: sign must be +-1");
  }

  Circuit& append(const Circuit& other) {
    if (other.n_sites != n_sites) throw ConfigError("circuit: cannot append fragments of different width");
    gates.insert(gates.end(), other.gates.begin(), other.gates.end());
    if (other.measure) {
      measure = other.measure;
      sign = other.sign;
      label = other.label;
    }
    return *this;
  }
};

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

/// Per cycle: N RZ, N-1 RXX, then N-1 RZZ when any zz angle is nonzero.
inline Circuit compile_evolution(const ChainSpec& spec, int cycles) {
  spec.validate();
  if (cycles < 0) throw ConfigError("compile_evolution: cycles must be >= 0");
  Circuit c;
  c.n_sites = spec.n_sites;
  const bool zz = !spec.is_free();
  for (int t = 0; t < cycles; ++t) {
    for (int k = 1; k <= spec.n_sites; ++k) c.gates.push_back({GateKind::RZ, {k}, spec.z_angle[static_cast<std::size_t>(k - 1)]});
    for (int k = 1; k < spec.n_sites; ++k) {
      c.gates.push_back({GateKind::RXX, {k, k + 1}, spec.xx_angle[static_cast<std::size_t>(k - 1)]});
    }
    if (zz) {
      for (int k = 1; k < spec.n_sites; ++k) {
        c.gates.push_back({GateKind::RZZ, {k, k + 1}, spec.zz_angle[static_cast<std::size_t>(k - 1)]});
      }
    }
  }
  return c;
}

namespace detail {

inline int parity_sign(int k) { return (k % 2 == 0) ? 1 : -1; }

// Mirror a 1-based site for the right-anchored strings.
inline int site(int j, int n, bool mirror) { return mirror ? n + 1 - j : j; }

}  // namespace detail

/// Unwinds the Z string of gamma^rep_mu onto the anchor qubit (1 for L, N for R).
inline Circuit compile_majorana_measurement(MajoranaLabel label, int n_sites) {
  (void)majorana_to_pauli(label, n_sites);  // range check
  Circuit c;
  c.n_sites = n_sites;
  c.label = std::string("gamma^") + rep_name(label.rep) + "_" + std::to_string(label.index);
  const int k = (label.index + 1) / 2;
  const bool odd = label.index % 2 == 1;
  if (label.rep == Rep::L) {
    for (int j = k - 1; j >= 1; --j) {
      if (odd) c.gates.push_back({GateKind::RYX, {j, j + 1}, kPi / 4});
      else c.gates.push_back({GateKind::RXY, {j, j + 1}, -kPi / 4});
    }
    c.measure = Measurement{1, odd ? Pauli::X : Pauli::Y};
    c.sign = detail::parity_sign(k - 1);
  } else {
    // gamma^R_{2k-1} ~ Y_k string, gamma^R_{2k} ~ -X_k string, unwound from site N.
    const int km = n_sites + 1 - k;
    for (int j = km - 1; j >= 1; --j) {
      const int a = detail::site(j, n_sites, true);
      const int b = detail::site(j + 1, n_sites, true);
      if (odd) c.gates.push_back({GateKind::RXY, {a, b}, -kPi / 4});
      else c.gates.push_back({GateKind::RYX, {a, b}, kPi / 4});
    }
    c.measure = Measurement{n_sites, odd ? Pauli::Y : Pauli::X};
    c.sign = odd ? detail::parity_sign(km - 1) : -detail::parity_sign(km - 1);
  }
  return c;
}

/// <i gamma_1 gamma_2k> = sign * <Y_1> after G_1 and the U^{XY} chain.
inline Circuit compile_pair_measurement(int k, int n_sites) {
  if (k < 2 || k > n_sites) throw ConfigError("compile_pair_measurement: k must satisfy 2 <= k <= N");
  Circuit c;
  c.n_sites = n_sites;
  c.label = "i*gamma^L_1*gamma^L_" + std::to_string(2 * k);
  c.gates.push_back({GateKind::G, {1}, 0.0});
  for (int j = k - 1; j >= 1; --j) c.gates.push_back({GateKind::RXY, {j, j + 1}, -kPi / 4});
  c.measure = Measurement{1, Pauli::Y};
  c.sign = detail::parity_sign(k - 1);
  return c;
}

/// exp(-alpha gamma_1 gamma_2N): the U^{XY} chain carries Y_2 out to the
/// string ending on site N, a YY rotation on (1, 2) acts, and the chain is undone.
inline Circuit compile_braid_unitary(double alpha, int n_sites) {
  if (n_sites < 2) throw ConfigError("compile_braid_unitary: n_sites must be >= 2");
  Circuit c;
  c.n_sites = n_sites;
  c.label = "braid";
  for (int j = n_sites - 1; j >= 2; --j) c.gates.push_back({GateKind::RXY, {j, j + 1}, -kPi / 4});
  c.gates.push_back({GateKind::RYY, {1, 2}, (n_sites % 2 == 0 ? 1.0 : -1.0) * alpha});
  for (int j = 2; j <= n_sites - 1; ++j) c.gates.push_back({GateKind::RXY, {j, j + 1}, kPi / 4});
  return c;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

inline PauliString gate_word(const Gate& g, int n_sites) {
  PauliString p(static_cast<std::size_t>(n_sites));
  auto put = [&](int q, Pauli l) { p.letters[static_cast<std::size_t>(q - 1)] = l; };
  switch (g.kind) {
    case GateKind::RZ: put(g.q[0], Pauli::Z); break;
    case GateKind::RXX: put(g.q[0], Pauli::X); put(g.q[1], Pauli::X); break;
    case GateKind::RZZ: put(g.q[0], Pauli::Z); put(g.q[1], Pauli::Z); break;
    case GateKind::RYX: put(g.q[0], Pauli::Y); put(g.q[1], Pauli::X); break;
    case GateKind::RXY: put(g.q[0], Pauli::X); put(g.q[1], Pauli::Y); break;
    case GateKind::RYY: put(g.q[0], Pauli::Y); put(g.q[1], Pauli::Y); break;
    case GateKind::G: throw ConfigError("G is not a Pauli rotation");
  }
  return p;
}

namespace detail {

inline void apply_single(svsim::StateVector& s, int q, const Eigen::Matrix2cd& m) {
  const std::uint64_t bit = std::uint64_t{1} << (q - 1);
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    const auto u = static_cast<std::uint64_t>(i);
    if (u & bit) continue;
    const auto j = static_cast<Eigen::Index>(u | bit);
    const cplx a = s.amp(i);
    const cplx b = s.amp(j);
    s.amp(i) = m(0, 0) * a + m(0, 1) * b;
    s.amp(j) = m(1, 0) * a + m(1, 1) * b;
  }
}

inline Eigen::Matrix2cd g_matrix() {
  Eigen::Matrix2cd m;
  const double r = 1.0 / std::sqrt(2.0);
  m << cplx(r, 0), cplx(0, -r), cplx(r, 0), cplx(0, r);
  return m;
}

}  // namespace detail

inline void simulate(const Circuit& c, svsim::StateVector& s) {
  c.validate();
  if (c.n_sites != s.n_sites) throw ConfigError("simulate: circuit width does not match state");
  for (const auto& g : c.gates) {
    if (g.kind == GateKind::G) detail::apply_single(s, g.q[0], detail::g_matrix());
    else svsim::apply_rotation(s, gate_word(g, c.n_sites), g.angle);
  }
}

inline PauliString measured_observable(const Circuit& c) {
  if (!c.measure) throw ConfigError("circuit has no measurement");
  PauliString p(static_cast<std::size_t>(c.n_sites));
  p.letters[static_cast<std::size_t>(c.measure->q - 1)] = c.measure->basis;
  return p;
}

/// sign * <basis_q> on the state after the gates.
inline double measurement_expectation(const Circuit& c, const svsim::StateVector& s) {
  svsim::StateVector t = s;
  simulate(c, t);
  return c.sign * svsim::hermitian_expectation(t, measured_observable(c));
}

inline double measurement_estimate(const Circuit& c, const svsim::StateVector& s, long shots, std::uint64_t seed) {
  svsim::StateVector t = s;
  simulate(c, t);
  return c.sign * svsim::sample_shots(t, measured_observable(c), shots, seed);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

enum class Format { Json, QasmLike };

inline Format parse_format(std::string_view s) {
  if (s == "json") return Format::Json;
  if (s == "qasm_like") return Format::QasmLike;
  throw ConfigError("unknown circuit format '" + std::string(s) + "'");
}

inline nlohmann::json to_json(const Circuit& c) {
  nlohmann::json gates = nlohmann::json::array();
  for (const auto& g : c.gates) {
    nlohmann::json j{{"g", gate_name(g.kind)}, {"q", g.q}};
    if (g.kind != GateKind::G) j["angle"] = g.angle;
    gates.push_back(std::move(j));
  }
  nlohmann::json out{{"n", c.n_sites}, {"gates", std::move(gates)}, {"sign", c.sign}, {"label", c.label}};
  if (c.measure) out["measure"] = {{"q", c.measure->q}, {"basis", std::string(1, pauli_char(c.measure->basis))}};
  return out;
}

inline Circuit circuit_from_json(const nlohmann::json& j) {
  for (const auto& [key, _] : j.items()) {
    if (key != "n" && key != "gates" && key != "measure" && key != "sign" && key != "label") {
      throw ConfigError("circuit json: unknown key '" + key + "'");
    }
  }
  Circuit c;
  c.n_sites = j.at("n").get<int>();
  for (const auto& g : j.at("gates")) {
    Gate gate;
    gate.kind = parse_gate_kind(g.at("g").get<std::string>());
    gate.q = g.at("q").get<std::vector<int>>();
    if (g.contains("angle")) gate.angle = g.at("angle").get<double>();
    c.gates.push_back(std::move(gate));
  }
  if (j.contains("measure")) {
    const auto& m = j.at("measure");
    const auto b = m.at("basis").get<std::string>();
    if (b != "X" && b != "Y" && b != "Z") throw ConfigError("circuit json: basis must be X, Y or Z");
    c.measure = Measurement{m.at("q").get<int>(), b == "X" ? Pauli::X : b == "Y" ? Pauli::Y : Pauli::Z};
  }
  c.sign = j.value("sign", 1);
  c.label = j.value("label", std::string());
  c.validate();
  return c;
}

namespace detail {

inline std::string fmt_angle(double a) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", a);
  return buf;
}

}  // namespace detail

inline std::string emit(const Circuit& c, Format f) {
  c.validate();
  if (f == Format::Json) return to_json(c).dump();
  if (c.gates.empty() && !c.measure) return "";
  std::ostringstream os;
  os << "qreg q[" << c.n_sites << "];\n";
  if (c.measure) os << "creg c[1];\n";
  auto q = [](int site) { return "q[" + std::to_string(site - 1) + "]"; };
  for (const auto& g : c.gates) {
    if (g.kind == GateKind::G) {
      os << "sdg " << q(g.q[0]) << ";\nh " << q(g.q[0]) << ";\n";
      continue;
    }
    os << gate_name(g.kind) << "(" << detail::fmt_angle(g.angle) << ") " << q(g.q[0]);
    if (g.q.size() == 2) os << "," << q(g.q[1]);
    os << ";\n";
  }
  if (c.measure) {
    const std::string t = q(c.measure->q);
    if (c.measure->basis == Pauli::X) os << "h " << t << ";\n";
    if (c.measure->basis == Pauli::Y) os << "sdg " << t << ";\nh " << t << ";\n";
    os << "measure " << t << " -> c[0];\n";
    os << "// sign " << c.sign << "\n";
  }
  if (!c.label.empty()) os << "// label " << c.label << "\n";
  return os.str();
}

inline Circuit parse(std::string_view text, Format f) {
  if (f != Format::Json) throw ConfigError("only the json circuit format can be parsed");
  try {
    return circuit_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("circuit json: ") + e.what());
  }
}

}  // namespace mflab::circuits
