#pragma once

#include <cmath>
#include <string>

#include "constants.hpp"
#include "errors.hpp"

namespace fluxbic {

// Energies in GHz (E/h), Z_line in ohm, T in kelvin, phi_ext in units of Phi0.
struct CircuitParams {
  double E_J = 10.0;
  double E_C = 3.6;
  double E_L = 0.46;
  double phi_ext = 0.0;
  double E_Cc = 0.0;  // 0: no coupler
  double Z_line = 50.0;
  double T = 0.0;

  bool operator==(const CircuitParams&) const = default;

  void validate() const {
    auto positive = [](double v, const char* key) {
      if (!(v > 0.0) || !std::isfinite(v)) fail(ErrorKind::UnitError, std::string(key) + " must be positive");
    };
    positive(E_J, "circuit.E_J");
    positive(E_C, "circuit.E_C");
    positive(E_L, "circuit.E_L");
    positive(Z_line, "circuit.Z_line");
    if (!(E_Cc >= 0.0) || !std::isfinite(E_Cc)) fail(ErrorKind::UnitError, "circuit.E_Cc must be >= 0");
    if (!(T >= 0.0) || !std::isfinite(T)) fail(ErrorKind::UnitError, "circuit.T must be >= 0");
    if (!std::isfinite(phi_ext)) fail(ErrorKind::UnitError, "circuit.phi_ext must be finite");
  }
};

// Renormalized: E_C is the charging energy of the full island (what H sees) and the
// coupler only sets the coupling ratio C_c/C_sigma = E_C/E_Cc.
// Additive: E_C belongs to C_f alone and C_sigma = C_f + C_c.
enum class CapacitanceConvention { Renormalized, Additive };

inline const char* convention_name(CapacitanceConvention c) {
  return c == CapacitanceConvention::Renormalized ? "renormalized: C_sigma=e^2/(2h E_C), ratio=E_C/E_Cc"
                                                   : "additive: C_sigma=C_f+C_c, E_C_tilde=e^2/(2 C_sigma)";
}

inline double capacitance_from_energy(double e_ghz) {
  return constants.e_charge * constants.e_charge / (2.0 * constants.h * e_ghz * 1e9);
}

struct DerivedParams {
  double C_f = 0.0;            // F; under Renormalized this is C_sigma - C_c and may be negative
  double C_c = 0.0;            // F
  double C_sigma = 0.0;        // F
  double E_C_tilde = 0.0;      // GHz
  double coupling_ratio = 0.0; // C_c / C_sigma
  double L = 0.0;              // H
  double I_p_prefactor = 0.0;  // A per radian of theta
  double I_0 = 0.0;            // A
};

inline DerivedParams derive_params(const CircuitParams& p,
                                   CapacitanceConvention conv = CapacitanceConvention::Renormalized) {
  if (!(p.E_Cc >= 0.0)) fail(ErrorKind::UnitError, "circuit.E_Cc must be >= 0");
  DerivedParams d;
  d.C_c = p.E_Cc > 0.0 ? capacitance_from_energy(p.E_Cc) : 0.0;
  if (conv == CapacitanceConvention::Additive) {
    d.C_f = capacitance_from_energy(p.E_C);
    d.C_sigma = d.C_f + d.C_c;
    d.E_C_tilde = constants.e_charge * constants.e_charge / (2.0 * d.C_sigma) / constants.h * 1e-9;
  } else {
    d.C_sigma = capacitance_from_energy(p.E_C);
    d.C_f = d.C_sigma - d.C_c;
    d.E_C_tilde = p.E_C;
  }
  d.coupling_ratio = d.C_c / d.C_sigma;
  const double flux_unit = constants.hbar / (2.0 * constants.e_charge);
  d.L = flux_unit * flux_unit / ghz_to_joule(p.E_L);
  d.I_p_prefactor = constants.Phi0 / (2.0 * pi * d.L);
  d.I_0 = 2.0 * pi * ghz_to_joule(p.E_J) / constants.Phi0;
  return d;
}

// Parameters as seen by the Hamiltonian: the charging energy is E_C_tilde.
inline CircuitParams effective_circuit(const CircuitParams& p, CapacitanceConvention conv) {
  CircuitParams q = p;
  if (conv == CapacitanceConvention::Additive) q.E_C = derive_params(p, conv).E_C_tilde;
  return q;
}

enum class BasisKind { PhaseGrid, OscillatorLadder };

struct BasisSpec {
  BasisKind kind = BasisKind::OscillatorLadder;
  int dim = 200;
  double phase_halfwidth = 8.0 * pi;  // PhaseGrid only

  static BasisSpec phase_grid(int dim = 1024, double halfwidth = 8.0 * pi) {
    return {BasisKind::PhaseGrid, dim, halfwidth};
  }
  static BasisSpec oscillator_ladder(int dim = 200) { return {BasisKind::OscillatorLadder, dim, 0.0}; }

  bool operator==(const BasisSpec& o) const {
    if (kind != o.kind || dim != o.dim) return false;
    return kind == BasisKind::OscillatorLadder || phase_halfwidth == o.phase_halfwidth;
  }

  void validate() const {
    if (dim < 16) fail(ErrorKind::InvalidArgument, "basis dim must be >= 16");
    if (kind == BasisKind::PhaseGrid && !(phase_halfwidth >= 3.0 * pi))
      fail(ErrorKind::GridTooNarrow, "phase_halfwidth must be >= 3*pi");
  }
};

inline std::string basis_name(const BasisSpec& b) {
  if (b.kind == BasisKind::OscillatorLadder) return "OscillatorLadder(" + std::to_string(b.dim) + ")";
  return "PhaseGrid(" + std::to_string(b.dim) + ", w=" + std::to_string(b.phase_halfwidth) + ")";
}

// Potential in the flux-in-cosine gauge, GHz.
inline double potential(const CircuitParams& p, double theta) {
  return 0.5 * p.E_L * theta * theta - p.E_J * std::cos(theta + 2.0 * pi * p.phi_ext);
}
inline double potential_slope(const CircuitParams& p, double theta) {
  return p.E_L * theta + p.E_J * std::sin(theta + 2.0 * pi * p.phi_ext);
}
inline double potential_curvature(const CircuitParams& p, double theta) {
  return p.E_L + p.E_J * std::cos(theta + 2.0 * pi * p.phi_ext);
}

// phi_ext within 1e-12 of an integer: the reflection theta -> -theta is a symmetry.
inline bool is_symmetric_point(double phi_ext) {
  return std::abs(phi_ext - std::round(phi_ext)) < 1e-12;
}

// Named parameter paths used by sweeps and config overrides. The two ratio axes hold
// E_J fixed and move E_C or E_L.
inline const char* const parameter_paths[] = {"circuit.E_J",       "circuit.E_C",       "circuit.E_L",
                                              "circuit.phi_ext",   "circuit.E_Cc",      "circuit.Z_line",
                                              "circuit.T",         "ratio.EJ_over_EC",  "ratio.EJ_over_EL"};

inline bool is_parameter_path(const std::string& path) {
  for (const char* p : parameter_paths)
    if (path == p) return true;
  return false;
}

inline CircuitParams with_parameter(CircuitParams p, const std::string& path, double value) {
  if (path == "circuit.E_J") p.E_J = value;
  else if (path == "circuit.E_C") p.E_C = value;
  else if (path == "circuit.E_L") p.E_L = value;
  else if (path == "circuit.phi_ext") p.phi_ext = value;
  else if (path == "circuit.E_Cc") p.E_Cc = value;
  else if (path == "circuit.Z_line") p.Z_line = value;
  else if (path == "circuit.T") p.T = value;
  else if (path == "ratio.EJ_over_EC") p.E_C = p.E_J / value;
  else if (path == "ratio.EJ_over_EL") p.E_L = p.E_J / value;
  else fail(ErrorKind::SchemaError, "unknown parameter path '" + path + "'");
  return p;
}

inline double get_parameter(const CircuitParams& p, const std::string& path) {
  if (path == "circuit.E_J") return p.E_J;
  if (path == "circuit.E_C") return p.E_C;
  if (path == "circuit.E_L") return p.E_L;
  if (path == "circuit.phi_ext") return p.phi_ext;
  if (path == "circuit.E_Cc") return p.E_Cc;
  if (path == "circuit.Z_line") return p.Z_line;
  if (path == "circuit.T") return p.T;
  if (path == "ratio.EJ_over_EC") return p.E_J / p.E_C;
  if (path == "ratio.EJ_over_EL") return p.E_J / p.E_L;
  fail(ErrorKind::SchemaError, "unknown parameter path '" + path + "'");
}

}  // namespace fluxbic
