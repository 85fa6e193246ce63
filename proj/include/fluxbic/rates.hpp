#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "special.hpp"
#include "spectrum.hpp"

namespace fluxbic {

enum class ChannelKind { Waveguide, OneOverF, Dielectric, Inductive };

inline const char* channel_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::Waveguide: return "waveguide";
    case ChannelKind::OneOverF: return "one_over_f";
    case ChannelKind::Dielectric: return "dielectric";
    case ChannelKind::Inductive: return "inductive";
  }
  return "unknown";
}

// How the 1/f spectrum is continued to negative (absorptive) frequencies.
enum class OneOverFUpward { Symmetric, DetailedBalance };

inline const char* upward_name(OneOverFUpward u) {
  return u == OneOverFUpward::Symmetric ? "symmetric" : "detailed_balance";
}

enum class ConductanceQuantum { TwoESquaredOverH, CooperPair };

inline double conductance_quantum(ConductanceQuantum g) {
  const double e2h = constants.e_charge * constants.e_charge / constants.h;
  return g == ConductanceQuantum::TwoESquaredOverH ? 2.0 * e2h : 4.0 * e2h;
}

inline const char* conductance_name(ConductanceQuantum g) {
  return g == ConductanceQuantum::TwoESquaredOverH ? "G0=2e^2/h" : "G0=(2e)^2/h";
}

struct RateConventions {
  ConductanceQuantum g0 = ConductanceQuantum::TwoESquaredOverH;
  CapacitanceConvention capacitance = CapacitanceConvention::Renormalized;
  bool stimulated_emission = false;  // (n+1) on the tabulated downward waveguide rates
  OneOverFUpward one_over_f_upward = OneOverFUpward::Symmetric;
  double bias_over_amplitude = 1.0;  // flux bias of the biased columns, in units of A
};

struct NoiseChannel {
  ChannelKind kind = ChannelKind::Waveguide;
  double Z_line = 50.0;         // ohm
  double coupling_ratio = 0.0;  // C_c / C_sigma
  double amplitude = 0.0;       // A, units of Phi0
  double Q = std::numeric_limits<double>::infinity();
  double T = 0.0;  // K
  OneOverFUpward upward = OneOverFUpward::Symmetric;

  static NoiseChannel waveguide(double z, double ratio, double t = 0.0) {
    NoiseChannel c;
    c.kind = ChannelKind::Waveguide;
    c.Z_line = z;
    c.coupling_ratio = ratio;
    c.T = t;
    return c;
  }
  static NoiseChannel one_over_f(double a, double t, OneOverFUpward up = OneOverFUpward::Symmetric) {
    NoiseChannel c;
    c.kind = ChannelKind::OneOverF;
    c.amplitude = a;
    c.T = t;
    c.upward = up;
    return c;
  }
  static NoiseChannel dielectric(double q, double t) {
    NoiseChannel c;
    c.kind = ChannelKind::Dielectric;
    c.Q = q;
    c.T = t;
    return c;
  }
  static NoiseChannel inductive(double q, double t) {
    NoiseChannel c;
    c.kind = ChannelKind::Inductive;
    c.Q = q;
    c.T = t;
    return c;
  }

  void validate() const {
    if (!(amplitude >= 0.0)) fail(ErrorKind::UnitError, "noise amplitude must be >= 0");
    if (!(Q > 0.0)) fail(ErrorKind::UnitError, "quality factor must be > 0");
    if (!(T >= 0.0)) fail(ErrorKind::UnitError, "temperature must be >= 0");
    if (!(Z_line > 0.0)) fail(ErrorKind::UnitError, "line impedance must be > 0");
  }
};

struct TransitionRate {
  int from_state = 0;
  int to_state = 0;
  ChannelKind channel = ChannelKind::Waveguide;
  double rate = 0.0;   // 1/s
  double omega = 0.0;  // rad/s, positive for emission
};

inline double bose_occupation(double omega, double T) {
  if (T <= 0.0) return 0.0;
  return 1.0 / std::expm1(constants.hbar * std::abs(omega) / (constants.k_B * T));
}

// exp(-hbar |omega| / k_B T), zero at T = 0.
inline double boltzmann_factor(double omega, double T) {
  if (T <= 0.0) return 0.0;
  return std::exp(-constants.hbar * std::abs(omega) / (constants.k_B * T));
}

// 1 + coth(hbar omega / 2 k_B T) for omega > 0, written to stay finite as T -> 0.
inline double emission_factor(double omega, double T) {
  if (T <= 0.0) return 2.0;
  return -2.0 / std::expm1(-constants.hbar * std::abs(omega) / (constants.k_B * T));
}

// Positive-frequency densities in the SI units that pair with coupling_operator; negative
// frequencies follow detailed balance (or the symmetric 1/f continuation).
inline double spectral_density(const NoiseChannel& ch, double omega, const DerivedParams& d) {
  ch.validate();
  const double w = std::abs(omega);
  double s = 0.0;
  switch (ch.kind) {
    case ChannelKind::OneOverF:
      if (omega == 0.0) fail(ErrorKind::ZeroFrequency, "1/f spectrum is singular at omega = 0");
      s = 2.0 * pi * ch.amplitude * ch.amplitude * constants.Phi0 * constants.Phi0 / w;
      if (omega < 0.0 && ch.upward == OneOverFUpward::DetailedBalance) s *= boltzmann_factor(w, ch.T);
      return s;
    case ChannelKind::Dielectric:
      s = constants.hbar * w * w * d.C_sigma / ch.Q * emission_factor(w, ch.T);
      break;
    case ChannelKind::Inductive:
      s = constants.hbar / (d.L * ch.Q) * emission_factor(w, ch.T);
      break;
    case ChannelKind::Waveguide:
      fail(ErrorKind::InvalidArgument, "waveguide rates use the golden-rule routines");
  }
  return omega < 0.0 ? s * boltzmann_factor(w, ch.T) : s;
}

// Coupling operator in SI units: persistent current for 1/f noise, flux otherwise.
inline HermitianOperator coupling_operator(const NoiseChannel& ch, const HermitianOperator& theta, const DerivedParams& d) {
  if (ch.kind == ChannelKind::Waveguide) fail(ErrorKind::InvalidArgument, "waveguide couples through n");
  const double scale = ch.kind == ChannelKind::OneOverF ? d.I_p_prefactor : constants.Phi0 / (2.0 * pi);
  HermitianOperator op = theta;
  op.entries *= scale;
  op.label = ch.kind == ChannelKind::OneOverF ? "I_p" : "flux";
  return op;
}

inline double transition_omega(const SpectralResult& spec, int from, int to) {
  return ghz_to_angular(spec.energies[from] - spec.energies[to]);
}

// Gamma_ij = |<j|O|i>|^2 S(omega_ij) / hbar^2 with signed omega_ij.
inline TransitionRate noise_rate(const SpectralResult& spec, const HermitianOperator& coupling, const NoiseChannel& ch,
                                 int from, int to, const DerivedParams& d) {
  TransitionRate r{from, to, ch.kind, 0.0, transition_omega(spec, from, to)};
  const double elem = std::norm(coupling.element(spec.state(to), spec.state(from)));
  const double s = spectral_density(ch, r.omega, d);
  r.rate = elem == 0.0 ? 0.0 : elem * s / (constants.hbar * constants.hbar);
  return r;
}

// Zero-temperature emission rate into the line at frequency omega > 0.
inline double waveguide_rate(double omega, double n_elem_sq, double ratio, double z, ConductanceQuantum g0) {
  return 2.0 * pi * ratio * ratio * conductance_quantum(g0) * z * n_elem_sq * omega;
}

inline TransitionRate golden_rule_waveguide(const SpectralResult& spec, const HermitianOperator& n_op, int i, int j,
                                            const DerivedParams& d, double z,
                                            ConductanceQuantum g0 = ConductanceQuantum::TwoESquaredOverH) {
  if (!(spec.energies[i] > spec.energies[j])) fail(ErrorKind::NotDownward, "golden rule needs E_i > E_j");
  if (!(d.coupling_ratio > 0.0)) fail(ErrorKind::InvalidArgument, "waveguide rate needs a coupler (E_Cc > 0)");
  TransitionRate r{i, j, ChannelKind::Waveguide, 0.0, transition_omega(spec, i, j)};
  r.rate = waveguide_rate(r.omega, std::norm(n_op.element(spec.state(i), spec.state(j))), d.coupling_ratio, z, g0);
  return r;
}

// (down, up) for the pair, down from the higher level. down = G0 (n+1), up = G0 n.
inline std::pair<TransitionRate, TransitionRate> thermal_waveguide_rates(const SpectralResult& spec,
                                                                         const HermitianOperator& n_op, int i, int j,
                                                                         const DerivedParams& d, double z, double T,
                                                                         ConductanceQuantum g0 = ConductanceQuantum::TwoESquaredOverH) {
  if (!(T >= 0.0)) fail(ErrorKind::UnitError, "temperature must be >= 0");
  const int hi = spec.energies[i] >= spec.energies[j] ? i : j;
  const int lo = hi == i ? j : i;
  TransitionRate base = golden_rule_waveguide(spec, n_op, hi, lo, d, z, g0);
  const double nbar = bose_occupation(base.omega, T);
  TransitionRate down = base, up = base;
  down.rate = base.rate * (nbar + 1.0);
  up.from_state = lo;
  up.to_state = hi;
  up.omega = -base.omega;
  up.rate = base.rate * nbar;
  return {down, up};
}

// Solves two parameter points in one certified basis so states can be compared.
inline std::pair<SpectralResult, SpectralResult> solve_common_basis(const CircuitParams& a, const CircuitParams& b,
                                                                    const Numerics& num) {
  auto rung_of = [&](const CircuitParams& p) {
    const BasisSpec chosen = check_convergence(p, num.ladder, num.levels, num.tol).basis;
    for (std::size_t i = 0; i < num.ladder.size(); ++i)
      if (num.ladder[i] == chosen) return i;
    return std::size_t(0);
  };
  const std::size_t rung = std::max(rung_of(a), rung_of(b));
  Numerics trimmed = num;
  trimmed.ladder.assign(num.ladder.begin() + static_cast<std::ptrdiff_t>(rung), num.ladder.end());
  auto solve_at = [&](const CircuitParams& p) {
    ConvergenceCertificate cert{trimmed.ladder[0], num.levels, 0.0, p};
    cert.tol_achieved = check_convergence(p, trimmed.ladder, num.levels, num.tol).tol_achieved;
    return label_states(diagonalize(build_hamiltonian(p, cert.basis), num.levels, cert), num.parity_threshold);
  };
  return {solve_at(a), solve_at(b)};
}

// Golden-rule decay between levels identified at phi_ext = 0 and followed to the bias point.
struct BiasedDecay {
  TransitionRate rate;
  std::vector<int> tracked;  // biased indices of the requested reference levels
};

inline BiasedDecay flux_biased_decay(const CircuitParams& p, const Numerics& num, int from_ref, int to_ref,
                                     const DerivedParams& d, ConductanceQuantum g0 = ConductanceQuantum::TwoESquaredOverH) {
  if (!(std::abs(p.phi_ext) > 0.0)) fail(ErrorKind::InvalidArgument, "flux-biased decay needs phi_ext != 0");
  CircuitParams p0 = p;
  p0.phi_ext = 0.0;
  auto [ref, biased] = solve_common_basis(p0, p, num);
  std::vector<int> t = track_levels(ref, biased, {from_ref, to_ref});
  const HermitianOperator n_op = build_charge_operator(biased.basis, p);
  return {golden_rule_waveguide(biased, n_op, t[0], t[1], d, p.Z_line, g0), t};
}

// sigma^2 = A^2 (Ci(1) - Ci(gamma_plus / gamma_minus)).
inline double quasi_static_sigma(double A, double gamma_minus = 1e-2, double gamma_plus = 1e1) {
  if (!(gamma_minus > 0.0) || !(gamma_plus > gamma_minus)) fail(ErrorKind::InvalidCutoffs, "need 0 < gamma_minus < gamma_plus");
  if (!(A >= 0.0)) fail(ErrorKind::UnitError, "amplitude must be >= 0");
  return A * std::sqrt(cosine_integral(1.0) - cosine_integral(gamma_plus / gamma_minus));
}

struct DiscreteModeOptions {
  double c0 = 1.6e-10;            // F/m, line capacitance per length
  double kernel_fraction = 0.05;  // Gaussian line width as a fraction of omega_ij
};

// Golden-rule sum over the normal modes of a line of length L_wg. Modes are k > 0 only for
// G0=2e^2/h and both directions for (2e)^2/h. Each delta function is a normalized Gaussian.
inline double discrete_mode_cross_check(const SpectralResult& spec, const HermitianOperator& n_op, int i, int j,
                                        const DerivedParams& d, double z, double L_wg, int n_modes,
                                        ConductanceQuantum g0 = ConductanceQuantum::TwoESquaredOverH,
                                        const DiscreteModeOptions& opt = {}) {
  const double w_ij = transition_omega(spec, i, j);
  if (!(w_ij > 0.0)) fail(ErrorKind::NotDownward, "discrete-mode check needs E_i > E_j");
  const double nu = 1.0 / (opt.c0 * z);
  const double dw = 2.0 * pi * nu / L_wg;
  const double eta = opt.kernel_fraction * w_ij;
  if (dw > eta) fail(ErrorKind::ModeGridTooCoarse, "mode spacing exceeds the line width; lengthen the line");
  if (n_modes * dw < w_ij + 8.0 * eta) fail(ErrorKind::ModeGridTooCoarse, "modes do not reach past omega_ij");
  const double multiplicity = g0 == ConductanceQuantum::TwoESquaredOverH ? 1.0 : 2.0;
  const cplx n_ij = n_op.element(spec.state(j), spec.state(i));
  const double hbar = constants.hbar;
  double sum = 0.0;
  for (int m = 1; m <= n_modes; ++m) {
    const double w = m * dw;
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    const cplx g = sign * d.coupling_ratio * 2.0 * constants.e_charge * std::sqrt(hbar * w / (2.0 * opt.c0 * L_wg)) * n_ij;
    const double x = (w_ij - w) / eta;
    sum += std::norm(g) * std::exp(-0.5 * x * x);
  }
  return multiplicity * 2.0 * pi / (hbar * hbar) * sum / (std::sqrt(2.0 * pi) * eta);
}

inline int modes_needed(const SpectralResult& spec, int i, int j, double z, double L_wg, const DiscreteModeOptions& opt = {}) {
  const double w_ij = transition_omega(spec, i, j);
  const double dw = 2.0 * pi / (opt.c0 * z) / L_wg;
  return static_cast<int>(std::ceil((w_ij + 10.0 * opt.kernel_fraction * w_ij) / dw));
}

// One Table I row, rates out of |+> in 1/s.
struct RateReport {
  double Gamma_pm = 0.0;        // waveguide |+> -> |->
  double Gamma_p3 = 0.0;        // waveguide thermal |+> -> |3>
  double Gamma_p0_bias = 0.0;   // waveguide |+> -> |0> at flux bias
  double Gamma_pm_bias = 0.0;
  double Gamma_p3_bias = 0.0;
  double Gamma_pm_flux = 0.0;   // 1/f flux noise
  double Gamma_p3_flux = 0.0;
  double Gamma_pm_diel = 0.0;
  double Gamma_p3_diel = 0.0;
  double Gamma_pm_ind = 0.0;
  double Gamma_p3_ind = 0.0;
  double T1_ms = 0.0;
  bool bias_applied = false;  // the device sits at the flux bias of the *_bias columns

  std::vector<std::pair<std::string, double>> rate_columns() const {
    return {{"Gamma_pm_per_s", Gamma_pm},           {"Gamma_p3_per_s", Gamma_p3},
            {"Gamma_p0_bias_per_s", Gamma_p0_bias}, {"Gamma_pm_bias_per_s", Gamma_pm_bias},
            {"Gamma_p3_bias_per_s", Gamma_p3_bias}, {"Gamma_pm_flux_per_s", Gamma_pm_flux},
            {"Gamma_p3_flux_per_s", Gamma_p3_flux}, {"Gamma_pm_diel_per_s", Gamma_pm_diel},
            {"Gamma_p3_diel_per_s", Gamma_p3_diel}, {"Gamma_pm_ind_per_s", Gamma_pm_ind},
            {"Gamma_p3_ind_per_s", Gamma_p3_ind}};
  }

  std::vector<std::pair<std::string, double>> columns() const {
    auto c = rate_columns();
    c.emplace_back("T1_ms", T1_ms);
    return c;
  }
};

// Channels active at the operating point: the radiative columns at bias replace the
// zero-bias ones (same processes), the noise columns always count.
inline std::vector<std::pair<std::string, double>> operating_point_rates(const RateReport& r) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [name, v] : r.rate_columns()) {
    const bool biased = name.find("_bias_") != std::string::npos;
    const bool radiative = name == "Gamma_pm_per_s" || name == "Gamma_p3_per_s";
    if ((r.bias_applied && radiative) || (!r.bias_applied && biased)) continue;
    out.emplace_back(name, v);
  }
  return out;
}

inline double total_lifetime(const RateReport& r) {
  double sum = 0.0;
  for (const auto& [name, v] : operating_point_rates(r)) sum += v;
  return sum > 0.0 ? 1e3 / sum : std::numeric_limits<double>::infinity();
}

}  // namespace fluxbic
