#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "qutrit.hpp"
#include "rates.hpp"

namespace fluxbic {

struct NoiseParams {
  double T = 0.015;        // K
  double A = 5e-6;         // Phi0
  double Q_diel = 2.5e5;   // 1 / (4e-6)
  double Q_ind = 8e9;
  double E_Cc = 0.25;      // GHz
  double Z_line = 50.0;    // ohm
  double gamma_minus = 1e-2;  // Hz
  double gamma_plus = 1e1;    // Hz

  void validate() const {
    if (!(T >= 0.0)) fail(ErrorKind::UnitError, "noise.T must be >= 0");
    if (!(A >= 0.0)) fail(ErrorKind::UnitError, "noise.A must be >= 0");
    if (!(Q_diel > 0.0)) fail(ErrorKind::UnitError, "noise.Q_diel must be > 0");
    if (!(Q_ind > 0.0)) fail(ErrorKind::UnitError, "noise.Q_ind must be > 0");
    if (!(E_Cc >= 0.0)) fail(ErrorKind::UnitError, "noise.E_Cc must be >= 0");
    if (!(Z_line > 0.0)) fail(ErrorKind::UnitError, "noise.Z_line must be > 0");
    if (!(gamma_minus > 0.0) || !(gamma_plus > gamma_minus))
      fail(ErrorKind::InvalidCutoffs, "noise cutoffs need 0 < gamma_minus < gamma_plus");
  }
};

// Row of Table I: E_J, E_J/E_C and E_J/E_L.
inline CircuitParams table1_row(double e_j, double ej_over_ec, double ej_over_el) {
  CircuitParams p;
  p.E_J = e_j;
  p.E_C = e_j / ej_over_ec;
  p.E_L = e_j / ej_over_el;
  return p;
}

struct Table1Result {
  RateReport report;
  double bias_phi = 0.0;
  QutritLevels levels;
  std::vector<int> tracked;  // ground, minus, plus, third at the bias point
};

inline Table1Result reproduce_table1(const CircuitParams& row, const NoiseParams& noise,
                                     const RateConventions& conv = {}, const Numerics& num = {}) {
  noise.validate();
  CircuitParams p = row;
  p.E_Cc = noise.E_Cc;
  p.Z_line = noise.Z_line;
  p.T = noise.T;
  p.phi_ext = 0.0;
  const DerivedParams d = derive_params(p, conv.capacitance);
  const CircuitParams pe = effective_circuit(p, conv.capacitance);

  Table1Result out;
  out.bias_phi = conv.bias_over_amplitude * noise.A;
  CircuitParams pb = pe;
  pb.phi_ext = out.bias_phi;
  auto [s0, sb] = solve_common_basis(pe, pb, num);
  out.levels = identify_qutrit_levels(s0, find_potential_minima(pe));
  const QutritLevels& q = out.levels;

  const HermitianOperator n_op = build_charge_operator(s0.basis, pe);
  const FluxOperators flux = build_flux_operators(s0.basis, pe);
  RateReport& r = out.report;

  auto radiative = [&](const SpectralResult& s, int plus, int minus, int third, double& pm, double& p3) {
    auto [down, up_unused] = thermal_waveguide_rates(s, n_op, plus, minus, d, p.Z_line, p.T, conv.g0);
    pm = conv.stimulated_emission ? down.rate : golden_rule_waveguide(s, n_op, plus, minus, d, p.Z_line, conv.g0).rate;
    p3 = thermal_waveguide_rates(s, n_op, third, plus, d, p.Z_line, p.T, conv.g0).second.rate;
  };
  radiative(s0, q.plus, q.minus, q.third, r.Gamma_pm, r.Gamma_p3);

  if (out.bias_phi != 0.0) {
    out.tracked = track_levels(s0, sb, {q.ground, q.minus, q.plus, q.third});
    const HermitianOperator nb = build_charge_operator(sb.basis, pb);
    r.Gamma_p0_bias = golden_rule_waveguide(sb, nb, out.tracked[2], out.tracked[0], d, p.Z_line, conv.g0).rate;
    radiative(sb, out.tracked[2], out.tracked[1], out.tracked[3], r.Gamma_pm_bias, r.Gamma_p3_bias);
    r.bias_applied = true;
  }

  const NoiseChannel ch_f = NoiseChannel::one_over_f(noise.A, p.T, conv.one_over_f_upward);
  const NoiseChannel ch_d = NoiseChannel::dielectric(noise.Q_diel, p.T);
  const NoiseChannel ch_i = NoiseChannel::inductive(noise.Q_ind, p.T);
  const HermitianOperator ip = coupling_operator(ch_f, flux.theta, d);
  const HermitianOperator fl = coupling_operator(ch_d, flux.theta, d);
  r.Gamma_pm_flux = noise_rate(s0, ip, ch_f, q.plus, q.minus, d).rate;
  r.Gamma_p3_flux = noise_rate(s0, ip, ch_f, q.plus, q.third, d).rate;
  r.Gamma_pm_diel = noise_rate(s0, fl, ch_d, q.plus, q.minus, d).rate;
  r.Gamma_p3_diel = noise_rate(s0, fl, ch_d, q.plus, q.third, d).rate;
  r.Gamma_pm_ind = noise_rate(s0, fl, ch_i, q.plus, q.minus, d).rate;
  r.Gamma_p3_ind = noise_rate(s0, fl, ch_i, q.plus, q.third, d).rate;
  r.T1_ms = total_lifetime(r);
  return out;
}

struct PreparationEstimate {
  double delta_phi = 0.0;        // Phi0
  double gap_a = 0.0;            // GHz, E+ - E- at phi_ext = 0
  double delta_E = 0.0;          // GHz, |E+(delta_phi) - E+(0)|
  double Gamma_LZ_per_ns = 0.0;  // 2 pi a^2 / (h dE) per ns of sweep time
  double t_adiabatic = 0.0;      // ns
  double target_leakage = 0.0;
};

// Landau-Zener estimate: leakage exp(-2 pi Gamma_LZ) with Gamma_LZ = a^2 dt / (hbar dE).
inline PreparationEstimate preparation_estimate(const CircuitParams& params, double delta_phi,
                                                double target_leakage = 1e-2, const Numerics& num = {}) {
  if (!(delta_phi > 0.0)) fail(ErrorKind::InvalidArgument, "delta_phi must be > 0");
  if (!(target_leakage > 0.0 && target_leakage < 1.0)) fail(ErrorKind::InvalidArgument, "target leakage must lie in (0, 1)");
  CircuitParams p0 = params;
  p0.phi_ext = 0.0;
  CircuitParams pb = p0;
  pb.phi_ext = delta_phi;
  auto [s0, sb] = solve_common_basis(p0, pb, num);
  const QutritLevels q = identify_qutrit_levels(s0, find_potential_minima(p0));
  const std::vector<int> t = track_levels(s0, sb, {q.plus});
  PreparationEstimate e;
  e.delta_phi = delta_phi;
  e.target_leakage = target_leakage;
  e.gap_a = s0.energies[q.plus] - s0.energies[q.minus];
  e.delta_E = std::abs(sb.energies[t[0]] - s0.energies[q.plus]);
  const double a_hz = e.gap_a * 1e9, de_hz = e.delta_E * 1e9;
  e.Gamma_LZ_per_ns = 2.0 * pi * a_hz * a_hz / de_hz * 1e-9;
  e.t_adiabatic = std::log(1.0 / target_leakage) / (2.0 * pi * e.Gamma_LZ_per_ns);
  return e;
}

// ---- sweeps ----

inline const char* const observable_names[] = {"energies", "gaps",  "overlaps", "decomposition", "analytic",
                                               "waveguide", "noise", "table1"};

struct SweepSpec {
  CircuitParams base;
  std::string axis;
  std::vector<double> values;
  std::vector<std::string> outputs;
  NoiseParams noise;
  RateConventions conventions;
  Numerics numerics;

  void validate() const {
    if (!is_parameter_path(axis)) fail(ErrorKind::SchemaError, "sweep.axis: unknown parameter path '" + axis + "'");
    if (values.empty()) fail(ErrorKind::SchemaError, "sweep.values must be nonempty");
    bool up = true, down = true;
    for (std::size_t i = 1; i < values.size(); ++i) {
      up = up && values[i] > values[i - 1];
      down = down && values[i] < values[i - 1];
    }
    if (!up && !down) fail(ErrorKind::SchemaError, "sweep.values must be strictly monotone");
    if (outputs.empty()) fail(ErrorKind::SchemaError, "sweep.outputs must be nonempty");
    for (const auto& o : outputs)
      if (std::find_if(std::begin(observable_names), std::end(observable_names), [&](const char* n) { return o == n; }) ==
          std::end(observable_names))
        fail(ErrorKind::SchemaError, "sweep.outputs: unknown observable '" + o + "'");
  }
};

struct Dataset {
  std::vector<std::string> columns;  // numeric columns
  std::vector<std::vector<double>> rows;
  std::string text_column = "status";  // trailing text column
  std::vector<std::string> status;
};

inline std::string term_column(const std::string& term) {
  static const std::map<std::string, std::string> names{
      {"I", "I"},           {"Sx", "Sx"},           {"Sy", "Sy"},           {"Sz", "Sz"},     {"Sz2", "Sz2"},
      {"SxSz+SzSx", "SxSz_SzSx"}, {"SySz+SzSy", "SySz_SzSy"}, {"Sp2+Sm2", "Sp2_Sm2"}, {"i(Sp2-Sm2)", "iSp2_Sm2"}};
  return names.at(term);
}

inline std::vector<std::string> observable_columns(const std::string& obs, const Numerics& num) {
  if (obs == "energies") {
    std::vector<std::string> c;
    for (int i = 0; i < num.levels; ++i) c.push_back("E" + std::to_string(i) + "_GHz");
    return c;
  }
  if (obs == "gaps") return {"gap_pm_GHz", "gap_3p_GHz", "gap_odd_GHz"};
  if (obs == "overlaps") return {"a0", "a1"};
  if (obs == "decomposition") {
    std::vector<std::string> c;
    for (const std::string op : {"H", "n", "sin"}) {
      for (const auto& t : SpinTermSet::full().terms) c.push_back("coeff_" + op + "_" + term_column(t.name) + (op == "H" ? "_GHz" : ""));
      c.push_back("residual_" + op);
    }
    return c;
  }
  if (obs == "analytic") return {"a0", "phi_star_tilde", "b", "epsilon_GHz", "Delta_GHz", "E3_GHz"};
  if (obs == "waveguide") return {"Gamma_pm_per_s", "Gamma_m0_per_s", "Gamma_p0_per_s", "Gamma_p3_up_per_s"};
  if (obs == "noise")
    return {"Gamma_pm_flux_per_s", "Gamma_p3_flux_per_s", "Gamma_pm_diel_per_s",
            "Gamma_p3_diel_per_s", "Gamma_pm_ind_per_s",  "Gamma_p3_ind_per_s"};
  if (obs == "table1") {
    std::vector<std::string> c;
    for (const auto& [n, v] : RateReport{}.columns()) c.push_back(n);
    return c;
  }
  fail(ErrorKind::SchemaError, "unknown observable '" + obs + "'");
}

inline std::vector<std::string> sweep_columns(const SweepSpec& spec) {
  std::vector<std::string> c{spec.axis};
  for (const auto& o : spec.outputs)
    for (auto& name : observable_columns(o, spec.numerics)) c.push_back(std::move(name));
  return c;
}

namespace detail {

struct PointContext {
  CircuitParams p;      // as given, with noise-block coupler and line
  CircuitParams pe;     // charging energy as seen by H
  DerivedParams d;
  SpectralResult s0;    // phi_ext = 0 reference
  SpectralResult s;     // operating point
  QutritLevels q0;      // in s0
  QutritLevels q;       // tracked into s
  bool biased = false;
};

inline PointContext make_context(const SweepSpec& spec, double x) {
  PointContext c;
  c.p = with_parameter(spec.base, spec.axis, x);
  c.p.validate();
  c.d = derive_params(c.p, spec.conventions.capacitance);
  c.pe = effective_circuit(c.p, spec.conventions.capacitance);
  CircuitParams p0 = c.pe;
  p0.phi_ext = 0.0;
  c.biased = !is_symmetric_point(c.pe.phi_ext);
  if (c.biased) {
    auto [a, b] = solve_common_basis(p0, c.pe, spec.numerics);
    c.s0 = std::move(a);
    c.s = std::move(b);
  } else {
    c.s0 = solve_spectrum(p0, spec.numerics);
    c.s = c.s0;
  }
  c.q0 = identify_qutrit_levels(c.s0, find_potential_minima(p0));
  c.q = c.q0;
  if (c.biased) {
    auto t = track_levels(c.s0, c.s, {c.q0.ground, c.q0.minus, c.q0.plus, c.q0.third, c.q0.fourth});
    c.q = {t[0], t[1], t[2], t[3], t[4]};
  }
  return c;
}

inline void append_observable(const std::string& obs, const SweepSpec& spec, const PointContext& c,
                              std::vector<double>& row) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (obs == "energies") {
    for (int i = 0; i < spec.numerics.levels; ++i) row.push_back(c.s.energies[i]);
  } else if (obs == "gaps") {
    row.push_back(c.s.energies[c.q.plus] - c.s.energies[c.q.minus]);
    row.push_back(c.s.energies[c.q.third] - c.s.energies[c.q.plus]);
    if (c.biased) {
      row.push_back(nan);
    } else {
      row.push_back(c.s0.energies[LevelSelector::odd(1).resolve(c.s0)] - c.s0.energies[LevelSelector::odd(0).resolve(c.s0)]);
    }
  } else if (obs == "overlaps") {
    CircuitParams p0 = c.pe;
    p0.phi_ext = 0.0;
    const PotentialMinima m = find_potential_minima(p0);
    const GramSchmidtResult gs = gram_schmidt_qutrit(gaussian_well_states(p0, m, c.s0.basis), c.s0, 4, c.q0);
    row.push_back(gs.a0);
    row.push_back(gs.a1);
  } else if (obs == "decomposition") {
    if (c.biased) fail(ErrorKind::WrongParityOrder, "decomposition is defined at phi_ext = 0");
    const QutritBasis qb = qutrit_basis_from_eigenstates(c.s0);
    const FluxOperators flux = build_flux_operators(c.s0.basis, c.pe);
    const HermitianOperator h = build_hamiltonian(c.pe, c.s0.basis);
    const HermitianOperator n = build_charge_operator(c.s0.basis, c.pe);
    for (const HermitianOperator* op : {&h, &n, &flux.sin_theta}) {
      const QutritDecomposition dec = decompose_operator(*op, qb);
      for (const auto& [name, v] : dec.coefficients) row.push_back(v);
      row.push_back(dec.residual);
    }
  } else if (obs == "analytic") {
    CircuitParams p0 = c.pe;
    p0.phi_ext = 0.0;
    const AnalyticQutritModel a = analytic_qutrit_model(c.pe, c.s0, build_flux_operators(c.s0.basis, p0));
    for (double v : {a.a0, a.phi_star_tilde, a.b, a.epsilon, a.Delta, a.E3}) row.push_back(v);
  } else if (obs == "waveguide") {
    const HermitianOperator n = build_charge_operator(c.s.basis, c.pe);
    const auto g0 = spec.conventions.g0;
    const double z = c.p.Z_line;
    row.push_back(golden_rule_waveguide(c.s, n, c.q.plus, c.q.minus, c.d, z, g0).rate);
    row.push_back(golden_rule_waveguide(c.s, n, c.q.minus, c.q.ground, c.d, z, g0).rate);
    row.push_back(golden_rule_waveguide(c.s, n, c.q.plus, c.q.ground, c.d, z, g0).rate);
    row.push_back(thermal_waveguide_rates(c.s, n, c.q.third, c.q.plus, c.d, z, c.p.T, g0).second.rate);
  } else if (obs == "noise") {
    const FluxOperators flux = build_flux_operators(c.s.basis, c.pe);
    const NoiseParams& nz = spec.noise;
    const NoiseChannel chans[] = {NoiseChannel::one_over_f(nz.A, c.p.T, spec.conventions.one_over_f_upward),
                                  NoiseChannel::dielectric(nz.Q_diel, c.p.T), NoiseChannel::inductive(nz.Q_ind, c.p.T)};
    for (const auto& ch : chans) {
      const HermitianOperator op = coupling_operator(ch, flux.theta, c.d);
      row.push_back(noise_rate(c.s, op, ch, c.q.plus, c.q.minus, c.d).rate);
      row.push_back(noise_rate(c.s, op, ch, c.q.plus, c.q.third, c.d).rate);
    }
  } else if (obs == "table1") {
    NoiseParams nz = spec.noise;
    nz.E_Cc = c.p.E_Cc;
    nz.Z_line = c.p.Z_line;
    nz.T = c.p.T;
    CircuitParams row_p = c.p;
    row_p.phi_ext = 0.0;
    const Table1Result t = reproduce_table1(row_p, nz, spec.conventions, spec.numerics);
    for (const auto& [name, v] : t.report.columns()) row.push_back(v);
  }
}

}  // namespace detail

struct PointResult {
  std::vector<double> values;
  std::string status = "ok";
};

inline PointResult evaluate_point(const SweepSpec& spec, double x) {
  PointResult r;
  r.values.push_back(x);
  const std::size_t width = sweep_columns(spec).size();
  try {
    const detail::PointContext c = detail::make_context(spec, x);
    for (const auto& o : spec.outputs) detail::append_observable(o, spec, c, r.values);
  } catch (const Error& e) {
    r.status = kind_name(e.kind());
  } catch (const std::exception&) {
    r.status = "InternalError";
  }
  if (r.status != "ok") {
    r.values.assign(width, std::numeric_limits<double>::quiet_NaN());
    r.values[0] = x;
  }
  return r;
}

// FLUXBIC_THREADS caps the worker count.
inline unsigned worker_count(std::size_t jobs) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FLUXBIC_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) n = static_cast<unsigned>(v);
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

// Rows come back in input order whatever the evaluation order.
inline Dataset run_sweep(const SweepSpec& spec) {
  spec.validate();
  spec.noise.validate();
  Dataset out;
  out.columns = sweep_columns(spec);
  const std::size_t n = spec.values.size();
  std::vector<PointResult> results(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) results[i] = evaluate_point(spec, spec.values[i]);
  };
  const unsigned workers = worker_count(n);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (auto& r : results) {
    out.rows.push_back(std::move(r.values));
    out.status.push_back(std::move(r.status));
  }
  return out;
}

// One curve of a multi-curve figure: the template with some parameters overridden.
struct Curve {
  std::string label;
  std::vector<std::pair<std::string, double>> set;
};

struct CurveResult {
  std::string label;
  Dataset data;
  std::optional<AvoidedCrossing> crossing;
  std::string crossing_status;
};

// Odd-sector levels 0 and 1 are |-> and the first excited central state; their gap
// minimum is the crossing that ends the qutrit picture.
inline std::pair<LevelSelector, LevelSelector> qutrit_crossing_levels() {
  return {LevelSelector::odd(0), LevelSelector::odd(1)};
}

inline CurveResult run_curve(const SweepSpec& spec, const Curve& curve, bool locate_crossing) {
  SweepSpec s = spec;
  for (const auto& [path, v] : curve.set) s.base = with_parameter(s.base, path, v);
  CurveResult r;
  r.label = curve.label;
  r.data = run_sweep(s);
  if (locate_crossing) {
    try {
      const double lo = std::min(s.values.front(), s.values.back());
      const double hi = std::max(s.values.front(), s.values.back());
      CircuitParams base = effective_circuit(s.base, s.conventions.capacitance);
      r.crossing = find_avoided_crossing(base, s.axis, lo, hi, qutrit_crossing_levels(), s.numerics);
      r.crossing_status = "ok";
    } catch (const Error& e) {
      r.crossing_status = kind_name(e.kind());
    }
  }
  return r;
}

}  // namespace fluxbic
