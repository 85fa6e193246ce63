#pragma once

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "io.hpp"

namespace fluxbic {

struct TaskOutput {
  Dataset data;
  std::vector<CurveResult> curves;  // multi-curve sweeps
  json metadata;
  std::vector<std::string> warnings;
};

namespace detail {

inline double parity_code(Parity p) { return p == Parity::Even ? 1.0 : p == Parity::Odd ? -1.0 : 0.0; }

inline TaskOutput task_spectrum(const RunConfig& c, TaskOutput out) {
  const CircuitParams pe = effective_circuit(c.circuit, c.conventions.capacitance);
  const ConvergenceCertificate cert = check_convergence(pe, c.numerics.ladder, c.numerics.levels, c.numerics.tol);
  SpectralResult s = diagonalize(build_hamiltonian(pe, cert.basis), c.numerics.levels, cert);
  if (is_symmetric_point(pe.phi_ext)) {
    s = label_states(std::move(s), c.numerics.parity_threshold);
  } else {
    out.warnings.push_back("phi_ext is not an integer: parity labels and BIC checks skipped");
  }
  out.data.columns = {"level", "E_GHz", "parity"};
  out.data.text_column = "parity_label";
  for (int i = 0; i < s.size(); ++i) {
    out.data.rows.push_back({double(i), s.energies[i], parity_code(s.parities[i])});
    out.data.status.push_back(parity_name(s.parities[i]));
  }
  out.metadata["basis"] = basis_json(cert.basis);
  out.metadata["tol_achieved_GHz"] = cert.tol_achieved;
  if (is_symmetric_point(pe.phi_ext)) {
    try {
      const QutritLevels q = identify_qutrit_levels(s, find_potential_minima(pe));
      out.metadata["qutrit_levels"] = {{"ground", q.ground}, {"minus", q.minus}, {"plus", q.plus}, {"third", q.third}};
    } catch (const Error& e) {
      out.warnings.push_back(std::string("qutrit levels not identified: ") + e.what());
    }
  }
  return out;
}

inline TaskOutput task_qutrit_fit(const RunConfig& c, TaskOutput out) {
  const CircuitParams pe = effective_circuit(c.circuit, c.conventions.capacitance);
  if (!is_symmetric_point(pe.phi_ext)) fail(ErrorKind::WrongParityOrder, "qutrit-fit needs integer phi_ext");
  const SpectralResult s = solve_spectrum(pe, c.numerics);
  const QutritBasis qb = qutrit_basis_from_eigenstates(s);
  const FluxOperators flux = build_flux_operators(s.basis, pe);
  const HermitianOperator h = build_hamiltonian(pe, s.basis);
  const HermitianOperator n = build_charge_operator(s.basis, pe);
  const SpinTermSet terms = SpinTermSet::full();
  for (const auto& t : terms.terms) out.data.columns.push_back("coeff_" + term_column(t.name));
  out.data.columns.push_back("residual");
  out.data.text_column = "operator";
  auto add = [&](const QutritDecomposition& d, const std::string& label) {
    std::vector<double> row;
    for (const auto& [name, v] : d.coefficients) row.push_back(v);
    row.push_back(d.residual);
    out.data.rows.push_back(std::move(row));
    out.data.status.push_back(label);
  };
  for (const HermitianOperator* op : {&h, &n, &flux.sin_theta, &flux.theta}) add(decompose_operator(*op, qb, terms), op->label);
  const AnalyticQutritModel a = analytic_qutrit_model(pe, s, flux);
  add(decompose_matrix(a.H_eff, terms, "H"), "analytic_H");
  add(decompose_matrix(a.n_eff, terms, "n"), "analytic_n");
  add(decompose_matrix(a.sin_eff, terms, "sin_theta"), "analytic_sin_theta");
  add(decompose_matrix(a.theta_eff, terms, "theta"), "analytic_theta");
  out.metadata["coefficient_units"] = "H rows in GHz, other rows dimensionless";
  out.metadata["analytic_model"] = {{"a0", a.a0},           {"phi_star_tilde", a.phi_star_tilde}, {"b", a.b},
                                    {"epsilon_GHz", a.epsilon}, {"Delta_GHz", a.Delta},           {"E3_GHz", a.E3},
                                    {"low_confidence", a.low_confidence}};
  out.metadata["localization"] = qb.localization;
  if (a.low_confidence) out.warnings.push_back("well overlaps exceed 0.05: analytic model is low confidence");
  return out;
}

inline TaskOutput task_rates(const RunConfig& c, TaskOutput out) {
  SweepSpec spec;
  spec.base = c.circuit;
  spec.axis = "circuit.phi_ext";
  spec.values = {c.circuit.phi_ext};
  spec.noise = c.noise;
  spec.conventions = c.conventions;
  spec.numerics = c.numerics;
  const PointContext ctx = make_context(spec, c.circuit.phi_ext);
  const HermitianOperator n = build_charge_operator(ctx.s.basis, ctx.pe);
  const FluxOperators flux = build_flux_operators(ctx.s.basis, ctx.pe);
  const QutritLevels& q = ctx.q;
  out.data.columns = {"from_level", "to_level", "omega_rad_per_s", "rate_per_s"};
  out.data.text_column = "channel";
  auto add = [&](const TransitionRate& r, const std::string& label) {
    out.data.rows.push_back({double(r.from_state), double(r.to_state), r.omega, r.rate});
    out.data.status.push_back(label);
  };
  const double z = ctx.p.Z_line, T = ctx.p.T;
  const auto g0 = c.conventions.g0;
  if (ctx.d.coupling_ratio > 0.0) {
    add(golden_rule_waveguide(ctx.s, n, q.plus, q.minus, ctx.d, z, g0), "waveguide");
    add(golden_rule_waveguide(ctx.s, n, q.minus, q.ground, ctx.d, z, g0), "waveguide");
    add(golden_rule_waveguide(ctx.s, n, q.plus, q.ground, ctx.d, z, g0), "waveguide");
    auto [down, up] = thermal_waveguide_rates(ctx.s, n, q.third, q.plus, ctx.d, z, T, g0);
    add(down, "waveguide_thermal");
    add(up, "waveguide_thermal");
  } else {
    out.warnings.push_back("E_Cc = 0: no waveguide coupling");
  }
  const NoiseChannel chans[] = {NoiseChannel::one_over_f(c.noise.A, T, c.conventions.one_over_f_upward),
                                NoiseChannel::dielectric(c.noise.Q_diel, T), NoiseChannel::inductive(c.noise.Q_ind, T)};
  for (const auto& ch : chans) {
    const HermitianOperator op = coupling_operator(ch, flux.theta, ctx.d);
    for (auto [from, to] : {std::pair{q.plus, q.minus}, {q.plus, q.third}, {q.minus, q.ground}, {q.plus, q.ground}})
      add(noise_rate(ctx.s, op, ch, from, to, ctx.d), channel_name(ch.kind));
  }
  out.metadata["qutrit_levels"] = {{"ground", q.ground}, {"minus", q.minus}, {"plus", q.plus}, {"third", q.third}};
  out.metadata["basis"] = basis_json(ctx.s.basis);
  return out;
}

inline TaskOutput task_table1(const RunConfig& c, TaskOutput out) {
  if (c.circuit.phi_ext != 0.0) out.warnings.push_back("table1 evaluates at phi_ext = 0 and at the configured bias");
  CircuitParams row = c.circuit;
  row.phi_ext = 0.0;
  const Table1Result t = reproduce_table1(row, c.noise, c.conventions, c.numerics);
  std::vector<double> values;
  for (const auto& [name, v] : t.report.columns()) {
    out.data.columns.push_back(name);
    values.push_back(v);
  }
  out.data.rows.push_back(values);
  out.data.status.push_back("ok");
  out.metadata["bias_phi_ext"] = t.bias_phi;
  json active = json::array();
  for (const auto& [name, v] : operating_point_rates(t.report)) active.push_back(name);
  out.metadata["T1_sums"] = active;
  return out;
}

inline TaskOutput task_sweep(const RunConfig& c, TaskOutput out) {
  if (c.curves.empty()) {
    out.data = run_sweep(*c.sweep);
    if (c.locate_crossing) {
      CurveResult r = run_curve(*c.sweep, Curve{"main", {}}, true);
      if (r.crossing) out.metadata["crossing"] = {{"value", r.crossing->sweep_parameter_value}, {"gap_GHz", r.crossing->gap}};
      else out.metadata["crossing"] = {{"status", r.crossing_status}};
    }
  } else {
    for (const auto& cv : c.curves) out.curves.push_back(run_curve(*c.sweep, cv, c.locate_crossing));
  }
  return out;
}

inline TaskOutput task_prepare(const RunConfig& c, TaskOutput out) {
  const CircuitParams pe = effective_circuit(c.circuit, c.conventions.capacitance);
  const PreparationEstimate e = preparation_estimate(pe, c.delta_phi, c.leakage, c.numerics);
  out.data.columns = {"delta_phi_Phi0", "gap_a_GHz", "delta_E_GHz", "Gamma_LZ_per_ns", "t_adiabatic_ns", "target_leakage"};
  out.data.rows.push_back({e.delta_phi, e.gap_a, e.delta_E, e.Gamma_LZ_per_ns, e.t_adiabatic, e.target_leakage});
  out.data.status.push_back("ok");
  return out;
}

}  // namespace detail

inline TaskOutput run_task(const RunConfig& c) {
  TaskOutput out;
  out.metadata = run_metadata(c);
  switch (c.task) {
    case Task::Spectrum: out = detail::task_spectrum(c, std::move(out)); break;
    case Task::QutritFit: out = detail::task_qutrit_fit(c, std::move(out)); break;
    case Task::Rates: out = detail::task_rates(c, std::move(out)); break;
    case Task::Table1: out = detail::task_table1(c, std::move(out)); break;
    case Task::Sweep: out = detail::task_sweep(c, std::move(out)); break;
    case Task::Prepare: out = detail::task_prepare(c, std::move(out)); break;
  }
  out.metadata["warnings"] = out.warnings;
  return out;
}

inline json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::IoError, "cannot read config '" + path + "'");
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::SchemaError, "config '" + path + "' is not valid JSON: " + e.what());
  }
}

// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
inline int run_cli(int argc, char** argv) {
  CLI::App app{"fluxbic: fluxonium BIC spectra, qutrit fits and decay rates"};
  app.require_subcommand(1);
  std::string config_path, out_path, format;
  std::vector<std::string> overrides;
  for (const char* name : {"spectrum", "qutrit-fit", "rates", "table1", "sweep", "prepare"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_path, "output file (standard output when omitted)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--override", overrides, "dotted key=value, repeatable");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string task = app.get_subcommands().front()->get_name();
  try {
    json doc = load_json_file(config_path);
    if (!doc.is_object()) fail(ErrorKind::SchemaError, "config root must be an object");
    for (const auto& o : overrides) apply_override(doc, o);
    doc["task"] = task;
    if (!out_path.empty()) doc["output"]["path"] = out_path;
    if (!format.empty()) doc["output"]["format"] = format;
    const RunConfig cfg = parse_config(doc);
    const TaskOutput result = run_task(cfg);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    if (!result.curves.empty()) {
      for (const auto& f : emit_curves(result.curves, cfg.format, cfg.out_path, result.metadata)) std::cerr << "wrote " << f << "\n";
    } else {
      emit_dataset(result.data, cfg.format, cfg.out_path, result.metadata);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_config_error() ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace fluxbic
