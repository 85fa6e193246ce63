// Acceptance run: one PASS/FAIL line per criterion, details indented below it.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <fluxbic/fluxbic.hpp>

using namespace fluxbic;
namespace fs = std::filesystem;

namespace {

const std::string cli = FLUXBIC_CLI_PATH;
const std::string presets = FLUXBIC_PRESETS_DIR;

struct Log {
  std::vector<std::string> lines;
  template <class... A>
  void operator()(const char* fmt, A... a) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, a...);
    lines.emplace_back(buf);
  }
};

bool within_factor(double v, double ref, double f) { return v <= ref * f && v >= ref / f; }

CircuitParams row(double x, double r) {
  CircuitParams p = table1_row(10.0, x, r);
  p.E_Cc = 0.25;
  p.T = 0.015;
  return p;
}

// 1. Tabulated rates, both rows, factor 3, under five minutes.
bool table_rates(Log& log) {
  struct Printed {
    double r;
    std::vector<double> v;  // 11 rates then T1 in ms
  };
  const std::vector<Printed> table{
      {21.74, {1e5, 4e5, 4e3, 1e5, 90, 7e3, 4, 8e2, 20, 1e2, 7e-4, 2e-3}},
      {33.79, {1e3, 2e2, 1e3, 1e3, 2e2, 1e4, 0.2, 2e2, 3e-3, 3e2, 2e-8, 5e-2}},
  };
  bool ok = true;
  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& t : table) {
    const RateReport r = reproduce_table1(table1_row(10.0, 5.0, t.r), NoiseParams{}).report;
    const auto cols = r.columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const bool good = within_factor(cols[i].second, t.v[i], 3.0);
      ok = ok && good;
      log("EJ/EL=%.2f %-22s computed %.3g printed %.3g ratio %.2f%s", t.r, cols[i].first.c_str(), cols[i].second, t.v[i],
          cols[i].second / t.v[i], good ? "" : "  <-- outside factor 3");
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log("runtime %.2f s", secs);
  return ok && secs < 300.0;
}

// 2. Parity protection of |+> at zero flux.
bool selection_rules(Log& log) {
  bool ok = true;
  for (const CircuitParams& p : {row(2.78, 21.74), row(5.0, 21.74), row(5.0, 33.79), row(10.0, 33.79)}) {
    const SpectralResult s = solve_spectrum(p, Numerics{});
    const QutritLevels q = identify_qutrit_levels(s, find_potential_minima(p));
    const HermitianOperator n = build_charge_operator(s.basis, p);
    const FluxOperators f = build_flux_operators(s.basis, p);
    for (const HermitianOperator* op : {&n, &f.theta, &f.sin_theta}) {
      double largest = 0.0;
      for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) largest = std::max(largest, std::abs(op->element(s.state(i), s.state(j))));
      const double forbidden = std::abs(op->element(s.state(q.plus), s.state(q.ground)));
      const bool good = forbidden <= 1e-10 * largest;
      ok = ok && good;
      log("E_J/E_C=%.2f E_J/E_L=%.2f |<+|%s|0>| / max = %.2e", p.E_J / p.E_C, p.E_J / p.E_L, op->label.c_str(),
          forbidden / largest);
    }
    const DerivedParams d = derive_params(p);
    const double wg = golden_rule_waveguide(s, n, q.plus, q.ground, d, p.Z_line).rate;
    // Reference is the allowed |-> -> |0> rate; rates go as the element squared.
    const double wg_ref = golden_rule_waveguide(s, n, q.minus, q.ground, d, p.Z_line).rate;
    double worst = wg / wg_ref;
    for (const NoiseChannel& ch : {NoiseChannel::one_over_f(5e-6, p.T), NoiseChannel::dielectric(2.5e5, p.T),
                                   NoiseChannel::inductive(8e9, p.T)}) {
      const HermitianOperator op = coupling_operator(ch, f.theta, d);
      const double g0 = noise_rate(s, op, ch, q.plus, q.ground, d).rate;
      const double gm = noise_rate(s, op, ch, q.minus, q.ground, d).rate;
      worst = std::max(worst, g0 / gm);
    }
    const bool zero = worst <= 1e-20;
    log("  largest Gamma_+0 / Gamma_-0 over waveguide and noise channels %.2e", worst);
    ok = ok && zero;
  }
  return ok;
}

// 3. Exponential protection along the charging axis at E_J/E_L = 33.79.
bool protection_trend(Log& log) {
  const CircuitParams base = row(5.0, 33.79);
  const AvoidedCrossing c = find_avoided_crossing(base, "ratio.EJ_over_EC", 2.0, 24.0, qutrit_crossing_levels());
  log("odd-sector crossing at E_J/E_C = %.4f (gap %.4f GHz)", c.sweep_parameter_value, c.gap);
  SweepSpec s;
  s.base = base;
  s.axis = "ratio.EJ_over_EC";
  for (double x = 2.0; x < c.sweep_parameter_value; x += 0.5) s.values.push_back(x);
  s.outputs = {"waveguide"};
  const Dataset d = run_sweep(s);
  bool monotone = true, ideal = false;
  int first_bad = -1;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    if (d.status[i] != "ok") {
      log("point %.2f failed: %s", d.rows[i][0], d.status[i].c_str());
      return false;
    }
    if (i > 0 && !(d.rows[i][1] < d.rows[i - 1][1])) {
      monotone = false;
      if (first_bad < 0) first_bad = int(i);
    }
    ideal = ideal || d.rows[i][1] < 1.0;
  }
  const double pm_drop = d.rows.front()[1] / d.rows.back()[1];
  double pm_min = d.rows.front()[1];
  for (const auto& r : d.rows) pm_min = std::min(pm_min, r[1]);
  const double m0_drop = d.rows.front()[2] / d.rows.back()[2];
  log("Gamma_+- from %.3g to %.3g (drop %.3g, minimum %.3g); monotone: %s", d.rows.front()[1], d.rows.back()[1], pm_drop,
      pm_min, monotone ? "yes" : "no");
  if (first_bad >= 0) log("  first increase at E_J/E_C = %.2f: %.3g -> %.3g", d.rows[first_bad][0], d.rows[first_bad - 1][1], d.rows[first_bad][1]);
  log("Gamma_-0 from %.3g to %.3g (drop %.3g, needs < 10)", d.rows.front()[2], d.rows.back()[2], m0_drop);
  log("Gamma_+- below 1/s before the crossing: %s", ideal ? "yes" : "no");
  return monotone && pm_drop >= 1e3 && m0_drop < 10.0 && ideal;
}

// 4. Discrete line modes against the closed-form waveguide rate.
bool discrete_modes(Log& log) {
  CircuitParams p;
  p.E_Cc = 0.25;
  const SpectralResult s = solve_spectrum(p, Numerics{});
  const HermitianOperator n = build_charge_operator(s.basis, p);
  const DerivedParams d = derive_params(p);
  const double exact = golden_rule_waveguide(s, n, 1, 0, d, 50.0).rate;
  const DiscreteModeOptions opt;
  const double l_min = 2.0 * pi / (opt.c0 * 50.0) / (opt.kernel_fraction * transition_omega(s, 1, 0));
  double err = 1.0;
  bool halving = true;
  for (double f : {1.0, 1.1, 1.2, 1.4, 2.0, 4.0}) {
    const double L = l_min * f;
    const double r = discrete_mode_cross_check(s, n, 1, 0, d, 50.0, L, modes_needed(s, 1, 0, 50.0, L));
    const double e = std::abs(r / exact - 1.0);
    halving = halving && (e <= 0.5 * err || e < 1e-13);
    err = e;
    log("L = %.3f m (%d modes): relative deviation %.2e, trapezoid estimate %.2e", L, modes_needed(s, 1, 0, 50.0, L), e,
        2.0 * std::exp(-2.0 * pi * pi * f * f));
  }
  log("Gamma_-0 closed form %.4g /s", exact);
  return halving && err < 1e-2;
}

// 5. Phase grid and oscillator ladder agree.
bool cross_basis(Log& log) {
  double worst = 0.0;
  for (double r : {17.31, 21.74, 33.79})
    for (double x : {2.78, 5.0, 10.0}) {
      const CircuitParams p = table1_row(10.0, x, r);
      const RVector g = diagonalize(build_hamiltonian(p, BasisSpec::phase_grid()), 6).energies;
      const RVector l = diagonalize(build_hamiltonian(p, BasisSpec::oscillator_ladder()), 6).energies;
      const double dev = (g - l).cwiseAbs().maxCoeff();
      worst = std::max(worst, dev);
      log("E_J/E_L=%.2f E_J/E_C=%.2f max |dE| = %.2e GHz", r, x, dev);
    }
  return worst <= 1e-6;
}

double others_over(const QutritDecomposition& d, const std::string& keep) {
  double o = 0.0;
  for (const auto& [name, c] : d.coefficients)
    if (name != keep) o = std::max(o, std::abs(c));
  return o / std::abs(d.coefficient(keep));
}

// 6. Exact decomposition everywhere, Sy / Sz dominance in the heavy regime.
bool decomposition(Log& log) {
  bool ok = true;
  struct Point {
    double x, r;
    bool charge, flux;  // dominance checks applied
  };
  const std::vector<Point> points{{2.78, 21.74, false, false}, {5.0, 21.74, false, false}, {8.0, 21.74, true, false},
                                  {5.0, 33.79, false, false},  {8.0, 33.79, true, true},   {10.0, 33.79, true, true},
                                  {12.0, 33.79, true, true},   {16.0, 33.79, true, true}};
  for (const Point& pt : points) {
    const CircuitParams p = table1_row(10.0, pt.x, pt.r);
    const SpectralResult s = solve_spectrum(p, Numerics{});
    const QutritBasis q = qutrit_basis_from_eigenstates(s);
    const FluxOperators f = build_flux_operators(s.basis, p);
    const QutritDecomposition dh = decompose_operator(build_hamiltonian(p, s.basis), q);
    const QutritDecomposition dn = decompose_operator(build_charge_operator(s.basis, p), q);
    const QutritDecomposition ds = decompose_operator(f.sin_theta, q);
    const double res = std::max({dh.residual, dn.residual, ds.residual});
    const double rn = others_over(dn, "Sy"), rs = others_over(ds, "Sz");
    ok = ok && res <= 1e-9;
    if (pt.charge) ok = ok && rn < 0.1;
    if (pt.flux) ok = ok && rs < 0.1;
    log("E_J/E_C=%5.2f E_J/E_L=%.2f residual %.1e  n others/Sy %.3f%s  sin others/Sz %.3f%s", pt.x, pt.r, res, rn,
        pt.charge ? (rn < 0.1 ? " ok" : " FAIL") : "", rs, pt.flux ? (rs < 0.1 ? " ok" : " FAIL") : "");
  }
  return ok;
}

// 7. Analytic three-well model against the numerical decomposition.
bool analytic_agreement(Log& log) {
  const CircuitParams p = table1_row(10.0, 2.78, 21.74);
  const SpectralResult s = solve_spectrum(p, Numerics{});
  const QutritBasis q = qutrit_basis_from_eigenstates(s);
  const FluxOperators f = build_flux_operators(s.basis, p);
  const AnalyticQutritModel a = analytic_qutrit_model(p, s, f);
  const SpinTermSet terms = SpinTermSet::full();
  const HermitianOperator h = build_hamiltonian(p, s.basis), n = build_charge_operator(s.basis, p);
  struct Pair {
    const HermitianOperator* op;
    Matrix3c model;
  };
  bool support_ok = true, magnitude_ok = true;
  for (const Pair& pr : {Pair{&h, a.H_eff}, Pair{&n, a.n_eff}, Pair{&f.sin_theta, a.sin_eff}, Pair{&f.theta, a.theta_eff}}) {
    const QutritDecomposition dn = decompose_operator(*pr.op, q, terms);
    const QutritDecomposition da = decompose_matrix(pr.model, terms, pr.op->label);
    double scale = 0.0;
    for (const auto& [name, c] : dn.coefficients)
      if (name != "I") scale = std::max(scale, std::abs(c));
    for (const auto& [name, c] : dn.coefficients) {
      if (name == "I") continue;  // energy reference differs by construction
      const double m = da.coefficient(name);
      const bool num_nz = std::abs(c) > 1e-9 * scale, mod_nz = std::abs(m) > 1e-9 * scale;
      if (num_nz != mod_nz) support_ok = false;
      if (!num_nz && !mod_nz) continue;
      const double rel = std::abs(m - c) / std::abs(c);
      const bool good = rel <= 0.5;
      magnitude_ok = magnitude_ok && good;
      log("%-9s %-11s numerical %+.4f analytic %+.4f rel dev %.2f%s", pr.op->label.c_str(), name.c_str(), c, m, rel,
          good ? "" : "  <-- over 50%");
    }
  }
  log("term support identical: %s; magnitudes within 50%%: %s", support_ok ? "yes" : "no", magnitude_ok ? "yes" : "no");
  return support_ok && magnitude_ok;
}

// 8. <3|L> peaks where the odd-sector levels anticross.
bool overlap_peak(Log& log) {
  SweepSpec s;
  s.base = table1_row(10.0, 5.0, 21.74);
  s.axis = "ratio.EJ_over_EC";
  const double step = 0.25;
  for (double x = 2.0; x <= 14.0 + 1e-9; x += step) s.values.push_back(x);
  s.outputs = {"overlaps"};
  const Dataset d = run_sweep(s);
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < d.rows.size(); ++i) {
    const double l = std::abs(d.rows[i - 1][1]), c = std::abs(d.rows[i][1]), r = std::abs(d.rows[i + 1][1]);
    if (c > l && c > r) peaks.push_back(d.rows[i][0]);
  }
  const AvoidedCrossing c = find_avoided_crossing(s.base, s.axis, 2.0, 14.0, qutrit_crossing_levels());
  log("interior maxima of |a0|: %zu", peaks.size());
  for (double x : peaks) log("  at E_J/E_C = %.2f", x);
  log("crossing at %.4f, sweep step %.2f", c.sweep_parameter_value, step);
  return peaks.size() == 1 && std::abs(peaks[0] - c.sweep_parameter_value) <= step;
}

// 9. Thermal excitation into |3> and detailed balance.
bool thermal_upward(Log& log) {
  const Table1Result t = reproduce_table1(table1_row(10.0, 5.0, 33.79), NoiseParams{});
  const double up = t.report.Gamma_p3;
  log("Gamma_+3 up at 15 mK, E_J/E_L=33.79: %.3g /s (lifetime %.3g ms)", up, 1e3 / up);
  bool ok = up <= 1e3;
  double worst = 0.0;
  for (double r : {21.74, 33.79}) {
    const CircuitParams p = row(5.0, r);
    const SpectralResult s = solve_spectrum(p, Numerics{});
    const HermitianOperator n = build_charge_operator(s.basis, p);
    const DerivedParams d = derive_params(p);
    for (auto [i, j] : {std::pair{3, 2}, {2, 1}, {1, 0}, {4, 2}})
      for (double T : {0.005, 0.01, 0.015, 0.03, 0.06, 0.1}) {
        auto [down, upr] = thermal_waveguide_rates(s, n, i, j, d, p.Z_line, T);
        const double expect = std::exp(-constants.hbar * transition_omega(s, i, j) / (constants.k_B * T));
        worst = std::max(worst, std::abs(upr.rate / down.rate / expect - 1.0));
      }
  }
  log("worst detailed-balance deviation %.2e over 48 (pair, T) cases", worst);
  return ok && worst <= 1e-9;
}

// 10. Quasi-static amplitude and Ci.
bool quasi_static(Log& log) {
  long double sum = 0.0L, term = 1.0L;
  for (int k = 1; k < 60; ++k) {
    term *= -1.0L / ((2.0L * k - 1.0L) * (2.0L * k));
    sum += term / (2.0L * k);
  }
  const double ci1 = double(0.57721566490153286060651209L + sum);
  const double ratio = quasi_static_sigma(1.0, 1.0, 1e3);
  log("Ci(1) = %.15f, series %.15f", cosine_integral(1.0), ci1);
  log("sigma/A at cutoff ratio 1e3 = %.4f", ratio);
  return std::abs(cosine_integral(1.0) - ci1) <= 1e-9 && ratio >= 0.3 && ratio <= 1.0;
}

// 11. Landau-Zener preparation time.
bool preparation(Log& log) {
  const PreparationEstimate e = preparation_estimate(table1_row(10.0, 5.0, 33.79), 1e-3);
  log("a = %.4f MHz, dE = %.4f MHz, Gamma_LZ = %.4f /ns, t = %.2f ns", e.gap_a * 1e3, e.delta_E * 1e3, e.Gamma_LZ_per_ns,
      e.t_adiabatic);
  return e.t_adiabatic >= 10.0 && e.t_adiabatic <= 1e3;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

std::string task_for(const fs::path& preset) {
  const std::string stem = preset.stem().string();
  if (stem.rfind("row", 0) == 0) return "table1";
  if (stem == "prepare") return "prepare";
  if (stem == "qutrit_fit") return "qutrit-fit";
  if (stem.rfind("rates", 0) == 0) return "rates";
  if (stem.rfind("spectrum", 0) == 0) return "spectrum";
  return "sweep";
}

// Every file a run writes, by name relative to its directory.
std::vector<std::pair<std::string, std::string>> files_in(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::directory_iterator(dir)) out.emplace_back(e.path().filename().string(), slurp(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

// 12. Byte-identical repeated runs of every preset.
bool determinism(Log& log) {
  const fs::path root = fs::temp_directory_path() / "fluxbic_acceptance";
  bool ok = true;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(presets))
    if (e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& preset : files) {
    std::vector<std::pair<std::string, std::string>> runs[2];
    bool ran = true;
    for (int k = 0; k < 2; ++k) {
      // Same output path both times: the path is part of the recorded configuration.
      const fs::path dir = root / "run";
      fs::remove_all(dir);
      fs::create_directories(dir);
      const std::string cmd = "\"" + cli + "\" " + task_for(preset) + " --config \"" + preset.string() + "\" --out \"" +
                              (dir / "out.csv").string() + "\" 2> /dev/null";
      const int st = std::system(cmd.c_str());
      ran = ran && WIFEXITED(st) && WEXITSTATUS(st) == 0;
      runs[k] = files_in(dir);
    }
    const bool same = ran && runs[0] == runs[1] && !runs[0].empty();
    ok = ok && same;
    log("%-28s %zu files, %s", preset.filename().string().c_str(), runs[0].size(),
        !ran ? "run failed" : same ? "identical" : "DIFFER");
  }
  fs::remove_all(root);
  return ok;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<bool(Log&)>>> criteria{
      {"tabulated rates within a factor of 3", table_rates},
      {"parity selection rules at zero flux", selection_rules},
      {"exponential protection trend", protection_trend},
      {"discrete-mode golden-rule oracle", discrete_modes},
      {"cross-basis spectral agreement", cross_basis},
      {"qutrit decomposition fidelity", decomposition},
      {"analytic vs numerical qutrit operators", analytic_agreement},
      {"a0 peak at the avoided crossing", overlap_peak},
      {"thermal upward rates and detailed balance", thermal_upward},
      {"quasi-static flux amplitude", quasi_static},
      {"preparation time estimate", preparation},
      {"deterministic preset output", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Log log;
    bool pass = false;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      pass = criteria[i].second(log);
    } catch (const std::exception& e) {
      log("exception: %s", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s (%.1f s)\n", pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs);
    for (const auto& l : log.lines) std::printf("       %s\n", l.c_str());
    std::fflush(stdout);
    failed += pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
