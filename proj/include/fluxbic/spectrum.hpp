#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "operators.hpp"

namespace fluxbic {

enum class Parity { Even, Odd, Undefined };

inline const char* parity_name(Parity p) {
  return p == Parity::Even ? "Even" : p == Parity::Odd ? "Odd" : "Undefined";
}

struct SpectralResult {
  RVector energies;  // GHz, ascending
  CMatrix states;    // columns in the build basis
  std::vector<Parity> parities;
  BasisSpec basis;
  int converged_dim = 0;
  double tol_achieved = std::numeric_limits<double>::quiet_NaN();
  std::optional<CircuitParams> circuit;

  int size() const { return static_cast<int>(energies.size()); }
  CVector state(int i) const { return states.col(i); }
  double phi_ext() const { return circuit ? circuit->phi_ext : 0.0; }
};

struct ConvergenceCertificate {
  BasisSpec basis;
  int k = 0;
  double tol_achieved = 0.0;
  CircuitParams circuit;
};

inline constexpr double default_parity_threshold = 0.999;

// Parity from <psi|P|psi>; Undefined away from integer flux.
inline SpectralResult label_states(SpectralResult r, double threshold = default_parity_threshold) {
  r.parities.assign(r.size(), Parity::Undefined);
  if (!is_symmetric_point(r.phi_ext())) return r;
  const CircuitParams p = r.circuit.value_or(CircuitParams{});
  PhaseRepresentation rep(r.basis, p);
  for (int i = 0; i < r.size(); ++i) {
    CVector psi = r.state(i);
    const double expect = psi.dot(rep.apply_parity(psi)).real();
    if (std::abs(expect) < threshold)
      fail(ErrorKind::AmbiguousParity, "state " + std::to_string(i) + " has <P> = " + std::to_string(expect));
    r.parities[i] = expect > 0 ? Parity::Even : Parity::Odd;
  }
  return r;
}

// Lowest k eigenpairs, no convergence certificate attached.
inline SpectralResult diagonalize(const HermitianOperator& h, int k) {
  if (k < 1 || k > h.dim() / 4) fail(ErrorKind::InvalidArgument, "k must satisfy 1 <= k <= dim/4");
  SpectralResult r;
  r.basis = h.basis;
  r.circuit = h.circuit;
  r.converged_dim = h.dim();
  if (h.entries.imag().cwiseAbs().maxCoeff() == 0.0) {
    auto ep = lowest_eigenpairs(RMatrix(h.entries.real()), k);
    r.energies = ep.values;
    r.states = ep.vectors.cast<cplx>();
  } else {
    auto ep = lowest_eigenpairs(h.entries, k);
    r.energies = ep.values;
    r.states = ep.vectors;
  }
  for (int i = 0; i < k; ++i) fix_phase(r.states.col(i));
  r.parities.assign(k, Parity::Undefined);
  return r;
}

inline SpectralResult diagonalize(const HermitianOperator& h, int k, const ConvergenceCertificate& cert) {
  if (!(cert.basis == h.basis) || k > cert.k || !h.circuit || !(*h.circuit == cert.circuit))
    fail(ErrorKind::ConvergenceNotCertified, "no convergence certificate for " + h.label + " in " + basis_name(h.basis));
  SpectralResult r = diagonalize(h, k);
  r.tol_achieved = cert.tol_achieved;
  return r;
}

// First rung whose lowest-k energies move by less than tol on the next rung.
inline ConvergenceCertificate check_convergence(const CircuitParams& p, const std::vector<BasisSpec>& ladder, int k,
                                                double tol) {
  if (ladder.size() < 2) fail(ErrorKind::InvalidArgument, "convergence ladder needs at least two rungs");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (ladder[i].dim <= ladder[i - 1].dim) fail(ErrorKind::InvalidArgument, "convergence ladder must increase in dim");
  RVector prev = diagonalize(build_hamiltonian(p, ladder[0]), k).energies;
  double last_change = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    RVector cur = diagonalize(build_hamiltonian(p, ladder[i]), k).energies;
    last_change = (cur - prev).cwiseAbs().maxCoeff();
    if (last_change < tol) return {ladder[i - 1], k, last_change, p};
    prev = std::move(cur);
  }
  fail(ErrorKind::NotConverged, "energies still move by " + std::to_string(last_change) + " GHz at dim " +
                                    std::to_string(ladder.back().dim));
}

struct Numerics {
  std::vector<BasisSpec> ladder{BasisSpec::oscillator_ladder(200), BasisSpec::oscillator_ladder(240)};
  double tol = 1e-8;  // GHz
  int levels = 8;
  double parity_threshold = default_parity_threshold;

  static Numerics phase_grid() {
    Numerics n;
    n.ladder = {BasisSpec::phase_grid(1024), BasisSpec::phase_grid(1536)};
    return n;
  }
};

// Certified, labeled spectrum of the lowest num.levels states.
inline SpectralResult solve_spectrum(const CircuitParams& p, const Numerics& num) {
  ConvergenceCertificate cert = check_convergence(p, num.ladder, num.levels, num.tol);
  return label_states(diagonalize(build_hamiltonian(p, cert.basis), num.levels, cert), num.parity_threshold);
}

struct PotentialMinima {
  std::vector<double> locations;   // theta, ascending
  std::vector<double> depths;      // U(theta_min), GHz
  std::vector<double> curvatures;  // U''(theta_min), GHz
  std::vector<double> barriers;    // local maxima of U, ascending

  int center() const {
    int best = 0;
    for (int i = 1; i < int(locations.size()); ++i)
      if (std::abs(locations[i]) < std::abs(locations[best])) best = i;
    return best;
  }
  int left() const { return center() - 1; }
  int right() const { return center() + 1; }
  bool has_side_wells() const { return center() > 0 && center() + 1 < int(locations.size()); }

  // Barrier top between the central and right wells.
  double right_barrier() const {
    const double lo = locations[center()], hi = locations[right()];
    for (double b : barriers)
      if (b > lo && b < hi) return b;
    return 0.5 * (lo + hi);
  }
  double left_barrier() const {
    const double lo = locations[left()], hi = locations[center()];
    for (double b : barriers)
      if (b > lo && b < hi) return b;
    return 0.5 * (lo + hi);
  }
};

namespace detail {

inline double bisect_slope(const CircuitParams& p, double a, double b) {
  double fa = potential_slope(p, a);
  for (int it = 0; it < 200 && b - a > 1e-14; ++it) {
    const double m = 0.5 * (a + b);
    const double fm = potential_slope(p, m);
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

inline PotentialMinima find_potential_minima(const CircuitParams& p) {
  p.validate();
  const double step = 0.005;
  const double reach = p.E_J / p.E_L + 0.1;  // |U'| > 0 beyond this
  std::vector<double> mins, maxs;
  const bool symmetric = is_symmetric_point(p.phi_ext);
  const double start = symmetric ? 0.0 : -reach;
  const int n = static_cast<int>(std::ceil((reach - start) / step));
  double a = start + (symmetric ? 1e-9 : 0.0);
  double fa = potential_slope(p, a);
  for (int i = 1; i <= n; ++i) {
    const double b = start + i * step;
    const double fb = potential_slope(p, b);
    if (fa < 0 && fb >= 0) mins.push_back(detail::bisect_slope(p, a, b));
    if (fa > 0 && fb <= 0) maxs.push_back(detail::bisect_slope(p, a, b));
    a = b;
    fa = fb;
  }
  if (symmetric) {
    std::vector<double> m{0.0}, x;
    for (double t : mins) {
      m.push_back(t);
      m.push_back(-t);
    }
    for (double t : maxs) {
      x.push_back(t);
      x.push_back(-t);
    }
    mins = std::move(m);
    maxs = std::move(x);
  }
  std::sort(mins.begin(), mins.end());
  std::sort(maxs.begin(), maxs.end());
  if (mins.size() < 2) fail(ErrorKind::NoSideWells, "potential has a single minimum");
  PotentialMinima out;
  out.locations = mins;
  out.barriers = maxs;
  for (double t : mins) {
    out.depths.push_back(potential(p, t));
    out.curvatures.push_back(potential_curvature(p, t));
  }
  return out;
}

// Picks a level by global index or by index within a parity sector.
struct LevelSelector {
  enum class Kind { Index, Even, Odd } kind = Kind::Index;
  int k = 0;

  static LevelSelector index(int k) { return {Kind::Index, k}; }
  static LevelSelector even(int k) { return {Kind::Even, k}; }
  static LevelSelector odd(int k) { return {Kind::Odd, k}; }

  int resolve(const SpectralResult& r) const {
    if (kind == Kind::Index) {
      if (k < 0 || k >= r.size()) fail(ErrorKind::InvalidArgument, "level index out of range");
      return k;
    }
    const Parity want = kind == Kind::Even ? Parity::Even : Parity::Odd;
    int seen = 0;
    for (int i = 0; i < r.size(); ++i) {
      if (r.parities[i] == Parity::Undefined) fail(ErrorKind::InvalidArgument, "parity sector needs phi_ext = 0");
      if (r.parities[i] == want && seen++ == k) return i;
    }
    fail(ErrorKind::InvalidArgument, "parity sector holds fewer than " + std::to_string(k + 1) + " computed levels");
  }
};

struct AvoidedCrossing {
  double sweep_parameter_value = 0.0;
  double gap = 0.0;  // GHz
  std::pair<int, int> level_pair{0, 0};
};

inline double level_gap(const SpectralResult& r, const std::pair<LevelSelector, LevelSelector>& levels) {
  return r.energies[levels.second.resolve(r)] - r.energies[levels.first.resolve(r)];
}

// Minimum of E_j - E_i along one parameter axis: coarse scan, then golden section.
inline AvoidedCrossing find_avoided_crossing(const CircuitParams& tmpl, const std::string& axis, double lo, double hi,
                                             const std::pair<LevelSelector, LevelSelector>& levels,
                                             const Numerics& num = {}, int points = 64) {
  if (points < 64) fail(ErrorKind::InvalidArgument, "crossing search needs at least 64 points");
  if (!(hi > lo)) fail(ErrorKind::InvalidArgument, "empty sweep range");
  auto gap_at = [&](double x) { return level_gap(solve_spectrum(with_parameter(tmpl, axis, x), num), levels); };
  std::vector<double> xs(points), gs(points);
  for (int i = 0; i < points; ++i) {
    xs[i] = lo + (hi - lo) * i / (points - 1);
    gs[i] = gap_at(xs[i]);
  }
  const int best = static_cast<int>(std::min_element(gs.begin(), gs.end()) - gs.begin());
  const double scale = *std::max_element(gs.begin(), gs.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  const double significance = 1e-9 * std::abs(scale) + 1e-12;
  if (best == 0 || best == points - 1 || std::min(gs.front(), gs.back()) - gs[best] <= significance)
    fail(ErrorKind::NoMinimumInRange, "no interior gap minimum on " + axis);
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = xs[best - 1], b = xs[best + 1];
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double gc = gap_at(c), gd = gap_at(d);
  while (b - a > 1e-7 * std::max(1.0, std::abs(xs[best]))) {
    if (gc < gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - invphi * (b - a);
      gc = gap_at(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + invphi * (b - a);
      gd = gap_at(d);
    }
  }
  const double x = 0.5 * (a + b);
  SpectralResult r = solve_spectrum(with_parameter(tmpl, axis, x), num);
  AvoidedCrossing out;
  out.sweep_parameter_value = x;
  out.level_pair = {levels.first.resolve(r), levels.second.resolve(r)};
  out.gap = r.energies[out.level_pair.second] - r.energies[out.level_pair.first];
  if (out.gap > gs[best]) {
    out.sweep_parameter_value = xs[best];
    out.gap = gs[best];
  }
  return out;
}

// The qutrit levels picked by character: |-> and |+> are the odd and even states with
// the most weight outside the central well, |3> the lowest remaining state.
struct QutritLevels {
  int ground = 0;
  int minus = 1;
  int plus = 2;
  int third = 3;
  int fourth = 4;
};

inline double side_weight(const SpectralResult& r, int i, const PhaseRepresentation& rep, const PotentialMinima& m) {
  const double lb = m.left_barrier(), rb = m.right_barrier();
  return rep.probability_where(r.state(i), [&](double t) { return t < lb || t > rb; });
}

inline QutritLevels identify_qutrit_levels(const SpectralResult& r, const PotentialMinima& m) {
  if (!m.has_side_wells()) fail(ErrorKind::NoSideWells, "qutrit needs three wells");
  if (r.size() < 5) fail(ErrorKind::InvalidArgument, "qutrit identification needs at least 5 levels");
  if (r.parities.empty() || r.parities[0] != Parity::Even)
    fail(ErrorKind::WrongParityOrder, "qutrit identification needs parity labels with an even ground state");
  PhaseRepresentation rep(r.basis, r.circuit.value_or(CircuitParams{}));
  std::vector<int> odd, even;
  for (int i = 1; i < r.size(); ++i) (r.parities[i] == Parity::Odd ? odd : even).push_back(i);
  if (odd.size() < 2 || even.size() < 2) fail(ErrorKind::InvalidArgument, "too few levels per parity sector");
  auto pick = [&](const std::vector<int>& sector) {
    return side_weight(r, sector[0], rep, m) >= side_weight(r, sector[1], rep, m) ? sector[0] : sector[1];
  };
  QutritLevels q;
  q.ground = 0;
  q.minus = pick(odd);
  q.plus = pick(even);
  std::vector<int> rest;
  for (int i = 1; i < r.size(); ++i)
    if (i != q.minus && i != q.plus) rest.push_back(i);
  q.third = rest[0];
  q.fourth = rest[1];
  return q;
}

// Follows levels of a reference spectrum into a nearby one by maximum overlap.
inline std::vector<int> track_levels(const SpectralResult& reference, const SpectralResult& target,
                                     const std::vector<int>& levels, double threshold = 0.5) {
  if (!(reference.basis == target.basis)) fail(ErrorKind::InvalidArgument, "tracking needs a common basis");
  std::vector<int> out;
  for (int i : levels) {
    CVector ref = reference.state(i);
    int best = -1;
    double best_overlap = -1.0;
    for (int j = 0; j < target.size(); ++j) {
      const double o = std::abs(ref.dot(target.state(j)));
      if (o > best_overlap) {
        best_overlap = o;
        best = j;
      }
    }
    if (best_overlap < threshold)
      fail(ErrorKind::StateTrackingLost, "level " + std::to_string(i) + " max overlap " + std::to_string(best_overlap));
    if (std::find(out.begin(), out.end(), best) != out.end())
      fail(ErrorKind::StateTrackingLost, "two levels track onto state " + std::to_string(best));
    out.push_back(best);
  }
  return out;
}

}  // namespace fluxbic
