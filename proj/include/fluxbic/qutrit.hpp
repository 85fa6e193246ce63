#pragma once

#include <array>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "spectrum.hpp"

namespace fluxbic {

using Matrix3c = Eigen::Matrix3cd;

// Standard spin-1 matrices on the ordered basis (|-1>, |0>, |1>).
struct Spin1 {
  Matrix3c Sz, Sp, Sm, Sx, Sy, I;
  Spin1() {
    const double r2 = std::sqrt(2.0);
    I = Matrix3c::Identity();
    Sz = Matrix3c::Zero();
    Sz(0, 0) = -1.0;
    Sz(2, 2) = 1.0;
    Sp = Matrix3c::Zero();
    Sp(1, 0) = r2;
    Sp(2, 1) = r2;
    Sm = Sp.adjoint();
    Sx = 0.5 * (Sp + Sm);
    Sy = cplx(0, -0.5) * (Sp - Sm);
  }
};

struct SpinTerm {
  std::string name;
  Matrix3c matrix;
};

struct SpinTermSet {
  std::vector<SpinTerm> terms;

  static SpinTermSet full() {
    Spin1 s;
    return {{{"I", s.I},
             {"Sx", s.Sx},
             {"Sy", s.Sy},
             {"Sz", s.Sz},
             {"Sz2", s.Sz * s.Sz},
             {"SxSz+SzSx", s.Sx * s.Sz + s.Sz * s.Sx},
             {"SySz+SzSy", s.Sy * s.Sz + s.Sz * s.Sy},
             {"Sp2+Sm2", s.Sp * s.Sp + s.Sm * s.Sm},
             {"i(Sp2-Sm2)", cplx(0, 1) * (s.Sp * s.Sp - s.Sm * s.Sm)}}};
  }

  SpinTermSet subset(const std::vector<std::string>& names) const {
    SpinTermSet out;
    for (const auto& n : names) {
      bool found = false;
      for (const auto& t : terms)
        if (t.name == n) {
          out.terms.push_back(t);
          found = true;
        }
      if (!found) fail(ErrorKind::InvalidArgument, "unknown spin term '" + n + "'");
    }
    return out;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& t : terms) out.push_back(t.name);
    return out;
  }
};

// Terms odd under the reflection |-1> <-> |1>.
inline bool is_parity_odd_term(const std::string& name) {
  return name == "Sz" || name == "SxSz+SzSx" || name == "Sy" || name == "i(Sp2-Sm2)";
}

struct QutritDecomposition {
  std::vector<std::pair<std::string, double>> coefficients;
  double residual = 0.0;
  double imag_leak = 0.0;  // largest imaginary part of a trace projection
  std::string operator_label;

  double coefficient(const std::string& name) const {
    for (const auto& [n, c] : coefficients)
      if (n == name) return c;
    fail(ErrorKind::InvalidArgument, "no coefficient '" + name + "'");
  }

  Matrix3c rebuild(const SpinTermSet& terms) const {
    Matrix3c m = Matrix3c::Zero();
    for (const auto& t : terms.terms) m += coefficient(t.name) * t.matrix;
    return m;
  }
};

// Least squares under the trace inner product <A,B> = Re tr(A^dagger B).
inline QutritDecomposition decompose_matrix(const Matrix3c& m, const SpinTermSet& terms, std::string label) {
  const int k = static_cast<int>(terms.terms.size());
  if (k == 0) fail(ErrorKind::SingularTermSet, "empty term set");
  RMatrix gram(k, k);
  RVector rhs(k);
  double leak = 0.0;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) gram(a, b) = (terms.terms[a].matrix.adjoint() * terms.terms[b].matrix).trace().real();
    const cplx proj = (terms.terms[a].matrix.adjoint() * m).trace();
    rhs[a] = proj.real();
    leak = std::max(leak, std::abs(proj.imag()));
  }
  Eigen::SelfAdjointEigenSolver<RMatrix> es(gram);
  if (es.eigenvalues().minCoeff() < 1e-10 * es.eigenvalues().maxCoeff())
    fail(ErrorKind::SingularTermSet, "term Gram matrix is singular");
  RVector c = es.eigenvectors() * (es.eigenvectors().transpose() * rhs).cwiseQuotient(es.eigenvalues());
  QutritDecomposition out;
  out.operator_label = std::move(label);
  out.imag_leak = leak;
  Matrix3c fit = Matrix3c::Zero();
  for (int a = 0; a < k; ++a) {
    out.coefficients.emplace_back(terms.terms[a].name, c[a]);
    fit += c[a] * terms.terms[a].matrix;
  }
  out.residual = (m - fit).norm();
  return out;
}

enum class QutritConstruction { FromEigenstates, FromGramSchmidt };

struct QutritBasis {
  CMatrix vectors;  // dim x 3, columns |-1>, |0>, |1>
  BasisSpec basis;
  QutritConstruction construction = QutritConstruction::FromEigenstates;
  std::array<double, 3> localization{};  // P(|-1>, theta<0), P(|0>, central well), P(|1>, theta>0)

  Matrix3c project(const HermitianOperator& op) const {
    if (!(op.basis == basis)) fail(ErrorKind::InvalidArgument, "operator and qutrit basis use different build bases");
    return vectors.adjoint() * op.entries * vectors;
  }
};

inline QutritDecomposition decompose_operator(const HermitianOperator& op, const QutritBasis& q,
                                              const SpinTermSet& terms = SpinTermSet::full()) {
  return decompose_matrix(q.project(op), terms, op.label);
}

namespace detail {

inline std::array<double, 3> localization(const CMatrix& v, const PhaseRepresentation& rep, const PotentialMinima& m) {
  const double lb = m.left_barrier(), rb = m.right_barrier();
  return {rep.probability_where(v.col(0), [](double t) { return t < 0; }),
          rep.probability_where(v.col(1), [&](double t) { return t > lb && t < rb; }),
          rep.probability_where(v.col(2), [](double t) { return t > 0; })};
}

}  // namespace detail

// |0> = ground, |+-1> = (|+> +- |->)/sqrt(2) with |1> on the right.
inline QutritBasis qutrit_basis_from_eigenstates(const SpectralResult& spec) {
  if (!is_symmetric_point(spec.phi_ext()) || spec.size() < 3 || spec.parities.size() < 3 ||
      spec.parities[0] != Parity::Even || spec.parities[1] != Parity::Odd || spec.parities[2] != Parity::Even)
    fail(ErrorKind::WrongParityOrder, "lowest three states must have parities (Even, Odd, Even) at phi_ext = 0");
  const CircuitParams p = spec.circuit.value_or(CircuitParams{});
  PhaseRepresentation rep(spec.basis, p);
  const double r2 = std::sqrt(2.0);
  QutritBasis q;
  q.basis = spec.basis;
  q.construction = QutritConstruction::FromEigenstates;
  q.vectors.resize(spec.basis.dim, 3);
  q.vectors.col(0) = (spec.state(2) - spec.state(1)) / r2;
  q.vectors.col(1) = spec.state(0);
  q.vectors.col(2) = (spec.state(2) + spec.state(1)) / r2;
  if (rep.probability_where(q.vectors.col(2), [](double t) { return t > 0; }) < 0.5) q.vectors.col(0).swap(q.vectors.col(2));
  q.localization = detail::localization(q.vectors, rep, find_potential_minima(p));
  const double need = p.E_J / p.E_C >= 2.0 ? 0.9 : 0.5;
  if (q.localization[0] < need || q.localization[2] < need)
    fail(ErrorKind::QutritLocalizationFailed,
         "side states hold only " + std::to_string(std::min(q.localization[0], q.localization[2])) + " on their half-line");
  return q;
}

struct WellStates {
  CVector left, center, right;
  std::array<double, 3> centers{};
  std::array<double, 3> widths{};    // theta spread of each Gaussian
  std::array<double, 3> energies{};  // GHz, local harmonic ground energy
  double overlap_LR = 0.0, overlap_L0 = 0.0, overlap_R0 = 0.0;
  bool low_confidence = false;
  BasisSpec basis;
};

inline constexpr double well_overlap_threshold = 0.05;

// Ground Gaussians of the local harmonic wells around the central minimum and its neighbours.
inline WellStates gaussian_well_states(const CircuitParams& p, const PotentialMinima& m, const BasisSpec& b) {
  if (!m.has_side_wells()) fail(ErrorKind::NoSideWells, "gaussian wells need three minima");
  PhaseRepresentation rep(b, p);
  WellStates w;
  w.basis = b;
  const std::array<int, 3> idx{m.left(), m.center(), m.right()};
  std::array<CVector, 3> states;
  for (int s = 0; s < 3; ++s) {
    const double c = m.locations[idx[s]];
    const double curv = m.curvatures[idx[s]];
    const double width = std::pow(8.0 * p.E_C / curv, 0.25) / std::sqrt(2.0);
    w.centers[s] = c;
    w.widths[s] = width;
    w.energies[s] = m.depths[idx[s]] + 0.5 * std::sqrt(8.0 * p.E_C * curv);
    states[s] = rep.sample([=](double t) { return std::exp(-(t - c) * (t - c) / (4.0 * width * width)); });
  }
  w.left = states[0];
  w.center = states[1];
  w.right = states[2];
  w.overlap_LR = std::abs(w.left.dot(w.right));
  w.overlap_L0 = std::abs(w.left.dot(w.center));
  w.overlap_R0 = std::abs(w.right.dot(w.center));
  w.low_confidence = std::max({w.overlap_LR, w.overlap_L0, w.overlap_R0}) > well_overlap_threshold;
  return w;
}

struct GramSchmidtResult {
  QutritBasis basis;
  double a0 = 0.0;  // <3|L>
  double a1 = 0.0;  // <4|L>, when highest_level = 4
  CVector ground, minus, plus;  // approximate eigenstates rebuilt from the well states
  std::array<double, 3> fidelities{};  // against the exact ground, |->, |+>
  QutritLevels levels;
};

// Wells orthogonalized against |3>..|highest_level>, then symmetrically among themselves.
inline GramSchmidtResult gram_schmidt_qutrit(const WellStates& w, const SpectralResult& spec, int highest_level,
                                             const QutritLevels& levels) {
  if (highest_level != 3 && highest_level != 4) fail(ErrorKind::InvalidArgument, "highest_level must be 3 or 4");
  if (!is_symmetric_point(spec.phi_ext())) fail(ErrorKind::InvalidArgument, "Gram-Schmidt construction needs phi_ext = 0");
  if (!(w.basis == spec.basis)) fail(ErrorKind::InvalidArgument, "well states and spectrum use different bases");
  GramSchmidtResult out;
  out.levels = levels;
  std::vector<CVector> excited{spec.state(levels.third)};
  if (highest_level == 4) excited.push_back(spec.state(levels.fourth));
  out.a0 = excited[0].dot(w.left).real();
  out.a1 = highest_level == 4 ? excited[1].dot(w.left).real() : 0.0;

  CMatrix v(spec.basis.dim, 3);
  v.col(0) = w.left;
  v.col(1) = w.center;
  v.col(2) = w.right;
  for (const auto& e : excited) v -= e * (e.adjoint() * v);
  Matrix3c s = v.adjoint() * v;
  Eigen::SelfAdjointEigenSolver<Matrix3c> es(s);
  Matrix3c inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  out.basis.vectors = v * inv_sqrt;
  out.basis.basis = spec.basis;
  out.basis.construction = QutritConstruction::FromGramSchmidt;
  const CircuitParams p = spec.circuit.value_or(CircuitParams{});
  PhaseRepresentation rep(spec.basis, p);
  out.basis.localization = detail::localization(out.basis.vectors, rep, find_potential_minima(p));

  const double r2 = std::sqrt(2.0);
  out.ground = out.basis.vectors.col(1);
  out.minus = (out.basis.vectors.col(0) - out.basis.vectors.col(2)) / r2;
  out.plus = (out.basis.vectors.col(0) + out.basis.vectors.col(2)) / r2;
  out.fidelities = {std::norm(spec.state(levels.ground).dot(out.ground)), std::norm(spec.state(levels.minus).dot(out.minus)),
                    std::norm(spec.state(levels.plus).dot(out.plus))};
  return out;
}

inline GramSchmidtResult gram_schmidt_qutrit(const WellStates& w, const SpectralResult& spec, int highest_level) {
  const CircuitParams p = spec.circuit.value_or(CircuitParams{});
  return gram_schmidt_qutrit(w, spec, highest_level, identify_qutrit_levels(spec, find_potential_minima(p)));
}

struct AnalyticQutritModel {
  double a0 = 0.0;
  double theta_star = 0.0;
  double phi_star_tilde = 0.0;  // renormalized well position, radians of theta
  double b = 0.0;
  double epsilon = 0.0;  // GHz, side-well depth above the central minimum
  double Delta = 0.0;    // GHz
  double E3 = 0.0;       // GHz, above the central minimum
  double sin_star_tilde = 0.0;
  double b_sin = 0.0;
  bool low_confidence = false;
  Matrix3c theta_eff, sin_eff, H_eff, n_eff;
};

// Effective 3x3 operators of the Gaussian-well construction. Energies are measured from
// the bottom of the central well; phi_ext enters as the first-order flux term.
inline AnalyticQutritModel analytic_qutrit_model(const CircuitParams& p, const SpectralResult& spec0,
                                                 const FluxOperators& flux) {
  if (!is_symmetric_point(spec0.phi_ext())) fail(ErrorKind::InvalidArgument, "model spectrum must be at phi_ext = 0");
  CircuitParams p0 = p;
  p0.phi_ext = 0.0;
  const PotentialMinima m = find_potential_minima(p0);
  const QutritLevels levels = identify_qutrit_levels(spec0, m);
  const WellStates w = gaussian_well_states(p0, m, spec0.basis);
  const GramSchmidtResult gs = gram_schmidt_qutrit(w, spec0, 3, levels);
  const CVector third = spec0.state(levels.third);
  const double u0 = m.depths[m.center()];

  AnalyticQutritModel a;
  a.low_confidence = w.low_confidence;
  a.a0 = gs.a0;
  const double a2 = a.a0 * a.a0;
  a.theta_star = m.locations[m.right()];
  a.phi_star_tilde = a.theta_star * (1.0 - 2.0 * a2) / (1.0 - a2);
  a.b = std::sqrt(2.0) * a.a0 / std::sqrt(1.0 - a2) * flux.theta.element(w.center, third).real();
  a.epsilon = m.depths[m.right()] - u0;
  a.E3 = spec0.energies[levels.third] - u0;
  a.Delta = a.E3 * a2 / (1.0 - a2);
  const double sin_r = flux.sin_theta.element(w.right, w.right).real();
  a.sin_star_tilde = sin_r * (1.0 - 2.0 * a2) / (1.0 - a2);
  a.b_sin = std::sqrt(2.0) * a.a0 / std::sqrt(1.0 - a2) * flux.sin_theta.element(w.center, third).real();

  Spin1 s;
  const Matrix3c sxsz = s.Sx * s.Sz + s.Sz * s.Sx;
  a.theta_eff = a.phi_star_tilde * s.Sz + a.b * sxsz;
  a.sin_eff = a.sin_star_tilde * s.Sz + a.b_sin * sxsz;
  a.H_eff = a.epsilon * s.Sz * s.Sz + 0.5 * a.Delta * (s.Sp * s.Sp + s.Sm * s.Sm);
  a.H_eff += 2.0 * pi * p.phi_ext * p.E_J * a.sin_eff;
  a.n_eff = cplx(0, 1.0 / (8.0 * p.E_C)) * (a.H_eff * a.theta_eff - a.theta_eff * a.H_eff);
  return a;
}

inline AnalyticQutritModel analytic_qutrit_model(const CircuitParams& p, const Numerics& num = {}) {
  CircuitParams p0 = p;
  p0.phi_ext = 0.0;
  const SpectralResult spec0 = solve_spectrum(p0, num);
  return analytic_qutrit_model(p, spec0, build_flux_operators(spec0.basis, p0));
}

}  // namespace fluxbic
