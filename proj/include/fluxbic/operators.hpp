#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "constants.hpp"
#include "linalg.hpp"
#include "params.hpp"

namespace fluxbic {

struct HermitianOperator {
  CMatrix entries;
  BasisSpec basis;
  std::string label;
  std::optional<CircuitParams> circuit;  // set for Hamiltonians

  int dim() const { return static_cast<int>(entries.rows()); }

  cplx element(const CVector& bra, const CVector& ket) const { return bra.dot(entries * ket); }

  void check_hermitian() const {
    const double scale = max_abs(entries);
    const double skew = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
    if (skew > 1e-12 * std::max(scale, 1e-300))
      fail(ErrorKind::NonHermitianResult, label + " deviates from Hermitian by " + std::to_string(skew));
  }
};

inline HermitianOperator make_operator(CMatrix m, const BasisSpec& b, std::string label) {
  HermitianOperator op{std::move(m), b, std::move(label), std::nullopt};
  op.check_hermitian();
  return op;
}

inline double ladder_theta_zpf(const CircuitParams& p) { return std::pow(8.0 * p.E_C / p.E_L, 0.25) / std::sqrt(2.0); }

// Position content of a basis: nodes theta_k and the map between build-basis vectors
// and node amplitudes. On the ladder these are the Gauss-Hermite nodes of truncated theta.
class PhaseRepresentation {
 public:
  PhaseRepresentation(const BasisSpec& b, const CircuitParams& p) : basis_(b) {
    b.validate();
    const int n = b.dim;
    if (b.kind == BasisKind::PhaseGrid) {
      nodes_ = RVector::LinSpaced(n, -b.phase_halfwidth, b.phase_halfwidth);
      return;
    }
    theta_zpf_ = ladder_theta_zpf(p);
    RMatrix theta = RMatrix::Zero(n, n);
    for (int m = 1; m < n; ++m) theta(m - 1, m) = theta(m, m - 1) = theta_zpf_ * std::sqrt(double(m));
    nodes_ = Eigen::SelfAdjointEigenSolver<RMatrix>(theta, Eigen::EigenvaluesOnly).eigenvalues();
    // hermite(m, k) = phi_m(theta_k); weights from the Christoffel sum.
    hermite_.resize(n, n);
    const double xi_scale = 1.0 / (std::sqrt(2.0) * theta_zpf_);
    const double norm = 1.0 / std::sqrt(std::sqrt(2.0) * theta_zpf_);
    weights_.resize(n);
    for (int k = 0; k < n; ++k) {
      const double xi = nodes_[k] * xi_scale;
      double prev = 0.0;
      double cur = std::pow(pi, -0.25) * std::exp(-0.5 * xi * xi);
      for (int m = 0; m < n; ++m) {
        hermite_(m, k) = cur * norm;
        const double next = std::sqrt(2.0 / (m + 1)) * xi * cur - std::sqrt(double(m) / (m + 1)) * prev;
        prev = cur;
        cur = next;
      }
      weights_[k] = 1.0 / hermite_.col(k).squaredNorm();
    }
  }

  const BasisSpec& basis() const { return basis_; }
  const RVector& nodes() const { return nodes_; }

  // Normalized build-basis vector for the wavefunction f(theta).
  CVector sample(const std::function<double(double)>& f) const {
    const int n = basis_.dim;
    CVector v(n);
    if (basis_.kind == BasisKind::PhaseGrid) {
      for (int k = 0; k < n; ++k) v[k] = f(nodes_[k]);
    } else {
      RVector fw(n);
      for (int k = 0; k < n; ++k) fw[k] = weights_[k] * f(nodes_[k]);
      v = (hermite_ * fw).cast<cplx>();
    }
    const double nv = v.norm();
    if (nv == 0.0) fail(ErrorKind::InvalidArgument, "sampled wavefunction vanishes on the basis");
    return v / nv;
  }

  // |psi(theta_k)|^2 quadrature weights; they sum to |psi|^2.
  RVector node_probabilities(const CVector& psi) const {
    if (basis_.kind == BasisKind::PhaseGrid) return psi.cwiseAbs2();
    CVector c = hermite_.transpose().cast<cplx>() * psi;
    return c.cwiseAbs2().cwiseProduct(weights_);
  }

  double probability_where(const CVector& psi, const std::function<bool(double)>& region) const {
    RVector prob = node_probabilities(psi);
    double s = 0.0;
    for (Eigen::Index k = 0; k < prob.size(); ++k)
      if (region(nodes_[k])) s += prob[k];
    return s;
  }

  CVector apply_parity(const CVector& psi) const {
    if (basis_.kind == BasisKind::PhaseGrid) return psi.reverse();
    CVector out = psi;
    for (Eigen::Index m = 1; m < out.size(); m += 2) out[m] = -out[m];
    return out;
  }

 private:
  BasisSpec basis_;
  RVector nodes_;
  RMatrix hermite_;
  RVector weights_;
  double theta_zpf_ = 0.0;
};

namespace detail {

inline RMatrix ladder_lowering(int n) {
  RMatrix a = RMatrix::Zero(n, n);
  for (int m = 1; m < n; ++m) a(m - 1, m) = std::sqrt(double(m));
  return a;
}

inline RMatrix ladder_theta(const CircuitParams& p, int n) {
  RMatrix a = ladder_lowering(n);
  return ladder_theta_zpf(p) * (a + a.transpose());
}

inline double grid_spacing(const BasisSpec& b) { return 2.0 * b.phase_halfwidth / (b.dim - 1); }

// Sinc-DVR representation of -d^2/dtheta^2.
inline RMatrix grid_kinetic(const BasisSpec& b) {
  const int n = b.dim;
  const double d = grid_spacing(b);
  RMatrix t(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        t(i, j) = pi * pi / (3.0 * d * d);
      } else {
        const double k = i - j;
        t(i, j) = ((i - j) % 2 == 0 ? 2.0 : -2.0) / (d * d * k * k);
      }
    }
  return t;
}

inline RMatrix grid_derivative(const BasisSpec& b) {
  const int n = b.dim;
  const double d = grid_spacing(b);
  RMatrix dm = RMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) dm(i, j) = ((i - j) % 2 == 0 ? 1.0 : -1.0) / (d * (i - j));
  return dm;
}

inline RMatrix theta_function(const BasisSpec& b, const CircuitParams& p, const std::function<double(double)>& f) {
  if (b.kind == BasisKind::PhaseGrid) {
    RVector x = RVector::LinSpaced(b.dim, -b.phase_halfwidth, b.phase_halfwidth);
    return x.unaryExpr(f).asDiagonal();
  }
  return symmetric_function(ladder_theta(p, b.dim), f);
}

}  // namespace detail

enum class Gauge { FluxInCosine, FluxInInductor };

// H = 4 E_C n^2 + E_L theta^2 / 2 - E_J cos(theta + 2 pi phi_ext), GHz.
inline HermitianOperator build_hamiltonian(const CircuitParams& p, const BasisSpec& b,
                                           Gauge gauge = Gauge::FluxInCosine) {
  p.validate();
  b.validate();
  const double shift = 2.0 * pi * p.phi_ext;
  RMatrix h;
  if (b.kind == BasisKind::PhaseGrid) {
    RVector x = RVector::LinSpaced(b.dim, -b.phase_halfwidth, b.phase_halfwidth);
    RVector u(b.dim);
    for (int k = 0; k < b.dim; ++k) {
      u[k] = gauge == Gauge::FluxInCosine ? potential(p, x[k])
                                          : 0.5 * p.E_L * (x[k] - shift) * (x[k] - shift) - p.E_J * std::cos(x[k]);
    }
    h = 4.0 * p.E_C * detail::grid_kinetic(b);
    h.diagonal() += u;
  } else {
    const double omega = std::sqrt(8.0 * p.E_C * p.E_L);
    RMatrix theta = detail::ladder_theta(p, b.dim);
    if (gauge == Gauge::FluxInCosine) {
      h = -p.E_J * symmetric_function(theta, [&](double t) { return std::cos(t + shift); });
    } else {
      h = -p.E_J * symmetric_function(theta, [](double t) { return std::cos(t); });
      h -= p.E_L * shift * theta;
      h.diagonal().array() += 0.5 * p.E_L * shift * shift;
    }
    for (int m = 0; m < b.dim; ++m) h(m, m) += omega * (m + 0.5);
  }
  RMatrix sym = 0.5 * (h + h.transpose());
  HermitianOperator op = make_operator(sym.cast<cplx>(), b, "H");
  op.circuit = p;
  return op;
}

// n = q/2e, conjugate to theta.
inline HermitianOperator build_charge_operator(const BasisSpec& b, const CircuitParams& p) {
  b.validate();
  if (b.kind == BasisKind::PhaseGrid) return make_operator(cplx(0, -1) * detail::grid_derivative(b).cast<cplx>(), b, "n");
  RMatrix a = detail::ladder_lowering(b.dim);
  const double n_zpf = 1.0 / (2.0 * ladder_theta_zpf(p));
  return make_operator(cplx(0, n_zpf) * (a.transpose() - a).cast<cplx>(), b, "n");
}

struct FluxOperators {
  HermitianOperator theta;
  HermitianOperator sin_theta;
  HermitianOperator cos_theta;
};

inline FluxOperators build_flux_operators(const BasisSpec& b, const CircuitParams& p) {
  b.validate();
  auto id = [](double t) { return t; };
  auto s = [](double t) { return std::sin(t); };
  auto c = [](double t) { return std::cos(t); };
  RMatrix theta = b.kind == BasisKind::PhaseGrid ? detail::theta_function(b, p, id) : detail::ladder_theta(p, b.dim);
  return {make_operator(theta.cast<cplx>(), b, "theta"),
          make_operator(detail::theta_function(b, p, s).cast<cplx>(), b, "sin_theta"),
          make_operator(detail::theta_function(b, p, c).cast<cplx>(), b, "cos_theta")};
}

// Reflection theta -> -theta.
inline HermitianOperator build_parity_operator(const BasisSpec& b) {
  b.validate();
  CMatrix m = CMatrix::Zero(b.dim, b.dim);
  for (int i = 0; i < b.dim; ++i) {
    if (b.kind == BasisKind::PhaseGrid)
      m(i, b.dim - 1 - i) = 1.0;
    else
      m(i, i) = (i % 2 == 0) ? 1.0 : -1.0;
  }
  return make_operator(std::move(m), b, "parity");
}

}  // namespace fluxbic
