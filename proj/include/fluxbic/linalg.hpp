#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "errors.hpp"

namespace fluxbic {

using cplx = std::complex<double>;
using RMatrix = Eigen::MatrixXd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;

template <class Matrix>
struct EigenPairs {
  RVector values;
  Matrix vectors;
};

// Lowest k eigenpairs of a real symmetric matrix (upper triangle referenced).
inline EigenPairs<RMatrix> lowest_eigenpairs(const RMatrix& a, int k) {
  const int n = static_cast<int>(a.rows());
  if (k < 1 || k > n) fail(ErrorKind::InvalidArgument, "eigenpair count out of range");
  RMatrix work = a;
  EigenPairs<RMatrix> out;
  out.values.resize(n);
  out.vectors.resize(n, k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, work.data(), n, 0.0, 0.0, 1, k, 0.0,
                                         &found, out.values.data(), out.vectors.data(), n, support.data());
  if (info != 0 || found != k) fail(ErrorKind::NotConverged, "dsyevr failed, info=" + std::to_string(info));
  out.values.conservativeResize(k);
  return out;
}

inline EigenPairs<CMatrix> lowest_eigenpairs(const CMatrix& a, int k) {
  const int n = static_cast<int>(a.rows());
  if (k < 1 || k > n) fail(ErrorKind::InvalidArgument, "eigenpair count out of range");
  CMatrix work = a;
  EigenPairs<CMatrix> out;
  out.values.resize(n);
  out.vectors.resize(n, k);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, work.data(), n, 0.0, 0.0, 1, k, 0.0,
                                         &found, out.values.data(), out.vectors.data(), n, support.data());
  if (info != 0 || found != k) fail(ErrorKind::NotConverged, "zheevr failed, info=" + std::to_string(info));
  out.values.conservativeResize(k);
  return out;
}

// f(A) for real symmetric A through its full eigendecomposition.
inline RMatrix symmetric_function(const RMatrix& a, const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(a);
  RVector fl = es.eigenvalues().unaryExpr(f);
  return es.eigenvectors() * fl.asDiagonal() * es.eigenvectors().transpose();
}

// Make the largest-magnitude component real and positive. Exact ties (odd states on a
// symmetric grid) go to the first index.
inline void fix_phase(Eigen::Ref<CVector> v) {
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  Eigen::Index at = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) >= (1.0 - 1e-9) * peak) {
      at = i;
      break;
    }
  }
  v *= std::conj(v[at]) / std::abs(v[at]);
}

inline double max_abs(const CMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace fluxbic
