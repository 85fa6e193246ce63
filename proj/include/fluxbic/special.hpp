#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include "errors.hpp"

namespace fluxbic {

// Ci(x) = -int_x^inf cos(t)/t dt for x > 0: power series below 2, continued fraction for
// E1(ix) above (modified Lentz).
inline double cosine_integral(double x) {
  if (!(x > 0.0)) fail(ErrorKind::InvalidArgument, "Ci needs x > 0");
  constexpr double eps = 1e-16;
  if (x <= 2.0) {
    double sum = 0.0;
    double term = 1.0;  // (-1)^k x^{2k} / (2k)!
    for (int k = 1; k < 100; ++k) {
      term *= -x * x / ((2.0 * k - 1.0) * (2.0 * k));
      const double add = term / (2.0 * k);
      sum += add;
      if (std::abs(add) < eps * std::abs(sum)) break;
    }
    return std::numbers::egamma + std::log(x) + sum;
  }
  using c = std::complex<double>;
  c b(1.0, x);
  c cc = 1e300;
  c d = 1.0 / b;
  c h = d;
  for (int i = 2; i < 10000; ++i) {
    const double a = -double(i - 1) * double(i - 1);
    b += 2.0;
    d = 1.0 / (a * d + b);
    cc = b + a / cc;
    const c del = cc * d;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  h *= c(std::cos(x), -std::sin(x));
  return -h.real();
}

}  // namespace fluxbic
