#pragma once

// 2F1(1, delta; 1 + delta; z) on the closed left half-plane.
//
// Three expansions cover Re z <= 0:
//   |z| <= 1/2      Maclaurin series  sum delta/(delta+n) z^n
//   1/2 < |z| <= 2  Pfaff:  (1-z)^-1 2F1(1, 1; 1+delta; z/(z-1))
//   |z| > 2         inversion about infinity:
//                   Gamma(1+delta) Gamma(1-delta) (-z)^-delta
//                     - delta sum_n (-1)^n (-z)^(-n-1) / (n+1-delta)
// The complex overload exists because the numerical Laplace inversion
// evaluates the interference transform at complex s.

#include <cmath>
#include <complex>
#include <numbers>

#include "hybridnet/error.hpp"

namespace hybridnet {

namespace detail {

inline constexpr int kHypMaxTerms = 5000;

template <class T>
T hyp_series_small(double delta, T z) {
  T sum = 1.0, zn = 1.0;
  for (int n = 1; n < kHypMaxTerms; ++n) {
    zn *= z;
    const T t = zn * (delta / (delta + n));
    sum += t;
    if (std::abs(t) < 1e-17 * std::abs(sum)) return sum;
  }
  throw NumericalError("2F1 series did not converge");
}

template <class T>
T hyp_pfaff(double delta, T z) {
  const T w = z / (z - 1.0);
  // sum_n n! / (1+delta)_n w^n
  T sum = 1.0, t = 1.0;
  for (int n = 1; n < kHypMaxTerms; ++n) {
    t *= w * (n / (delta + n));
    sum += t;
    if (std::abs(t) < 1e-17 * std::abs(sum)) return sum / (1.0 - z);
  }
  throw NumericalError("2F1 Pfaff series did not converge");
}

template <class T>
T hyp_inversion(double delta, T z) {
  const T y = -z;
  const T inv = 1.0 / y;
  T sum = 0.0, yn = inv;  // (-1)^n y^(-n-1)
  for (int n = 0; n < kHypMaxTerms; ++n) {
    const T t = yn / (n + 1.0 - delta);
    sum += t;
    if (std::abs(t) < 1e-17 * std::abs(sum)) {
      const double g = delta * std::numbers::pi / std::sin(std::numbers::pi * delta);
      return g * std::pow(y, -delta) - delta * sum;
    }
    yn *= -inv;
  }
  throw NumericalError("2F1 inversion series did not converge");
}

template <class T>
T hyp2f1_1_delta(double delta, T z) {
  const double r = std::abs(z);
  if (r <= 0.5) return hyp_series_small(delta, z);
  if (r <= 2.0) return hyp_pfaff(delta, z);
  return hyp_inversion(delta, z);
}

}  // namespace detail

/// 2F1(1, delta; 1 + delta; z) for 0 < delta < 1 and real z <= 0.
inline double gauss_2f1_special(double delta, double z) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("gauss_2f1_special: need 0 < delta < 1");
  if (!(z <= 0.0)) throw DomainError("gauss_2f1_special: need z <= 0");
  if (std::isinf(z)) return 0.0;
  return detail::hyp2f1_1_delta(delta, z);
}

/// Complex-argument variant, restricted to Re z <= 0.
inline std::complex<double> gauss_2f1_special(double delta, std::complex<double> z) {
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("gauss_2f1_special: need 0 < delta < 1");
  if (!(z.real() <= 0.0)) throw DomainError("gauss_2f1_special: need Re z <= 0");
  return detail::hyp2f1_1_delta(delta, z);
}

}  // namespace hybridnet
