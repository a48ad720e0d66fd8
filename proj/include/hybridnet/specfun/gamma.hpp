#pragma once

// Incomplete gamma function and the generalized exponential integral E_nu.

#include <cmath>
#include <limits>
#include <numbers>

#include "hybridnet/error.hpp"

namespace hybridnet {

namespace detail {

inline constexpr int kMaxIter = 100000;
inline constexpr double kTiny = 1e-300;

/// Regularized lower incomplete gamma P(a, x) by its power series.
inline double gamma_p_series(double a, double x) {
  if (x == 0.0) return 0.0;
  double ap = a, del = 1.0 / a, sum = del;
  for (int n = 0; n < kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-17) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw NumericalError("gamma_p_series: no convergence");
}

/// Regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction.
/// Converges for any x > 0, fastest for x > a + 1.
inline double gamma_q_contfrac(double a, double x) {
  double b = x + 1.0 - a;
  if (std::abs(b) < kTiny) b = kTiny;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
  }
  throw NumericalError("gamma_q_contfrac: no convergence");
}

// ln Gamma(1 - e) for |e| small, without the cancellation std::lgamma has near 1.
inline double lgamma_1m_small(double e) {
  constexpr double zeta[] = {1.6449340668482264, 1.2020569031595943, 1.0823232337111382,
                             1.0369277551433699, 1.0173430619844491};
  double s = std::numbers::egamma * e, ek = e;
  for (int k = 2; k <= 6; ++k) {
    ek *= e;
    s += zeta[k - 2] * ek / k;
  }
  return s;
}

// e^x E_nu(x) for x >= 1 by continued fraction.
inline double expint_contfrac_scaled(double nu, double x) {
  double b = x + nu;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double a = -i * (nu - 1.0 + i);
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) return h;
  }
  throw NumericalError("exp_integral: continued fraction did not converge");
}

// E_nu(x) for 0 < x < 1:
//   E_nu(x) = Gamma(1-nu) x^(nu-1) - sum_k (-x)^k / (k! (k+1-nu)).
// When nu is within 1e-3 of a positive integer n the first term and the
// k = n-1 term blow up with opposite signs; they are combined analytically.
inline double expint_series(double nu, double x) {
  const double nr = std::round(nu);
  const double eps = nu - nr;
  const int n = static_cast<int>(nr);
  const bool paired = n >= 1 && std::abs(eps) < 1e-3;
  const int m = n - 1;

  double sum = 0.0, term = 1.0;  // term = (-x)^k / k!
  for (int k = 0; k < 200; ++k) {
    if (k > 0) term *= -x / k;
    if (paired && k == m) {
      double pair;
      if (eps == 0.0) {
        double harmonic = 0.0;
        for (int j = 1; j <= m; ++j) harmonic += 1.0 / j;
        pair = term * (harmonic - std::numbers::egamma - std::log(x));
      } else {
        double lnA = lgamma_1m_small(eps) + eps * std::log(x);
        for (int j = 1; j <= m; ++j) lnA -= std::log1p(eps / j);
        pair = term * (-std::expm1(lnA) / eps);
      }
      sum += pair;
      continue;
    }
    const double t = -term / (k + 1.0 - nu);
    sum += t;
    if (k > m + 1 && std::abs(t) < 1e-17 * std::abs(sum)) break;
  }
  if (!paired) sum += std::tgamma(1.0 - nu) * std::pow(x, nu - 1.0);
  return sum;
}

}  // namespace detail

/// Regularized upper incomplete gamma Q(k, x) = Gamma(k, x) / Gamma(k).
inline double regularized_upper_gamma(double k, double x) {
  if (!(k > 0.0) || !(x >= 0.0)) throw DomainError("regularized_upper_gamma: need k > 0, x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  if (x < k + 1.0) return 1.0 - detail::gamma_p_series(k, x);
  return detail::gamma_q_contfrac(k, x);
}

/// Regularized lower incomplete gamma P(k, x), the Gamma(k, 1) cdf.
inline double regularized_lower_gamma(double k, double x) {
  if (!(k > 0.0) || !(x >= 0.0)) throw DomainError("regularized_lower_gamma: need k > 0, x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < k + 1.0) return detail::gamma_p_series(k, x);
  return 1.0 - detail::gamma_q_contfrac(k, x);
}

/// Upper incomplete gamma Gamma(k, x).
inline double upper_incomplete_gamma(double k, double x) {
  return std::tgamma(k) * regularized_upper_gamma(k, x);
}

/// Generalized exponential integral E_nu(x) = int_1^inf e^{-xt} t^{-nu} dt
/// for nu >= 0, x > 0.
inline double exp_integral(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("exp_integral: x must be > 0");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("exp_integral: nu must be >= 0");
  if (std::isinf(x)) return 0.0;
  if (x >= 1.0) return detail::expint_contfrac_scaled(nu, x) * std::exp(-x);
  return detail::expint_series(nu, x);
}

/// e^x E_nu(x), the combination that appears in the mean-power closed forms;
/// stays finite for large x where e^x alone overflows.
inline double scaled_exp_integral(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("scaled_exp_integral: x must be > 0");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DomainError("scaled_exp_integral: nu must be >= 0");
  if (x >= 1.0) return detail::expint_contfrac_scaled(nu, x);
  return std::exp(x) * detail::expint_series(nu, x);
}

}  // namespace hybridnet
