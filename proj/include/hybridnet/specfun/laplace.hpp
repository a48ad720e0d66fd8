#pragma once

// Numerical Laplace inversion: Abate-Whitt Fourier series with Euler
// summation.  Discretization error is about e^-A; Euler summation accelerates
// the alternating tail.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <numbers>
#include <vector>

#include "hybridnet/error.hpp"

namespace hybridnet {

struct EulerInversionOptions {
  double A = 18.4;          // discretization parameter, error ~ e^-A
  int pre_terms = 15;       // plain partial-sum terms
  int euler_terms = 11;     // binomial averaging terms
  double tolerance = 1e-6;  // absolute bound on the tail estimate
  /// If the tail estimate misses the tolerance, pre_terms is doubled up to
  /// this many before giving up (sharply peaked laws converge slowly).
  int max_pre_terms = 240;
};

struct InversionResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// f(t) from its transform F(s), evaluated at complex s.
template <class F>
InversionResult euler_inversion(F&& transform, double t, const EulerInversionOptions& opt = {}) {
  if (!(t > 0.0)) throw DomainError("euler_inversion: t must be > 0");
  const int n = opt.pre_terms, m = opt.euler_terms;
  const double pi = std::numbers::pi;
  const double scale = std::exp(opt.A / 2.0) / t;

  // partial[k] = sum_{j<=k} a_j
  std::vector<double> partial(n + m + 1);
  double acc = 0.5 * std::real(transform(std::complex<double>(opt.A / (2.0 * t), 0.0)));
  partial[0] = acc;
  for (int k = 1; k <= n + m; ++k) {
    const std::complex<double> s(opt.A / (2.0 * t), k * pi / t);
    const double a = std::real(transform(s));
    acc += (k % 2 == 0 ? a : -a);
    partial[k] = acc;
  }
  auto euler_sum = [&](int start) {
    double s = 0.0, c = 1.0;  // c = C(m, j)
    for (int j = 0; j <= m; ++j) {
      s += c * partial[start + j];
      c = c * (m - j) / (j + 1);
    }
    return s * std::ldexp(1.0, -m);
  };
  const double e_n = euler_sum(n);
  const double e_prev = euler_sum(n - 1);
  return {scale * e_n, scale * std::abs(e_n - e_prev)};
}

/// cdf F(x) of a nonnegative random variable whose density has Laplace
/// transform `laplace` (callable on std::complex<double>). Inverts L(s)/s and
/// clamps to [0, 1]; throws NumericalError if the tail estimate still exceeds
/// the tolerance after escalation.
template <class L>
double inverse_laplace_cdf(L&& laplace, double x, const EulerInversionOptions& opt = {}) {
  if (!(x > 0.0)) throw DomainError("inverse_laplace_cdf: x must be > 0");
  auto transform = [&](std::complex<double> s) { return laplace(s) / s; };
  auto r = euler_inversion(transform, x, opt);
  for (EulerInversionOptions o = opt; !(r.error_estimate <= opt.tolerance) && 2 * o.pre_terms <= opt.max_pre_terms;) {
    o.pre_terms *= 2;
    r = euler_inversion(transform, x, o);
  }
  if (!std::isfinite(r.value) || r.error_estimate > opt.tolerance) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "inverse Laplace did not converge at x=%g (value %.6g, tail %.3g)", x,
                  r.value, r.error_estimate);
    throw NumericalError(buf);
  }
  return std::min(1.0, std::max(0.0, r.value));
}

}  // namespace hybridnet
