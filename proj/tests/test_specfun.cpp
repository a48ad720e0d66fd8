#include <gtest/gtest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "hybridnet/model.hpp"
#include "hybridnet/specfun.hpp"
#include "oracles.hpp"

using namespace hybridnet;
using boost::multiprecision::cpp_rational;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

// --- exp_integral ------------------------------------------------------------

TEST(ExpIntegral, E1AtOneMatchesDefiningIntegral) {
  const double v = exp_integral(1.0, 1.0);
  EXPECT_LT(rel(v, oracle::expint(1.0, 1.0)), 1e-12);
  EXPECT_NEAR(v, 0.219384, 1e-6);
}

TEST(ExpIntegral, BoundedByIntegrandEnvelope) {
  for (double nu : {0.0, 0.5, 1.0, 1.5, 3.0})
    for (double x : {0.01, 0.5, 1.0, 4.0, 30.0}) EXPECT_LE(exp_integral(nu, x), std::exp(-x) / x * (1 + 1e-14));
}

TEST(ExpIntegral, MeanPowerArgumentAtDefaults) {
  const SystemParams p;
  const double x = p.lambda_B() * std::numbers::pi * p.H_B() * p.H_B();
  EXPECT_LT(rel(exp_integral(1.5, x), oracle::expint(1.5, x)), 1e-10);
  EXPECT_LT(rel(exp_integral(0.5, x), oracle::expint(0.5, x)), 1e-10);
}

TEST(ExpIntegral, RandomOrdersAndArgumentsMatchOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> nu_d(0.4, 2.0), lx(std::log(1e-3), std::log(20.0));
  for (int i = 0; i < 100; ++i) {
    const double nu = nu_d(rng), x = std::exp(lx(rng));
    EXPECT_LT(rel(exp_integral(nu, x), oracle::expint(nu, x)), 1e-9) << "nu=" << nu << " x=" << x;
  }
}

TEST(ExpIntegral, NearIntegerOrdersAreSmooth) {
  // The series pairs the two singular terms near integer order.
  for (double x : {1e-3, 0.1, 0.7})
    for (double nu : {1.0, 1.0 + 1e-9, 1.0 - 1e-7, 2.0 + 5e-4, 2.0 - 2e-3, 3.0})
      EXPECT_LT(rel(exp_integral(nu, x), oracle::expint(nu, x)), 1e-10) << "nu=" << nu << " x=" << x;
}

TEST(ExpIntegral, Domain) {
  EXPECT_THROW(exp_integral(1.0, 0.0), DomainError);
  EXPECT_THROW(exp_integral(1.0, -1.0), DomainError);
  EXPECT_THROW(exp_integral(-0.5, 1.0), DomainError);
}

// --- incomplete gamma ----------------------------------------------------------

TEST(IncompleteGamma, ShapeOneIsExponential) {
  for (double x : {0.0, 0.3, 2.0, 10.0}) EXPECT_LT(rel(upper_incomplete_gamma(1.0, x), std::exp(-x)), 1e-14);
}

TEST(IncompleteGamma, IntegerShapeFiniteSum) {
  EXPECT_LT(rel(regularized_upper_gamma(3.0, 2.0), 5.0 * std::exp(-2.0)), 1e-14);
  for (int k = 1; k <= 8; ++k)
    for (double x : {0.1, 1.0, 5.0, 12.0}) {
      double s = 0.0, t = 1.0;
      for (int i = 0; i < k; ++i) {
        if (i > 0) t *= x / i;
        s += t;
      }
      EXPECT_LT(rel(regularized_upper_gamma(k, x), s * std::exp(-x)), 1e-13);
    }
}

TEST(IncompleteGamma, SeriesAndContinuedFractionAgree) {
  const double q_cf = detail::gamma_q_contfrac(4.7, 3.1);
  const double q_series = 1.0 - detail::gamma_p_series(4.7, 3.1);
  EXPECT_LT(std::abs(q_cf - q_series), 1e-12);
  EXPECT_LT(rel(q_cf, boost::math::gamma_q(4.7, 3.1)), 1e-12);
}

TEST(IncompleteGamma, Domain) {
  EXPECT_THROW(upper_incomplete_gamma(0.0, 1.0), DomainError);
  EXPECT_THROW(upper_incomplete_gamma(1.0, -1.0), DomainError);
}

// --- 2F1 -------------------------------------------------------------------------

TEST(Hypergeometric, OneAtOrigin) { EXPECT_EQ(gauss_2f1_special(0.4, 0.0), 1.0); }

TEST(Hypergeometric, IntegralRepresentationAtReference) {
  EXPECT_LT(rel(gauss_2f1_special(2.0 / 3.0, -0.5), oracle::hyp2f1_special(2.0 / 3.0, -0.5)), 1e-12);
}

TEST(Hypergeometric, GridAgainstIntegralRepresentation) {
  for (int i = 1; i <= 20; ++i) {
    const double d = i / 21.0;
    for (int j = 0; j < 20; ++j) {
      // z from 0 down to -1e6, log-spaced after the first point
      const double z = j == 0 ? 0.0 : -std::pow(10.0, -3.0 + 9.0 * (j - 1) / 18.0);
      EXPECT_LT(rel(gauss_2f1_special(d, z), oracle::hyp2f1_special(d, z)), 1e-10) << "d=" << d << " z=" << z;
    }
  }
}

TEST(Hypergeometric, ContinuousAcrossBranchSwitches) {
  for (double d : {0.1, 2.0 / 3.0, 0.95})
    for (double zs : {-0.5, -2.0}) {
      const double a = gauss_2f1_special(d, std::nextafter(zs, 0.0));
      const double b = gauss_2f1_special(d, zs);
      const double c = gauss_2f1_special(d, std::nextafter(zs, -1.0));
      EXPECT_LT(std::abs(a - b), 1e-9);
      EXPECT_LT(std::abs(b - c), 1e-9);
    }
}

TEST(Hypergeometric, DecreasingInAbsZ) {
  double prev = 1.0;
  for (double z = -0.01; z > -1e4; z *= 1.7) {
    const double v = gauss_2f1_special(0.6, z);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Hypergeometric, ComplexArgumentMatchesIntegral) {
  const double d = 2.0 / 3.0;
  boost::math::quadrature::tanh_sinh<double> q;
  for (std::complex<double> z : {std::complex<double>(-0.2, 0.3), std::complex<double>(-1.0, 1.0),
                                 std::complex<double>(0.0, 1.5), std::complex<double>(-30.0, -80.0)}) {
    const double re = q.integrate([&](double u) { return std::real(1.0 / (1.0 - z * std::pow(u, 1.0 / d))); }, 0.0, 1.0);
    const double im = q.integrate([&](double u) { return std::imag(1.0 / (1.0 - z * std::pow(u, 1.0 / d))); }, 0.0, 1.0);
    const auto v = gauss_2f1_special(d, z);
    EXPECT_LT(std::abs(v - std::complex<double>(re, im)) / std::abs(v), 1e-10) << z;
  }
}

TEST(Hypergeometric, Domain) {
  EXPECT_THROW(gauss_2f1_special(0.0, -1.0), DomainError);
  EXPECT_THROW(gauss_2f1_special(1.0, -1.0), DomainError);
  EXPECT_THROW(gauss_2f1_special(0.5, 0.1), DomainError);
}

// --- Bell polynomials / falling factorial ---------------------------------------

namespace {

// Partial Bell polynomials B_{n,k} by the recursion over the first block size,
// in exact arithmetic; B_n = sum_k B_{n,k}.
cpp_rational bell_oracle(const std::vector<cpp_rational>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<std::vector<cpp_rational>> Bnk(n + 1, std::vector<cpp_rational>(n + 1, 0));
  Bnk[0][0] = 1;
  auto binom = [](int a, int b) {
    cpp_rational r = 1;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  for (int m = 1; m <= n; ++m)
    for (int k = 1; k <= m; ++k)
      for (int i = 1; i <= m - k + 1; ++i) Bnk[m][k] += binom(m - 1, i - 1) * x[i - 1] * Bnk[m - i][k - 1];
  cpp_rational s = 0;
  for (int k = 0; k <= n; ++k) s += Bnk[n][k];
  return s;
}

}  // namespace

TEST(Bell, LowOrdersKnownPolynomials) {
  const double x1 = 1.3, x2 = -0.7, x3 = 2.1;
  EXPECT_DOUBLE_EQ(complete_bell(std::vector{x1}), x1);
  EXPECT_NEAR(complete_bell(std::vector{x1, x2}), x1 * x1 + x2, 1e-15);
  EXPECT_NEAR(complete_bell(std::vector{x1, x2, x3}), x1 * x1 * x1 + 3 * x1 * x2 + x3, 1e-14);
}

TEST(Bell, OrderEightMatchesExactOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> num(-40, 40), den(1, 16);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<cpp_rational> xr;
    std::vector<double> xd;
    for (int i = 0; i < 8; ++i) {
      cpp_rational v(num(rng), den(rng));
      xr.push_back(v);
      xd.push_back(static_cast<double>(v));
    }
    const double exact = static_cast<double>(bell_oracle(xr));
    EXPECT_LT(std::abs(complete_bell(xd) - exact), 1e-10 * std::max(1.0, std::abs(exact)));
  }
}

TEST(Bell, LinearInHighestArgument) {
  std::vector<double> a{0.3, -1.2, 0.8, 2.0, -0.4}, b = a, c = a;
  b.back() = 1.7;
  c.back() = a.back() + b.back();
  // B_n(x_1..x_{n-1}, u + v) = B_n(..., u) + B_n(..., v) - B_n(..., 0)
  auto z = a;
  z.back() = 0.0;
  EXPECT_NEAR(complete_bell(c), complete_bell(a) + complete_bell(b) - complete_bell(z), 1e-12);
}

TEST(FallingFactorial, Values) {
  EXPECT_EQ(falling_factorial(0.7, 0), 1.0);
  EXPECT_NEAR(falling_factorial(2.0 / 3.0, 2), -2.0 / 9.0, 1e-16);
  cpp_rational r = 1, h(1, 2);
  for (int k = 0; k < 5; ++k) r *= h - k;
  EXPECT_LT(rel(falling_factorial(0.5, 5), static_cast<double>(r)), 1e-15);
}

// --- inverse Laplace ---------------------------------------------------------------

namespace {

// Talbot contour (Weideman's fixed-Talbot parameters); test-only cross-check.
template <class F>
double talbot(F&& Fs, double t, int M = 32) {
  using C = std::complex<double>;
  const double r = 2.0 * M / (5.0 * t);
  double sum = 0.5 * std::real(Fs(C(r, 0.0)) * std::exp(r * t));
  for (int k = 1; k < M; ++k) {
    const double th = k * std::numbers::pi / M;
    const double cot = std::cos(th) / std::sin(th);
    const C s = r * th * C(cot, 1.0);
    const double sigma = th + (th * cot - 1.0) * cot;
    sum += std::real(std::exp(t * s) * Fs(s) * C(1.0, sigma));
  }
  return r / M * sum;
}

}  // namespace

TEST(InverseLaplace, ExponentialAndErlang) {
  using C = std::complex<double>;
  EXPECT_NEAR(inverse_laplace_cdf([](C s) { return 1.0 / (1.0 + s); }, 1.0), 1.0 - std::exp(-1.0), 1e-7);
  EXPECT_NEAR(inverse_laplace_cdf([](C s) { return 1.0 / ((1.0 + s) * (1.0 + s)); }, 2.0), 1.0 - 3.0 * std::exp(-2.0),
              1e-7);
}

TEST(InverseLaplace, GammaFamily) {
  using C = std::complex<double>;
  for (double k : {1.0, 2.0, 5.0})
    for (double theta : {0.5, 2.0})
      for (double x : {0.1, 0.5, 1.0, 3.0, 8.0, 20.0}) {
        const double F = inverse_laplace_cdf([&](C s) { return std::pow(1.0 + theta * s, -k); }, x);
        EXPECT_NEAR(F, regularized_lower_gamma(k, x / theta), 1e-6) << "k=" << k << " theta=" << theta << " x=" << x;
      }
}

TEST(InverseLaplace, StableOneHalfLawAgainstKnownCdfAndTalbot) {
  using C = std::complex<double>;
  auto L = [](C s) { return std::exp(-std::sqrt(s)); };
  for (double x : {0.05, 0.3, 1.0, 4.0}) {
    const double known = std::erfc(1.0 / (2.0 * std::sqrt(x)));
    EXPECT_NEAR(inverse_laplace_cdf(L, x), known, 1e-6);
    EXPECT_NEAR(talbot([&](C s) { return L(s) / s; }, x), known, 1e-8);
  }
}

TEST(InverseLaplace, ReportsNonConvergence) {
  using C = std::complex<double>;
  // A point mass at 1 has a step cdf; the Fourier series cannot settle at the jump.
  EXPECT_THROW(inverse_laplace_cdf([](C s) { return std::exp(-s); }, 1.0), NumericalError);
}

// --- adaptive quadrature ------------------------------------------------------------

TEST(Quadrature, SemiInfiniteClassics) {
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_NEAR(integrate_adaptive([](double x) { return std::exp(-x); }, 0.0, inf), 1.0, 1e-10);
  const double lam = 5e-5;
  EXPECT_NEAR(integrate_adaptive([&](double x) { return nearest_distance_pdf(x, lam); }, 0.0, inf, {1e-12, 1e-12}),
              1.0, 1e-9);
  EXPECT_NEAR(integrate_adaptive([](double x) { return std::exp(-x * x); }, -inf, inf), std::sqrt(std::numbers::pi),
              1e-10);
}

TEST(Quadrature, HonoursBreakpoints) {
  auto step = [](double x) { return x < 0.3 ? 1.0 : (x <= 0.7 ? 5.0 : -2.0); };
  const std::vector<double> br{0.3, 0.7};
  const auto r = integrate_adaptive_result(step, 0.0, 1.0, {1e-13, 1e-13}, br);
  EXPECT_NEAR(r.value, 0.3 + 2.0 - 0.6, 1e-13);
  EXPECT_LE(r.evaluations, 3 * 21);
}

TEST(Quadrature, ReversedBounds) {
  EXPECT_NEAR(integrate_adaptive([](double x) { return x * x; }, 1.0, 0.0), -1.0 / 3.0, 1e-14);
}

TEST(Quadrature, FailureCarriesEstimateAndBound) {
  try {
    integrate_adaptive([](double x) { return 1.0 / x; }, 0.0, 1.0, {1e-12, 1e-12, 50});
    FAIL() << "expected QuadratureError";
  } catch (const QuadratureError& e) {
    EXPECT_GT(e.error_bound(), 1e-12);
    EXPECT_TRUE(std::isfinite(e.estimate()));
  }
}
