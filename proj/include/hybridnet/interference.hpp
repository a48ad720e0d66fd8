#pragma once

// Conditional interference I | (l0, d0): mean scattering gain eta_bar, the
// Laplace transform exp(-2 pi lambda'_B U(eta_bar s)), derivatives of the
// kernel U, the cdf by numerical inversion, and mean interference.
//
// U(x) = int_{l0}^inf x g_d(l) / (1 + x g_d(l)) l dl
//      = b1 x^delta - b2 H(x),   H(x) = 2F1(1, delta; 1+delta; -1/(b3 x)).
// For r = b3 x <= 1/2 the two terms nearly cancel, so there U is summed from
//   U(x) = b2 delta sum_{n>=0} (-1)^n r^{n+1} / (n+1-delta)
// instead (same for its derivatives).

#include <cmath>
#include <complex>
#include <cstdio>
#include <map>
#include <numbers>
#include <utility>
#include <vector>

#include "hybridnet/error.hpp"
#include "hybridnet/irs_aggregates.hpp"
#include "hybridnet/model.hpp"
#include "hybridnet/signal.hpp"
#include "hybridnet/specfun/bell.hpp"
#include "hybridnet/specfun/gamma.hpp"
#include "hybridnet/specfun/hypergeometric.hpp"
#include "hybridnet/specfun/laplace.hpp"

namespace hybridnet {

inline constexpr int kMaxKernelOrder = 16;
/// Crossover from the small-argument series to the closed form, in b3 x.
inline constexpr double kKernelSeriesCrossover = 0.5;

/// Mean IRS scattering gain on interfering paths, per regime of d0.
inline double eta_bar(double d0, const SystemParams& params) {
  if (!(d0 >= 0.0)) throw DomainError("eta_bar: d0 must be >= 0");
  switch (classify_regime(d0, params)) {
    case Regime::Beamformed: return kappa_sc(d0, params);
    case Regime::ScatteredOnly: return 1.0 + params.N() * irs_power_aggregates(params.D1(), params).E_I1;
    case Regime::NoIrs: break;
  }
  return 1.0;
}

struct LaplaceContext {
  double l0 = 0.0;
  double eta_bar = 1.0;
  double lambda_B_active = 0.0;
  double delta = 2.0 / 3.0;
  double b1 = 0.0;
  double b2 = 0.0;
  double b3 = 0.0;

  LaplaceContext() = default;
  LaplaceContext(double l0_, double eta_bar_, const SystemParams& params)
      : l0(l0_), eta_bar(eta_bar_), lambda_B_active(params.lambda_B_active()), delta(params.delta()) {
    if (!(l0 >= 0.0)) throw DomainError("LaplaceContext: l0 must be >= 0");
    if (!(eta_bar >= 1.0)) throw DomainError("LaplaceContext: eta_bar must be >= 1");
    const double a = params.alpha();
    b1 = std::numbers::pi * std::pow(params.beta(), delta) / (a * std::sin(2.0 * std::numbers::pi / a));
    b2 = 0.5 * (l0 * l0 + params.H_B() * params.H_B());
    b3 = path_loss_direct(l0, params);
  }
};

inline LaplaceContext make_laplace_context(double l0, double d0, const SystemParams& params) {
  return LaplaceContext(l0, eta_bar(d0, params), params);
}

namespace detail {

template <class T>
T kernel_U_series(T x, const LaplaceContext& c) {
  const T r = c.b3 * x;
  T sum = 0.0, rn = r;
  for (int n = 0; n < 2000; ++n) {
    const T t = rn / (n + 1.0 - c.delta);
    sum += t;
    if (std::abs(t) < 1e-17 * std::abs(sum)) return c.b2 * c.delta * sum;
    rn *= -r;
  }
  throw NumericalError("kernel_U: series did not converge");
}

// Exact representation of L_i as sum_{p,q} P_{p,q}(delta) x^-p t^q with
// t = b3/(1+b3 x) and P_{p,q} an integer polynomial in delta.
using DeltaPoly = std::vector<__int128>;  // coefficient of delta^k at index k
using LForm = std::map<std::pair<int, int>, DeltaPoly>;

inline __int128 checked_mul(__int128 a, __int128 b) {
  __int128 r;
  if (__builtin_mul_overflow(a, b, &r)) throw NumericalError("L_i recurrence: coefficient overflow");
  return r;
}

inline void poly_add_scaled(DeltaPoly& into, const DeltaPoly& p, __int128 scale) {
  if (into.size() < p.size()) into.resize(p.size(), 0);
  for (std::size_t k = 0; k < p.size(); ++k) {
    const __int128 v = checked_mul(p[k], scale);
    if (__builtin_add_overflow(into[k], v, &into[k])) throw NumericalError("L_i recurrence: coefficient overflow");
  }
}

// From H' = delta H / x - delta b3 / (1 + b3 x): d^i H = (delta)_i H / x^i + L_i,
// L_1 = -delta T(0,1), L_{i+1} = L_i' - delta (delta)_i T(i,1),
// with dT(p,q)/dx = -p T(p+1,q) - q T(p,q+1).
inline const std::vector<LForm>& l_forms() {
  static const std::vector<LForm> forms = [] {
    std::vector<LForm> out(kMaxKernelOrder + 1);
    out[1][{0, 1}] = DeltaPoly{0, -1};
    DeltaPoly falling{1};  // (delta)_0
    for (int i = 1; i < kMaxKernelOrder; ++i) {
      // (delta)_i = (delta)_{i-1} (delta - i + 1)
      DeltaPoly next(falling.size() + 1, 0);
      for (std::size_t k = 0; k < falling.size(); ++k) {
        next[k + 1] += falling[k];
        next[k] -= checked_mul(falling[k], i - 1);
      }
      falling.swap(next);
      LForm& L = out[i + 1];
      for (const auto& [pq, poly] : out[i]) {
        const auto [p, q] = pq;
        if (p != 0) poly_add_scaled(L[{p + 1, q}], poly, -p);
        poly_add_scaled(L[{p, q + 1}], poly, -q);
      }
      DeltaPoly shifted(falling.size() + 1, 0);  // delta (delta)_i
      for (std::size_t k = 0; k < falling.size(); ++k) shifted[k + 1] = falling[k];
      poly_add_scaled(L[{i, 1}], shifted, -1);
    }
    return out;
  }();
  return forms;
}

inline double eval_poly(const DeltaPoly& p, double delta) {
  double r = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) r = r * delta + static_cast<double>(*it);
  return r;
}

}  // namespace detail

/// L_i(x) from the generated recurrence, i = 1..kMaxKernelOrder.
inline double kernel_L_recurrence(int i, double x, const LaplaceContext& c) {
  if (i < 1 || i > kMaxKernelOrder) throw DomainError("kernel_L: order out of range");
  const double t = c.b3 / (1.0 + c.b3 * x);
  double s = 0.0;
  for (const auto& [pq, poly] : detail::l_forms()[i])
    s += detail::eval_poly(poly, c.delta) * std::pow(x, -pq.first) * std::pow(t, pq.second);
  return s;
}

/// L_1..L_3 in closed form; higher orders from the recurrence.
inline double kernel_L(int i, double x, const LaplaceContext& c) {
  const double d = c.delta, b = c.b3, u = 1.0 + b * x;
  switch (i) {
    case 1: return -d * b / u;
    case 2: return -d * b * (d + b * (d - 1.0) * x) / (x * u * u);
    case 3: return -d * b * (2.0 * b * b * x * x + d * d * u * u - d * u * (2.0 + 3.0 * b * x)) / (x * x * u * u * u);
    default: return kernel_L_recurrence(i, x, c);
  }
}

/// U(x) for real x >= 0; U(0) = 0.
inline double kernel_U(double x, const LaplaceContext& c) {
  if (!(x >= 0.0)) throw DomainError("kernel_U: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (c.b3 * x <= kKernelSeriesCrossover) return detail::kernel_U_series(x, c);
  return c.b1 * std::pow(x, c.delta) - c.b2 * gauss_2f1_special(c.delta, -1.0 / (c.b3 * x));
}

/// U(x) continued to Re x > 0 (used by the numerical Laplace inversion).
inline std::complex<double> kernel_U(std::complex<double> x, const LaplaceContext& c) {
  if (x == 0.0) return 0.0;
  if (std::abs(c.b3 * x) <= kKernelSeriesCrossover) return detail::kernel_U_series(x, c);
  return c.b1 * std::pow(x, c.delta) - c.b2 * gauss_2f1_special(c.delta, -1.0 / (c.b3 * x));
}

/// d^i U / dx^i for i = 1..max_order, returned at index i-1.
inline std::vector<double> kernel_U_derivatives(double x, const LaplaceContext& c, int max_order) {
  if (!(x > 0.0)) throw DomainError("kernel_U_derivatives: x must be > 0");
  if (max_order < 1 || max_order > kMaxKernelOrder) throw DomainError("kernel_U_derivatives: order cap exceeded");
  std::vector<double> out(max_order);
  const double r = c.b3 * x;
  if (r <= kKernelSeriesCrossover) {
    // d^i U = b2 delta b3^i sum_m (-1)^(m+i-1) (m+i)!/m! r^m / (m+i-delta)
    double b3i = 1.0;
    for (int i = 1; i <= max_order; ++i) {
      b3i *= c.b3;
      double sum = 0.0, ratio = 1.0;  // (m+i)!/m! r^m
      for (int k = 1; k <= i; ++k) ratio *= k;
      for (int m = 0; m < 5000; ++m) {
        if (m > 0) ratio *= r * (m + i) / m;
        const double t = ((m + i - 1) % 2 == 0 ? 1.0 : -1.0) * ratio / (m + i - c.delta);
        sum += t;
        if (m > i && std::abs(t) < 1e-17 * std::abs(sum)) break;
      }
      out[i - 1] = c.b2 * c.delta * b3i * sum;
    }
    return out;
  }
  const double H = gauss_2f1_special(c.delta, -1.0 / r);
  for (int i = 1; i <= max_order; ++i) {
    const double ff = falling_factorial(c.delta, i);
    out[i - 1] = ff * c.b1 * std::pow(x, c.delta - i) - c.b2 * (ff * H / std::pow(x, i) + kernel_L(i, x, c));
  }
  return out;
}

/// E{exp(-s I)} given (l0, d0) with eta replaced by eta_bar.
inline double laplace_interference(double s, const LaplaceContext& c) {
  if (!(s >= 0.0)) throw DomainError("laplace_interference: s must be >= 0");
  return std::exp(-2.0 * std::numbers::pi * c.lambda_B_active * kernel_U(c.eta_bar * s, c));
}

inline std::complex<double> laplace_interference(std::complex<double> s, const LaplaceContext& c) {
  return std::exp(-2.0 * std::numbers::pi * c.lambda_B_active * kernel_U(c.eta_bar * s, c));
}

inline double laplace_interference(double s, double l0, double d0, const SystemParams& params) {
  return laplace_interference(s, make_laplace_context(l0, d0, params));
}

inline double interference_cdf(double x, const LaplaceContext& c, const EulerInversionOptions& opt = {}) {
  if (!(x > 0.0)) throw DomainError("interference_cdf: x must be > 0");
  if (c.lambda_B_active == 0.0) return 1.0;
  return inverse_laplace_cdf([&c](std::complex<double> s) { return laplace_interference(s, c); }, x, opt);
}

inline double interference_cdf(double x, double l0, double d0, const SystemParams& params,
                               const EulerInversionOptions& opt = {}) {
  return interference_cdf(x, make_laplace_context(l0, d0, params), opt);
}

/// E{sum over interfering BSs of g_d(l_m)} given the serving distance l0.
inline double mean_interfering_direct_power(double l0, const SystemParams& params) {
  const double a = params.alpha();
  return 2.0 * std::numbers::pi * params.lambda_B_active() * params.beta() /
         ((a - 2.0) * std::pow(l0 * l0 + params.H_B() * params.H_B(), a / 2.0 - 1.0));
}

/// The previous quantity averaged over l0.
inline double mean_interfering_direct_power(const SystemParams& params) {
  const double a = params.alpha();
  const double x = params.lambda_B() * std::numbers::pi * params.H_B() * params.H_B();
  return 2.0 * std::numbers::pi * params.lambda_B_active() * params.beta() / (a - 2.0) * params.lambda_B() *
         std::numbers::pi * std::pow(params.H_B(), 4.0 - a) * scaled_exp_integral(a / 2.0 - 1.0, x);
}

/// E{I} given (l0, d0).
inline double mean_interference(double l0, double d0, const SystemParams& params) {
  return eta_bar(d0, params) * mean_interfering_direct_power(l0, params);
}

/// Unconditional E{I}.
inline double mean_interference(const SystemParams& params) {
  return (1.0 + params.N() * irs_power_aggregates(0.0, params).E_I1) * mean_interfering_direct_power(params);
}

}  // namespace hybridnet
