#pragma once

// Globally adaptive 10/21-point Gauss-Kronrod quadrature.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "hybridnet/error.hpp"

namespace hybridnet {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_intervals = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  int intervals = 0;
};

namespace detail {

// QUADPACK qk21 abscissae and weights.
inline constexpr double kXgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
inline constexpr double kWgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208327184184, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
inline constexpr double kWg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk21(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double res_k = fc * kWgk[10];
  double res_g = 0.0;
  double res_abs = std::abs(res_k);
  double fv1[10], fv2[10];
  for (int j = 0; j < 10; ++j) {
    const double dx = h * kXgk[j];
    fv1[j] = f(c - dx);
    fv2[j] = f(c + dx);
    const double s = fv1[j] + fv2[j];
    res_k += kWgk[j] * s;
    res_abs += kWgk[j] * (std::abs(fv1[j]) + std::abs(fv2[j]));
    if (j % 2 == 1) res_g += kWg[j / 2] * s;
  }
  const double mean = 0.5 * res_k;
  double res_asc = kWgk[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j)
    res_asc += kWgk[j] * (std::abs(fv1[j] - mean) + std::abs(fv2[j] - mean));

  res_k *= h;
  res_asc *= std::abs(h);
  res_abs *= std::abs(h);
  double err = std::abs((res_k - res_g * h));
  // QUADPACK's error scaling.
  if (res_asc != 0.0 && err != 0.0) err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps))
    err = std::max(50.0 * eps * res_abs, err);
  if (!std::isfinite(res_k)) err = std::numeric_limits<double>::infinity();
  return {a, b, res_k, err};
}

template <class F>
QuadratureResult adaptive_finite(F& f, std::vector<double> knots, const QuadratureOptions& opt) {
  std::priority_queue<Segment> heap;
  QuadratureResult out;
  double value = 0.0, error = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    if (knots[i + 1] <= knots[i]) continue;
    const Segment s = gk21(f, knots[i], knots[i + 1]);
    value += s.value;
    error += s.error;
    heap.push(s);
    out.evaluations += 21;
  }
  auto totals = [&heap]() {
    // Re-sum from the heap contents so rounding does not accumulate across
    // thousands of incremental updates.
    auto copy = heap;
    double v = 0.0, e = 0.0;
    while (!copy.empty()) {
      v += copy.top().value;
      e += copy.top().error;
      copy.pop();
    }
    return std::pair{v, e};
  };
  while (!heap.empty()) {
    if (error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) break;
    if (static_cast<int>(heap.size()) >= opt.max_intervals) break;
    Segment worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;  // interval at roundoff scale
    heap.pop();
    Segment left = gk21(f, worst.a, mid);
    Segment right = gk21(f, mid, worst.b);
    out.evaluations += 42;
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  auto [v, e] = totals();
  out.value = v;
  out.error = e;
  out.intervals = static_cast<int>(heap.size());
  return out;
}

}  // namespace detail

/// Adaptive quadrature of f over [a, b]; either bound may be infinite. Interior
/// breakpoints (discontinuities, kinks) are honoured. Semi-infinite ranges use
/// x = a + t/(1-t) (or its mirror), doubly infinite ones are split at 0.
/// Returns the estimate with its error bound and does not throw on failure.
template <class F>
QuadratureResult integrate_adaptive_result(F&& f, double a, double b, const QuadratureOptions& opt = {},
                                           std::span<const double> breakpoints = {}) {
  if (std::isnan(a) || std::isnan(b)) throw DomainError("integrate_adaptive: NaN bound");
  if (a == b) return {};
  if (a > b) {
    auto r = integrate_adaptive_result(f, b, a, opt, breakpoints);
    r.value = -r.value;
    return r;
  }
  const bool inf_a = std::isinf(a), inf_b = std::isinf(b);
  if (inf_a && inf_b) {
    std::vector<double> lo, hi;
    for (double x : breakpoints) (x < 0.0 ? lo : hi).push_back(x);
    auto r1 = integrate_adaptive_result(f, a, 0.0, opt, lo);
    auto r2 = integrate_adaptive_result(f, 0.0, b, opt, hi);
    return {r1.value + r2.value, r1.error + r2.error, r1.evaluations + r2.evaluations,
            r1.intervals + r2.intervals};
  }

  std::vector<double> inner;
  for (double x : breakpoints)
    if (x > a && x < b) inner.push_back(x);
  std::sort(inner.begin(), inner.end());

  if (!inf_a && !inf_b) {
    std::vector<double> knots{a};
    knots.insert(knots.end(), inner.begin(), inner.end());
    knots.push_back(b);
    return detail::adaptive_finite(f, std::move(knots), opt);
  }

  // One infinite end: t in [0, 1) maps to x = base +/- t/(1-t).
  const double base = inf_b ? a : b;
  const double sign = inf_b ? 1.0 : -1.0;
  auto g = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double u = 1.0 - t;
    const double v = f(base + sign * t / u) / (u * u);
    return std::isfinite(v) ? v : 0.0;
  };
  std::vector<double> knots{0.0};
  std::vector<double> mapped;
  for (double x : inner) {
    const double y = std::abs(x - base);
    mapped.push_back(y / (1.0 + y));
  }
  std::sort(mapped.begin(), mapped.end());
  knots.insert(knots.end(), mapped.begin(), mapped.end());
  knots.push_back(1.0);
  return detail::adaptive_finite(g, std::move(knots), opt);
}

/// As integrate_adaptive_result, but throws QuadratureError (carrying the best
/// estimate and its error bound) if the tolerance was not reached.
template <class F>
double integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opt = {},
                          std::span<const double> breakpoints = {}) {
  auto r = integrate_adaptive_result(f, a, b, opt, breakpoints);
  const double target = std::max(opt.abs_tol, opt.rel_tol * std::abs(r.value));
  if (!(r.error <= target) || !std::isfinite(r.value)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "quadrature tolerance not met on [%g, %g]: estimate %.12g, error bound %.3g",
                  a, b, r.value, r.error);
    throw QuadratureError(buf, r.value, r.error);
  }
  return r.value;
}

}  // namespace hybridnet
