#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "hybridnet/error.hpp"

namespace hybridnet {

/// Complete Bell polynomials B_0..B_n of x_1..x_n, by
///   B_{i+1} = sum_{j=0}^{i} C(i, j) B_{i-j} x_{j+1},  B_0 = 1.
/// If x_j are the derivatives of g at a point, B_n is the n-th derivative of
/// exp(g) there divided by exp(g).
inline std::vector<double> complete_bell_sequence(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> B(n + 1, 0.0);
  B[0] = 1.0;
  std::vector<double> binom{1.0};  // row i of Pascal's triangle
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j <= i; ++j) s += binom[j] * B[i - j] * x[j];
    B[i + 1] = s;
    std::vector<double> next(i + 2, 1.0);
    for (std::size_t j = 1; j <= i; ++j) next[j] = binom[j - 1] + binom[j];
    binom.swap(next);
  }
  return B;
}

/// B_n(x_1, ..., x_n) with n = x.size() >= 1.
inline double complete_bell(std::span<const double> x) {
  if (x.empty()) throw DomainError("complete_bell: need at least one argument");
  return complete_bell_sequence(x).back();
}

/// Falling factorial (delta)_i = delta (delta-1) ... (delta-i+1).
inline double falling_factorial(double delta, int i) {
  if (i < 0) throw DomainError("falling_factorial: i must be >= 0");
  double r = 1.0;
  for (int k = 0; k < i; ++k) r *= delta - k;
  return r;
}

}  // namespace hybridnet
