#pragma once

// Conditional non-outage probability, coverage probability, spatial
// throughput and the cost-constrained IRS/BS density-ratio search.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "hybridnet/error.hpp"
#include "hybridnet/interference.hpp"
#include "hybridnet/model.hpp"
#include "hybridnet/parallel.hpp"
#include "hybridnet/signal.hpp"
#include "hybridnet/specfun/bell.hpp"
#include "hybridnet/specfun/quadrature.hpp"

namespace hybridnet {

struct NonOutageConfig {
  double k_tilde = 8.0;         // above this shape, S is replaced by its mean
  double M = 1.5;               // interpolation priority factor
  double raw_tolerance = 1e-6;  // allowed excursion of the raw sum outside [0, 1]
  double integer_tolerance = 1e-9;
  EulerInversionOptions inversion{};

  void validate() const {
    if (!(k_tilde >= 2.0)) throw ConfigError("k_tilde must be >= 2");
    if (k_tilde > kMaxKernelOrder) throw ConfigError("k_tilde exceeds the derivative order cap");
    if (!(M > 0.0)) throw ConfigError("M must be > 0");
  }
};

/// P{Gamma(k, theta) > gamma_bar (I + W)} for integer k, from the Laplace
/// transform of Y = gamma_bar (I + W) / theta:
///   sum_{i<k} (-1)^i / i! d^i/ds^i exp(V(s)) |_{s=1}
/// with the derivatives of exp(V) as complete Bell polynomials in V's.
inline double non_outage_integer_shape(int k, double theta, const LaplaceContext& ctx, const SystemParams& params,
                                       const NonOutageConfig& cfg = {}) {
  if (k < 0) throw DomainError("non_outage_integer_shape: k must be >= 0");
  if (k == 0) return 0.0;
  if (k > kMaxKernelOrder + 1) throw DomainError("non_outage_integer_shape: k exceeds the derivative order cap");
  if (!(theta > 0.0)) throw DomainError("non_outage_integer_shape: theta must be > 0");
  const double g = params.gamma_bar();
  const double c = 2.0 * std::numbers::pi * ctx.lambda_B_active;
  const double xt = g * ctx.eta_bar / theta;
  const double noise = g * params.W() / theta;
  const double V = -noise - c * kernel_U(xt, ctx);

  double raw = 0.0;
  if (k == 1) {
    raw = std::exp(V);
  } else {
    // y_j = (-1)^j V^(j) >= 0, so (-1)^i B_i(V', ..., V^(i)) = B_i(y) and the
    // sum has no cancellation.
    const auto dU = kernel_U_derivatives(xt, ctx, k - 1);
    std::vector<double> y(k - 1);
    double xp = 1.0;
    for (int j = 1; j <= k - 1; ++j) {
      xp *= xt;
      const double vj = -c * xp * dU[j - 1] - (j == 1 ? noise : 0.0);
      y[j - 1] = (j % 2 == 0) ? vj : -vj;
    }
    const auto B = complete_bell_sequence(y);
    double log_fact = 0.0;
    for (int i = 0; i < k; ++i) {
      if (i > 0) log_fact += std::log(static_cast<double>(i));
      if (B[i] > 0.0) raw += std::exp(V + std::log(B[i]) - log_fact);
      else if (B[i] < 0.0) raw -= std::exp(V + std::log(-B[i]) - log_fact);
    }
  }
  if (!(raw >= -cfg.raw_tolerance && raw <= 1.0 + cfg.raw_tolerance)) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "non-outage sum out of range: %.9g (k=%d, theta=%.6g, l0=%.6g)", raw, k, theta,
                  ctx.l0);
    throw NumericalError(buf);
  }
  return std::clamp(raw, 0.0, 1.0);
}

/// Interpolation weight on the lower integer shape.
inline double shape_interpolation_weight(double k, double M) {
  const double lo = std::floor(k), hi = std::ceil(k);
  if (hi == lo) return 1.0;
  return M * (hi - k) / (M * (hi - k) + (k - lo));
}

/// Non-outage probability given a matched signal law and interference context.
inline double non_outage(const GammaSpec& S, const LaplaceContext& ctx, const SystemParams& params,
                         const NonOutageConfig& cfg = {}) {
  if (S.k > cfg.k_tilde) {
    const double z = S.mean() / params.gamma_bar() - params.W();
    if (z <= 0.0) return 0.0;
    return interference_cdf(z, ctx, cfg.inversion);
  }
  const double kr = std::round(S.k);
  if (std::abs(S.k - kr) < cfg.integer_tolerance)
    return non_outage_integer_shape(static_cast<int>(kr), S.theta, ctx, params, cfg);
  const int lo = static_cast<int>(std::floor(S.k));
  const double w = shape_interpolation_weight(S.k, cfg.M);
  // The scale theta_S is kept for both neighbours, so they bracket the target.
  const double p_lo = non_outage_integer_shape(lo, S.theta, ctx, params, cfg);
  const double p_hi = non_outage_integer_shape(lo + 1, S.theta, ctx, params, cfg);
  return w * p_lo + (1.0 - w) * p_hi;
}

inline double non_outage(double l0, double d0, const SystemParams& params, const NonOutageConfig& cfg = {}) {
  return non_outage(signal_gamma_spec(l0, d0, params), make_laplace_context(l0, d0, params), params, cfg);
}

struct CoverageConfig {
  NonOutageConfig non_outage{};
  double abs_tol = 1e-5;    // per integration axis
  double l0_tail = 1e-6;    // l0 truncated at the (1 - l0_tail) quantile
  int panels = 8;           // outer l0 panels (unit of parallel work)
  int threads = 1;
};

struct RegimeBreakdown {
  double bf = 0.0;
  double sc = 0.0;
  double wo = 0.0;
};

struct CoverageResult {
  double p_cov = 0.0;
  double nu = 0.0;  // bps/Hz/m^2
  RegimeBreakdown breakdown;
};

/// nu = R_bar p lambda_B P_cov.
inline double spatial_throughput(const SystemParams& params, double p_cov) {
  return params.R_bar() * params.p() * params.lambda_B() * p_cov;
}

/// Three-part coverage integral over (l0, d0). The d0 axis only spans the
/// beamformed range [0, D1]; the other two regimes are constant in d0.
inline CoverageResult coverage_probability(const SystemParams& params, const CoverageConfig& cfg = {}) {
  cfg.non_outage.validate();
  if (cfg.panels < 1) throw ConfigError("coverage: panels must be >= 1");
  const auto P = regime_probabilities(params);
  const double lmax = nearest_distance_quantile(1.0 - cfg.l0_tail, params.lambda_B());

  // Panels equally spaced in the l0 cdf.
  const int np = cfg.panels;
  std::vector<double> edges(np + 1);
  for (int i = 0; i <= np; ++i)
    edges[i] = i == np ? lmax : nearest_distance_quantile((1.0 - cfg.l0_tail) * i / np, params.lambda_B());

  const QuadratureOptions outer{cfg.abs_tol / np, 0.0, 2000};
  const QuadratureOptions inner{cfg.abs_tol, 0.0, 2000};
  std::vector<RegimeBreakdown> parts(np);

  auto checked = [](const char* what, auto&& fn) {
    try {
      return fn();
    } catch (const QuadratureError& e) {
      throw QuadratureError(std::string("coverage ") + what + ": " + e.what(), e.estimate(), e.error_bound());
    }
  };

  parallel_for(np, cfg.threads, [&](std::size_t i) {
    const double a = edges[i], b = edges[i + 1];
    RegimeBreakdown r;
    if (P.P_bf > 0.0) {
      r.bf = checked("beamformed (l0, d0) integral", [&] {
        return integrate_adaptive(
            [&](double l0) {
              const double inner_v = checked("beamformed d0 integral", [&] {
                return integrate_adaptive(
                    [&](double d0) { return non_outage(l0, d0, params, cfg.non_outage) * pdf_d0(d0, params); },
                    0.0, params.D1(), inner);
              });
              return inner_v * pdf_l0(l0, params);
            },
            a, b, outer);
      });
    }
    if (P.P_sc > 0.0) {
      const double d_sc = 0.5 * (params.D1() + params.D2());  // any point of (D1, D2]
      r.sc = P.P_sc * checked("scattered l0 integral", [&] {
        return integrate_adaptive(
            [&](double l0) { return non_outage(l0, d_sc, params, cfg.non_outage) * pdf_l0(l0, params); }, a, b,
            outer);
      });
    }
    if (P.P_wo > 0.0) {
      const double d_wo = 2.0 * params.D2();
      r.wo = P.P_wo * checked("no-IRS l0 integral", [&] {
        return integrate_adaptive(
            [&](double l0) { return non_outage(l0, d_wo, params, cfg.non_outage) * pdf_l0(l0, params); }, a, b,
            outer);
      });
    }
    parts[i] = r;
  });

  CoverageResult out;
  for (const auto& r : parts) {
    out.breakdown.bf += r.bf;
    out.breakdown.sc += r.sc;
    out.breakdown.wo += r.wo;
  }
  out.p_cov = std::clamp(out.breakdown.bf + out.breakdown.sc + out.breakdown.wo, 0.0, 1.0);
  out.nu = spatial_throughput(params, out.p_cov);
  return out;
}

struct DensityRatioPoint {
  double zeta = 0.0;
  double lambda_B = 0.0;
  double lambda_I = 0.0;
  CoverageResult coverage;
};

struct DensityRatioOptimum {
  double zeta_star = 0.0;
  double nu_star = 0.0;
  std::vector<DensityRatioPoint> curve;
};

/// 0, 0.25, ..., 10.
inline std::vector<double> default_zeta_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 40; ++i) g.push_back(0.25 * i);
  return g;
}

/// Throughput along a zeta grid at fixed total cost C; ties go to smaller zeta.
inline DensityRatioOptimum optimal_density_ratio(double C, const CostModel& cost, const SystemParams& params,
                                                 const CoverageConfig& cfg = {},
                                                 const std::vector<double>& zeta_grid = default_zeta_grid()) {
  if (zeta_grid.empty()) throw ConfigError("optimal_density_ratio: empty zeta grid");
  if (!std::is_sorted(zeta_grid.begin(), zeta_grid.end()) ||
      std::adjacent_find(zeta_grid.begin(), zeta_grid.end()) != zeta_grid.end())
    throw ConfigError("optimal_density_ratio: zeta grid must be strictly ascending");
  DensityRatioOptimum out;
  for (double zeta : zeta_grid) {
    const Densities d = cost_to_density(C, zeta, cost);
    const SystemParams p = params.modified([&](NetworkConfig& c) {
      c.lambda_B = d.lambda_B;
      c.lambda_I = d.lambda_I;
    });
    DensityRatioPoint pt{zeta, d.lambda_B, d.lambda_I, coverage_probability(p, cfg)};
    if (out.curve.empty() || pt.coverage.nu > out.nu_star) {
      out.zeta_star = zeta;
      out.nu_star = pt.coverage.nu;
    }
    out.curve.push_back(pt);
  }
  return out;
}

}  // namespace hybridnet
