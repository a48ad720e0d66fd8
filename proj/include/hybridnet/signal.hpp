#pragma once

// Conditional signal power S | (l0, d0): moment-matched Gamma law in the three
// association regimes, the kappa gain factors and the unconditional mean.

#include <array>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "hybridnet/channel.hpp"
#include "hybridnet/error.hpp"
#include "hybridnet/irs_aggregates.hpp"
#include "hybridnet/model.hpp"
#include "hybridnet/specfun/gamma.hpp"
#include "hybridnet/specfun/quadrature.hpp"

namespace hybridnet {

/// Mean signal gain over the direct link alone, beamformed regime.
inline double kappa_bf(double d0, const SystemParams& params, double N) {
  const double gr = path_loss_irs_ue(d0, params);
  const double e1 = d0 <= params.D2() ? irs_power_aggregates(d0, params).E_I1 : 0.0;
  return 1.0 + gain_coefficients(N).G_bf * gr + N * kQuarterPi * std::sqrt(std::numbers::pi * gr) + N * e1;
}
inline double kappa_bf(double d0, const SystemParams& params) { return kappa_bf(d0, params, params.N()); }

/// Same with IRS 0 randomly scattering instead of beamforming.
inline double kappa_sc(double d0, const SystemParams& params, double N) {
  const double gr = path_loss_irs_ue(d0, params);
  const double e1 = d0 <= params.D2() ? irs_power_aggregates(d0, params).E_I1 : 0.0;
  return 1.0 + N * gr + N * e1;
}
inline double kappa_sc(double d0, const SystemParams& params) { return kappa_sc(d0, params, params.N()); }

struct ConditionalMoments {
  double mean = 0.0;
  double second = 0.0;
  double variance() const { return second - mean * mean; }
};

struct GammaSpec {
  double k = 1.0;
  double theta = 0.0;
  Regime regime = Regime::NoIrs;

  double mean() const { return k * theta; }
  double variance() const { return k * theta * theta; }
  double cdf(double x) const { return x <= 0.0 ? 0.0 : regularized_lower_gamma(k, x / theta); }
};

/// First two moments of S given (l0, d0), per regime.
inline ConditionalMoments conditional_signal_moments(double l0, double d0, const SystemParams& params) {
  if (!(l0 >= 0.0) || !(d0 >= 0.0)) throw DomainError("conditional_signal_moments: distances must be >= 0");
  const double g = path_loss_direct(l0, params);
  const double N = params.N();
  switch (classify_regime(d0, params)) {
    case Regime::Beamformed: {
      const auto c = cascade_moments_bf(l0, d0, params);
      return {c.m1_h1sq + c.m1_h2sq, c.m2_h1sq + c.m2_h2sq + 4.0 * c.m1_h1sq * c.m1_h2sq};
    }
    case Regime::ScatteredOnly: {
      // S is exponential given the IRS layout; only the layout is averaged.
      const auto a = irs_power_aggregates(params.D1(), params);
      return {g * (1.0 + N * a.E_I1), 2.0 * g * g * (1.0 + 2.0 * N * a.E_I1 + N * N * a.E_I3)};
    }
    case Regime::NoIrs:
      break;
  }
  return {g, 2.0 * g * g};
}

/// Moment-matched Gamma. A non-positive variance means the stacked moment
/// approximations broke down, and is reported rather than clamped.
inline GammaSpec gamma_from_moments(const ConditionalMoments& m, Regime regime) {
  const double var = m.variance();
  if (!(m.mean > 0.0) || !(var > 0.0) || !std::isfinite(var)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "signal moments invalid (mean %.6g, variance %.6g, regime %s)", m.mean, var,
                  to_string(regime));
    throw NumericalError(buf);
  }
  if (regime == Regime::NoIrs) return {1.0, m.mean, regime};
  return {m.mean * m.mean / var, var / m.mean, regime};
}

inline GammaSpec signal_gamma_spec(double l0, double d0, const SystemParams& params) {
  const Regime r = classify_regime(d0, params);
  return gamma_from_moments(conditional_signal_moments(l0, d0, params), r);
}

/// E{g_d(l0)} over the nearest-BS distance.
inline double mean_direct_power(const SystemParams& params) {
  const double a = params.alpha();
  const double x = params.lambda_B() * std::numbers::pi * params.H_B() * params.H_B();
  return params.beta() * params.lambda_B() * std::numbers::pi * std::pow(params.H_B(), 2.0 - a) *
         scaled_exp_integral(a / 2.0, x);
}

/// Unconditional mean signal power.
inline double mean_signal_power(const SystemParams& params, const QuadratureOptions& opt = {1e-14, 1e-10, 4000}) {
  const double EB0 = mean_direct_power(params);
  if (params.lambda_I() == 0.0) return EB0;
  const auto P = regime_probabilities(params);
  const double bf = integrate_adaptive(
      [&](double d0) { return kappa_bf(d0, params) * pdf_d0(d0, params); }, 0.0, params.D1(), opt);
  const double sc = P.P_sc * (1.0 + params.N() * irs_power_aggregates(params.D1(), params).E_I1);
  return EB0 * (bf + sc + P.P_wo);
}

}  // namespace hybridnet
