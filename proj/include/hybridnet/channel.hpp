#pragma once

// Cascaded BS-IRS-UE channel statistics and fading samplers.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "hybridnet/error.hpp"
#include "hybridnet/irs_aggregates.hpp"
#include "hybridnet/model.hpp"

namespace hybridnet {

inline constexpr double kQuarterPi = std::numbers::pi / 4.0;
/// 1 - pi^2/16: variance of a unit double-Rayleigh amplitude.
inline constexpr double kDoubleRayleighVar = 1.0 - std::numbers::pi * std::numbers::pi / 16.0;

struct GainCoefficients {
  double G_bf = 0.0;
  double G_sc = 0.0;
};

/// N is a double so degenerate N = 0 can be probed in tests.
inline GainCoefficients gain_coefficients(double N) {
  if (!(N >= 0.0)) throw DomainError("gain_coefficients: N must be >= 0");
  const double c = std::numbers::pi * std::numbers::pi / 16.0;
  return {c * N * N + (1.0 - c) * N, N};
}

/// Amplitude statistics of one cascaded element h_i * h_r.
struct ElementStats {
  double mean_amp = 0.0;
  double var_amp = 0.0;
  double g_i = 0.0;
  double g_r = 0.0;
};

inline ElementStats element_stats(double g_i, double g_r) {
  if (!(g_i > 0.0 && g_r > 0.0)) throw DomainError("element_stats: gains must be > 0");
  return {kQuarterPi * std::sqrt(g_i * g_r), kDoubleRayleighVar * g_i * g_r, g_i, g_r};
}

struct AmplitudeStats {
  double mean = 0.0;
  double variance = 0.0;
  double second_moment = 0.0;
};

/// Normal approximation of the co-phased sum of N element amplitudes.
inline AmplitudeStats beamformed_amplitude_stats(double g_i, double g_r, int N) {
  if (!(g_i > 0.0 && g_r > 0.0)) throw DomainError("beamformed_amplitude_stats: gains must be > 0");
  if (N < 1) throw DomainError("beamformed_amplitude_stats: N must be >= 1");
  AmplitudeStats s;
  s.mean = N * kQuarterPi * std::sqrt(g_i * g_r);
  s.variance = N * kDoubleRayleighVar * g_i * g_r;
  s.second_moment = gain_coefficients(N).G_bf * g_i * g_r;
  return s;
}

struct ScatteredStats {
  double variance = 0.0;            // of the aggregate complex channel
  double component_variance = 0.0;  // of one element's in-phase (or quadrature) part
};

/// Randomly phased sum of N elements: zero-mean CSCG.
inline ScatteredStats scattered_channel_variance(double g_i, double g_r, int N) {
  if (!(g_i > 0.0 && g_r > 0.0)) throw DomainError("scattered_channel_variance: gains must be > 0");
  if (N < 1) throw DomainError("scattered_channel_variance: N must be >= 1");
  return {N * g_i * g_r, 0.5 * g_i * g_r};
}

struct CascadeMoments {
  double m1_h1sq = 0.0;
  double m2_h1sq = 0.0;
  double m1_h2sq = 0.0;
  double m2_h2sq = 0.0;
};

/// Moments of |h1|^2 (direct + beamformed IRS 0) and |h2|^2 (other IRSs)
/// given (l0, d0), with g_i approximated by g_d(l0).
inline CascadeMoments cascade_moments_bf(double l0, double d0, const SystemParams& params) {
  if (!(l0 >= 0.0) || !(d0 >= 0.0)) throw DomainError("cascade_moments_bf: distances must be >= 0");
  if (d0 > params.D1()) throw DomainError("cascade_moments_bf: d0 must be <= D1");
  const double pi = std::numbers::pi;
  const double N = params.N();
  const double g = path_loss_direct(l0, params);
  const double G = path_loss_irs_ue(d0, params);
  const double sG = std::sqrt(G);
  const double Gbf = gain_coefficients(N).G_bf;
  const double q = kDoubleRayleighVar;
  const auto agg = irs_power_aggregates(d0, params);

  CascadeMoments m;
  m.m1_h1sq = g * (1.0 + N * kQuarterPi * std::sqrt(pi) * sG + Gbf * G);
  const double c3 = 2.0 * std::sqrt(pi) * (std::pow(pi, 3) * N * N * N / 64.0 + 3.0 * pi * N * N * q / 4.0);
  const double c4 = std::pow(pi, 4) * std::pow(N, 4) / 256.0 + 3.0 * pi * pi * N * N * N * q / 8.0 + 3.0 * N * N * q * q;
  m.m2_h1sq = g * g * (2.0 + 0.75 * std::pow(pi, 1.5) * N * sG + 6.0 * Gbf * G + c3 * G * sG + c4 * G * G);
  m.m1_h2sq = N * g * agg.E_I1;
  m.m2_h2sq = 2.0 * N * N * g * g * agg.E_I3;
  return m;
}

// Samplers --------------------------------------------------------------------
// All take the engine by reference; one engine per concurrent task.

/// Rayleigh amplitude with E{amp^2} = 1.
template <class Rng>
double sample_fading_rayleigh(Rng& rng) {
  return std::sqrt(std::exponential_distribution<double>(1.0)(rng));
}

/// Product of two independent unit-power Rayleigh amplitudes.
template <class Rng>
double sample_fading_double_rayleigh(Rng& rng) {
  const double a = sample_fading_rayleigh(rng);
  return a * sample_fading_rayleigh(rng);
}

template <class Rng>
double sample_uniform_phase(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
}

/// CN(0, 1) sample.
template <class Rng>
std::complex<double> sample_cscg(Rng& rng) {
  return std::polar(sample_fading_rayleigh(rng), sample_uniform_phase(rng));
}

}  // namespace hybridnet
