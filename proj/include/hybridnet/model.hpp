#pragma once

// System parameters, path-loss laws, distance distributions, regime
// probabilities and the BS/IRS deployment cost model.

#include <cmath>
#include <numbers>
#include <string>

#include "hybridnet/error.hpp"

namespace hybridnet {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
/// Reference BS/IRS density used to express sweeps (per m^2).
inline constexpr double kLambda0 = 5e-6;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

/// Raw, unvalidated inputs. Defaults are the desk-scale reference scenario.
struct NetworkConfig {
  double lambda_B = 10.0 * kLambda0;  // BS density (m^-2)
  double lambda_I = 0.0;              // IRS density (m^-2)
  double p = 0.5;                     // loading factor
  int N = 2000;                       // elements per IRS
  double H_B = 20.0;                  // m
  double H_I = 1.0;                   // m
  double alpha = 3.0;                 // path-loss exponent
  double f_c = 2e9;                   // Hz
  double D1 = 25.0;                   // IRS association radius (m)
  double D2 = 50.0;                   // IRS interference radius (m)
  double W_dB = -147.0;               // sigma^2 / P0 in dB
  double R_bar = 1.0;                 // target rate (bps/Hz)
};

/// Validated, immutable parameter set. Derived constants (beta, linear W,
/// gamma_bar) are computed once at construction, so they cannot drift from
/// the inputs they depend on. Use the with_* helpers to derive variants.
class SystemParams {
 public:
  SystemParams() : SystemParams(NetworkConfig{}) {}

  explicit SystemParams(const NetworkConfig& cfg) : cfg_(cfg) {
    auto require = [](bool ok, const char* msg) {
      if (!ok) throw ConfigError(msg);
    };
    require(std::isfinite(cfg.lambda_B) && cfg.lambda_B > 0.0, "lambda_B must be > 0");
    require(std::isfinite(cfg.lambda_I) && cfg.lambda_I >= 0.0, "lambda_I must be >= 0");
    require(cfg.p > 0.0 && cfg.p <= 1.0, "p must lie in (0, 1]");
    require(cfg.N >= 1, "N must be >= 1");
    require(cfg.H_B >= 1.0, "H_B must be >= 1 m");
    require(cfg.H_I >= 1.0, "H_I must be >= 1 m");
    // The closed forms carry 1/(alpha - 2) factors, so alpha = 2 is rejected.
    require(std::isfinite(cfg.alpha) && cfg.alpha > 2.0, "alpha must be > 2");
    require(std::isfinite(cfg.f_c) && cfg.f_c > 0.0, "f_c must be > 0");
    require(cfg.D1 > 0.0 && cfg.D1 < cfg.D2 && std::isfinite(cfg.D2), "need 0 < D1 < D2");
    require(std::isfinite(cfg.W_dB), "W_dB must be finite");
    require(std::isfinite(cfg.R_bar) && cfg.R_bar > 0.0, "R_bar must be > 0");

    beta_ = std::pow(4.0 * std::numbers::pi * cfg.f_c / kSpeedOfLight, -2.0);
    W_ = db_to_linear(cfg.W_dB);
    gamma_bar_ = std::exp2(cfg.R_bar) - 1.0;
  }

  const NetworkConfig& config() const noexcept { return cfg_; }

  double lambda_B() const noexcept { return cfg_.lambda_B; }
  double lambda_I() const noexcept { return cfg_.lambda_I; }
  double p() const noexcept { return cfg_.p; }
  int N() const noexcept { return cfg_.N; }
  double H_B() const noexcept { return cfg_.H_B; }
  double H_I() const noexcept { return cfg_.H_I; }
  double alpha() const noexcept { return cfg_.alpha; }
  double f_c() const noexcept { return cfg_.f_c; }
  double D1() const noexcept { return cfg_.D1; }
  double D2() const noexcept { return cfg_.D2; }
  double W_dB() const noexcept { return cfg_.W_dB; }
  double R_bar() const noexcept { return cfg_.R_bar; }

  /// Mean power gain at 1 m, (4 pi f_c / c)^-2.
  double beta() const noexcept { return beta_; }
  /// Normalized noise power sigma^2 / P0 (linear).
  double W() const noexcept { return W_; }
  /// SINR threshold 2^R_bar - 1.
  double gamma_bar() const noexcept { return gamma_bar_; }
  /// Density of co-channel BSs, p * lambda_B.
  double lambda_B_active() const noexcept { return cfg_.p * cfg_.lambda_B; }
  /// 2 / alpha.
  double delta() const noexcept { return 2.0 / cfg_.alpha; }

  template <class Mutator>
  SystemParams modified(Mutator&& mutate) const {
    NetworkConfig c = cfg_;
    mutate(c);
    return SystemParams(c);
  }

  SystemParams with_lambda_B(double v) const {
    return modified([v](NetworkConfig& c) { c.lambda_B = v; });
  }
  SystemParams with_lambda_I(double v) const {
    return modified([v](NetworkConfig& c) { c.lambda_I = v; });
  }
  SystemParams with_p(double v) const {
    return modified([v](NetworkConfig& c) { c.p = v; });
  }
  SystemParams with_N(int v) const {
    return modified([v](NetworkConfig& c) { c.N = v; });
  }
  SystemParams with_W_dB(double v) const {
    return modified([v](NetworkConfig& c) { c.W_dB = v; });
  }
  SystemParams with_R_bar(double v) const {
    return modified([v](NetworkConfig& c) { c.R_bar = v; });
  }
  /// Sets the SINR threshold; R_bar follows as log2(1 + gamma_bar).
  SystemParams with_gamma_bar(double gamma_bar) const {
    if (!(gamma_bar > 0.0)) throw ConfigError("gamma_bar must be > 0");
    return with_R_bar(std::log2(1.0 + gamma_bar));
  }

 private:
  NetworkConfig cfg_;
  double beta_ = 0.0;
  double W_ = 0.0;
  double gamma_bar_ = 0.0;
};

// Path loss -----------------------------------------------------------------

/// g_d(l): mean BS-UE power gain at horizontal distance l.
inline double path_loss_direct(double l, const SystemParams& params) {
  return params.beta() * std::pow(l * l + params.H_B() * params.H_B(), -params.alpha() / 2.0);
}

/// g_r(d): mean IRS-UE power gain at horizontal distance d.
inline double path_loss_irs_ue(double d, const SystemParams& params) {
  return params.beta() * std::pow(d * d + params.H_I() * params.H_I(), -params.alpha() / 2.0);
}

/// Mean BS-IRS power gain at horizontal distance r (height gap H_B - H_I).
inline double path_loss_bs_irs(double r, const SystemParams& params) {
  const double dh = params.H_B() - params.H_I();
  return params.beta() * std::pow(r * r + dh * dh, -params.alpha() / 2.0);
}

// Nearest-point distances of a 2D HPPP -----------------------------------------

/// Density of the distance to the nearest point of an HPPP with density lambda.
inline double nearest_distance_pdf(double x, double lambda) {
  const double pi = std::numbers::pi;
  return 2.0 * pi * lambda * x * std::exp(-lambda * pi * x * x);
}

/// P{nearest distance > x}.
inline double nearest_distance_ccdf(double x, double lambda) {
  return std::exp(-lambda * std::numbers::pi * x * x);
}

/// Inverse of the nearest-distance cdf; q in [0, 1).
inline double nearest_distance_quantile(double q, double lambda) {
  return std::sqrt(-std::log1p(-q) / (lambda * std::numbers::pi));
}

inline double pdf_l0(double l0, const SystemParams& params) {
  return nearest_distance_pdf(l0, params.lambda_B());
}

inline double pdf_d0(double d0, const SystemParams& params) {
  return nearest_distance_pdf(d0, params.lambda_I());
}

// Regimes -------------------------------------------------------------------

enum class Regime { Beamformed, ScatteredOnly, NoIrs };

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Beamformed: return "beamformed";
    case Regime::ScatteredOnly: return "scattered";
    case Regime::NoIrs: return "no_irs";
  }
  return "?";
}

/// Half-open regime boundaries: d0 <= D1 beamformed, D1 < d0 <= D2 scattered.
/// With lambda_I = 0 there are no IRSs, whatever d0 says.
inline Regime classify_regime(double d0, const SystemParams& params) {
  if (params.lambda_I() == 0.0) return Regime::NoIrs;
  if (d0 <= params.D1()) return Regime::Beamformed;
  if (d0 <= params.D2()) return Regime::ScatteredOnly;
  return Regime::NoIrs;
}

struct RegimeProbabilities {
  double P_bf = 0.0;
  double P_sc = 0.0;
  double P_wo = 1.0;
};

inline RegimeProbabilities regime_probabilities(const SystemParams& params) {
  const double pi = std::numbers::pi;
  const double a1 = params.lambda_I() * pi * params.D1() * params.D1();
  const double a2 = params.lambda_I() * pi * params.D2() * params.D2();
  RegimeProbabilities out;
  out.P_bf = -std::expm1(-a1);
  out.P_wo = std::exp(-a2);
  // e^-a1 - e^-a2 written to keep precision when both are close to 1.
  out.P_sc = std::exp(-a1) * -std::expm1(-(a2 - a1));
  return out;
}

// Deployment cost -------------------------------------------------------------

struct CostModel {
  double c0 = 1.0;   // cost of one BS
  double K_N = 5.0;  // BS/IRS cost ratio

  /// Total cost per m^2 for BS density lambda_B and IRS/BS density ratio zeta.
  double total_cost(double lambda_B, double zeta) const {
    return lambda_B * c0 * (1.0 + zeta / K_N);
  }
};

struct Densities {
  double lambda_B = 0.0;
  double lambda_I = 0.0;
};

/// Splits a cost budget C into BS and IRS densities at ratio zeta.
inline Densities cost_to_density(double C, double zeta, const CostModel& cost) {
  if (!(C > 0.0)) throw DomainError("cost_to_density: C must be > 0");
  if (!(zeta >= 0.0)) throw DomainError("cost_to_density: zeta must be >= 0");
  if (!(cost.K_N > 0.0) || !(cost.c0 > 0.0)) throw DomainError("cost_to_density: c0 and K_N must be > 0");
  Densities d;
  d.lambda_B = C / (cost.c0 * (1.0 + zeta / cost.K_N));
  d.lambda_I = zeta * d.lambda_B;
  return d;
}

}  // namespace hybridnet
