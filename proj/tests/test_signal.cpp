#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "hybridnet/montecarlo.hpp"
#include "hybridnet/signal.hpp"
#include "test_util.hpp"

using namespace hybridnet;

namespace {

SystemParams with_irs(int N = 2000, double lambda_I = 10.0 * kLambda0) {
  return SystemParams().modified([&](NetworkConfig& c) {
    c.N = N;
    c.lambda_I = lambda_I;
  });
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(Kappa, DegenerateNoElements) {
  const SystemParams p = with_irs();
  EXPECT_DOUBLE_EQ(kappa_bf(3.0, p, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(kappa_sc(3.0, p, 0.0), 1.0);
}

TEST(Kappa, BeamformingBeatsScattering) {
  const SystemParams p = with_irs();
  for (int N : {1, 2, 10, 400, 2000})
    for (double d0 : {0.0, 1.0, 10.0, 25.0}) EXPECT_GT(kappa_bf(d0, p, N), kappa_sc(d0, p, N));
}

TEST(Kappa, BeamformingTermDominatesNearIrs) {
  const SystemParams p = with_irs();
  const double gr = path_loss_irs_ue(1.0, p);
  const double Gbf = gain_coefficients(2000.0).G_bf;
  const double e1 = irs_power_aggregates(1.0, p).E_I1;
  const double direct = 1.0 + Gbf * gr + 2000.0 * std::numbers::pi / 4.0 * std::sqrt(std::numbers::pi * gr) + 2000.0 * e1;
  EXPECT_NEAR(kappa_bf(1.0, p) / direct, 1.0, 1e-14);
  // The beamforming term is the largest, but the direct/IRS cross term still
  // carries about 14% at N = 2000 (values from an independent evaluation).
  EXPECT_NEAR(Gbf * gr / kappa_bf(1.0, p), 0.85683, 1e-4);
  EXPECT_NEAR(kappa_bf(1.0, p), 144.910, 1e-3);
}

TEST(GammaSpec, NoIrsIsExponential) {
  const SystemParams p = with_irs();
  const auto s = signal_gamma_spec(50.0, 60.0, p);
  EXPECT_EQ(s.regime, Regime::NoIrs);
  EXPECT_EQ(s.k, 1.0);
  EXPECT_DOUBLE_EQ(s.theta, path_loss_direct(50.0, p));
  EXPECT_NEAR(s.cdf(s.theta), 1.0 - std::exp(-1.0), 1e-14);
}

TEST(GammaSpec, ScatteredWithoutOtherIrsIsExponential) {
  const auto s = signal_gamma_spec(50.0, 30.0, with_irs(2000, 1e-12));
  EXPECT_EQ(s.regime, Regime::ScatteredOnly);
  EXPECT_NEAR(s.k, 1.0, 1e-6);
  EXPECT_NEAR(s.theta / path_loss_direct(50.0, with_irs()), 1.0, 1e-6);
}

TEST(GammaSpec, MatchesMomentsOnRandomDraws) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const SystemParams p = SystemParams().modified([&](NetworkConfig& c) {
      c.N = 1 + static_cast<int>(u(rng) * 8000);
      c.lambda_I = std::pow(10.0, -7.0 + 4.0 * u(rng));
      c.alpha = 2.2 + 1.8 * u(rng);
      c.H_B = 5.0 + 40.0 * u(rng);
    });
    const double l0 = 1.0 + 400.0 * u(rng), d0 = 60.0 * u(rng);
    const auto m = conditional_signal_moments(l0, d0, p);
    const auto s = gamma_from_moments(m, classify_regime(d0, p));
    EXPECT_LT(rel(s.mean(), m.mean), 1e-12);
    if (s.regime != Regime::NoIrs) {
      EXPECT_LT(rel(s.variance(), m.variance()), 1e-12);
    }
  }
}

TEST(GammaSpec, InvalidMomentsAreAnError) {
  EXPECT_THROW(gamma_from_moments({1.0, 0.5}, Regime::Beamformed), NumericalError);
  EXPECT_THROW(gamma_from_moments({0.0, 1.0}, Regime::Beamformed), NumericalError);
}

TEST(GammaSpec, RegimeBoundariesHalfOpen) {
  const SystemParams p = with_irs();
  EXPECT_EQ(signal_gamma_spec(50.0, 25.0, p).regime, Regime::Beamformed);
  EXPECT_EQ(signal_gamma_spec(50.0, 25.0 + 1e-9, p).regime, Regime::ScatteredOnly);
  EXPECT_EQ(signal_gamma_spec(50.0, 50.0, p).regime, Regime::ScatteredOnly);
}

TEST(GammaSpec, BeamformedCdfAgainstSimulation) {
  // Signal only: the interfering BS field is irrelevant, so a small disk suffices.
  const SystemParams p = with_irs();
  const auto draws = sample_conditioned_powers(p, 50.0, 5.0, 10000, 31, 200.0, SimOptions{false, true});
  std::vector<double> S;
  for (const auto& d : draws) S.push_back(d.S);
  const auto spec = signal_gamma_spec(50.0, 5.0, p);
  EXPECT_LT(testutil::ks_distance(S, [&](double x) { return spec.cdf(x); }), 0.03);
}

TEST(Scaling, MeanGrowsQuadraticallyInN) {
  const SystemParams p = with_irs(4000);
  const double r = signal_gamma_spec(50.0, 1.0, p.with_N(8000)).mean() / signal_gamma_spec(50.0, 1.0, p).mean();
  EXPECT_NEAR(r, 4.0, 0.4);
}

TEST(Scaling, ShapeGrowsLinearlyForLargeN) {
  // The shape ratio k(2N)/k(N) only settles towards 2 once the N^3 variance
  // term dominates (a few times 10^4 elements at l0 = 50, d0 = 1). Across the
  // practical range it stays well above 1 and below 4.
  for (int N : {500, 1000, 2000, 4000, 8000}) {
    const SystemParams p = with_irs(N);
    const double r = signal_gamma_spec(50.0, 1.0, p.with_N(2 * N)).k / signal_gamma_spec(50.0, 1.0, p).k;
    EXPECT_GT(r, 2.0);
    EXPECT_LT(r, 4.0);
  }
  const SystemParams big = with_irs(64000);
  const double r = signal_gamma_spec(50.0, 1.0, big.with_N(128000)).k / signal_gamma_spec(50.0, 1.0, big).k;
  EXPECT_NEAR(r, 2.0, 0.4);
}

TEST(Scaling, ScatteredShapeDoesNotHarden) {
  const SystemParams p = with_irs(500);
  const double k1 = signal_gamma_spec(50.0, 30.0, p).k, k4 = signal_gamma_spec(50.0, 30.0, p.with_N(2000)).k;
  EXPECT_LT(rel(k4, k1), 0.1);
}

// --- mean signal power -----------------------------------------------------------

TEST(MeanSignal, DirectClosedFormMatchesQuadrature) {
  for (double lB : {2.0 * kLambda0, 10.0 * kLambda0, 40.0 * kLambda0}) {
    const SystemParams p = SystemParams().with_lambda_B(lB);
    const double q = integrate_adaptive([&](double l) { return path_loss_direct(l, p) * pdf_l0(l, p); }, 0.0,
                                        std::numeric_limits<double>::infinity(), {0.0, 1e-12});
    EXPECT_LT(rel(mean_direct_power(p), q), 1e-8);
  }
}

TEST(MeanSignal, NoIrsCollapse) {
  const SystemParams p;
  EXPECT_DOUBLE_EQ(mean_signal_power(p), mean_direct_power(p));
}

TEST(MeanSignal, DensityDoublingGain) {
  const SystemParams a = SystemParams().with_lambda_B(20.0 * kLambda0);
  const SystemParams b = SystemParams().with_lambda_B(40.0 * kLambda0);
  EXPECT_NEAR(linear_to_db(mean_signal_power(b) / mean_signal_power(a)), 2.1, 0.2);
}

TEST(MeanSignal, MatchesBruteForceRegimeAverage) {
  // Average the conditional means over (l0, d0) directly.
  const SystemParams p = with_irs(2000, 20.0 * kLambda0);
  const double inf = std::numeric_limits<double>::infinity();
  const QuadratureOptions o{0.0, 1e-11};
  const std::vector<double> br{p.D1(), p.D2()};
  const double brute = integrate_adaptive_result(
                           [&](double d0) {
                             const double inner = integrate_adaptive(
                                 [&](double l0) {
                                   return conditional_signal_moments(l0, d0, p).mean * pdf_l0(l0, p);
                                 },
                                 0.0, inf, o);
                             return inner * pdf_d0(d0, p);
                           },
                           0.0, inf, o, br)
                           .value;
  EXPECT_LT(rel(mean_signal_power(p), brute), 1e-7);
}

TEST(MeanSignal, NondecreasingInIrsDensity) {
  double prev = 0.0;
  for (double m : {0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0}) {
    const double v = mean_signal_power(with_irs(2000, m * kLambda0));
    EXPECT_GE(v, prev);
    prev = v;
  }
}
