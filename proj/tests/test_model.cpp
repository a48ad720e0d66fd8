#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hybridnet/model.hpp"
#include "hybridnet/specfun/quadrature.hpp"

using namespace hybridnet;
using big = boost::multiprecision::cpp_bin_float_50;

namespace {

big beta_hp(double f_c) {
  const big pi = boost::math::constants::pi<big>();
  const big x = 4 * pi * big(f_c) / big(kSpeedOfLight);
  return 1 / (x * x);
}

}  // namespace

TEST(Params, DefaultsAndDerivedConstants) {
  const SystemParams p;
  EXPECT_NEAR(p.beta(), static_cast<double>(beta_hp(2e9)), 1e-18);
  EXPECT_NEAR(linear_to_db(p.beta()), -38.47, 0.01);
  EXPECT_DOUBLE_EQ(p.gamma_bar(), 1.0);
  EXPECT_NEAR(p.W() / std::pow(10.0, -14.7), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(p.lambda_B_active(), 0.5 * 10.0 * kLambda0);
  EXPECT_DOUBLE_EQ(p.delta(), 2.0 / 3.0);
}

TEST(Params, BetaFollowsCarrier) {
  const SystemParams p = SystemParams().modified([](NetworkConfig& c) { c.f_c = 28e9; });
  EXPECT_NEAR(p.beta() / static_cast<double>(beta_hp(28e9)), 1.0, 1e-14);
}

TEST(Params, GammaBarAndRateStayConsistent) {
  const SystemParams p = SystemParams().with_gamma_bar(3.0);
  EXPECT_NEAR(p.R_bar(), 2.0, 1e-15);
  EXPECT_NEAR(p.gamma_bar(), 3.0, 1e-15);
}

TEST(Params, RejectsInvalid) {
  auto bad = [](auto mutate) {
    NetworkConfig c;
    mutate(c);
    EXPECT_THROW(SystemParams{c}, ConfigError);
  };
  bad([](NetworkConfig& c) { c.alpha = 2.0; });
  bad([](NetworkConfig& c) { c.alpha = 1.5; });
  bad([](NetworkConfig& c) { c.H_B = 0.5; });
  bad([](NetworkConfig& c) { c.H_I = 0.0; });
  bad([](NetworkConfig& c) { c.D1 = 50.0; });
  bad([](NetworkConfig& c) { c.D1 = 0.0; });
  bad([](NetworkConfig& c) { c.p = 0.0; });
  bad([](NetworkConfig& c) { c.p = 1.2; });
  bad([](NetworkConfig& c) { c.N = 0; });
  bad([](NetworkConfig& c) { c.lambda_B = 0.0; });
  bad([](NetworkConfig& c) { c.lambda_I = -1.0; });
  bad([](NetworkConfig& c) { c.R_bar = 0.0; });
  EXPECT_THROW(SystemParams().with_gamma_bar(0.0), ConfigError);
}

TEST(PathLoss, UnitDistanceNormalization) {
  const SystemParams p = SystemParams().modified([](NetworkConfig& c) {
    c.alpha = 2.0 + 1e-12;
    c.H_B = 1.0;
  });
  EXPECT_NEAR(path_loss_direct(0.0, p) / p.beta(), 1.0, 1e-12);
  EXPECT_NEAR(path_loss_irs_ue(0.0, p) / p.beta(), 1.0, 1e-12);
}

TEST(PathLoss, DirectAtFiftyMetres) {
  const SystemParams p;
  const big ref = beta_hp(2e9) * boost::multiprecision::pow(big(2900), big(-1.5));
  EXPECT_NEAR(path_loss_direct(50.0, p) / static_cast<double>(ref), 1.0, 1e-14);
}

TEST(PathLoss, IrsUeAtTwentyFiveMetres) {
  const SystemParams p;
  const big ref = beta_hp(2e9) * boost::multiprecision::pow(big(626), big(-1.5));
  EXPECT_NEAR(path_loss_irs_ue(25.0, p) / static_cast<double>(ref), 1.0, 1e-14);
}

TEST(PathLoss, LowerMountLosesLessAtSameDistance) {
  // g_r uses H_I = 1 < H_B = 20, so at equal horizontal distance it is the larger gain.
  const SystemParams p;
  for (double d : {0.0, 5.0, 30.0, 300.0}) EXPECT_GT(path_loss_irs_ue(d, p), path_loss_direct(d, p));
}

TEST(PathLoss, BsIrsUsesHeightGap) {
  const SystemParams p;
  EXPECT_NEAR(path_loss_bs_irs(0.0, p), p.beta() * std::pow(19.0, -3.0), 1e-22);
}

TEST(PathLoss, DecreasingWithAsymptoticSlope) {
  const SystemParams p;
  double prev = path_loss_direct(0.0, p);
  for (double l = 0.5; l < 1e5; l *= 1.5) {
    const double v = path_loss_direct(l, p);
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
  const double slope = (std::log(path_loss_direct(1e5, p)) - std::log(path_loss_direct(1e4, p))) / std::log(10.0);
  EXPECT_NEAR(slope / -p.alpha(), 1.0, 0.01);
}

TEST(Distances, PdfNormalizationAndMode) {
  const SystemParams p = SystemParams().with_lambda_I(5e-6);
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_NEAR(integrate_adaptive([&](double x) { return pdf_l0(x, p); }, 0.0, inf, {1e-12, 1e-12}), 1.0, 1e-9);
  EXPECT_NEAR(integrate_adaptive([&](double x) { return pdf_d0(x, p); }, 0.0, inf, {1e-12, 1e-12}), 1.0, 1e-9);
  const double mode = 1.0 / std::sqrt(2.0 * std::numbers::pi * p.lambda_B());
  const double h = 1e-3 * mode;
  EXPECT_GT(pdf_l0(mode, p), pdf_l0(mode - h, p));
  EXPECT_GT(pdf_l0(mode, p), pdf_l0(mode + h, p));
}

TEST(Distances, TailAndQuantile) {
  EXPECT_NEAR(nearest_distance_ccdf(50.0, 5e-6), std::exp(-5e-6 * std::numbers::pi * 2500.0), 1e-15);
  EXPECT_NEAR(nearest_distance_ccdf(50.0, 5e-6), 0.9615, 1e-4);
  for (double q : {0.0, 0.1, 0.5, 0.999999})
    EXPECT_NEAR(1.0 - nearest_distance_ccdf(nearest_distance_quantile(q, 3e-5), 3e-5), q, 1e-12);
}

TEST(Regimes, Classification) {
  const SystemParams p = SystemParams().with_lambda_I(kLambda0);
  EXPECT_EQ(classify_regime(0.0, p), Regime::Beamformed);
  EXPECT_EQ(classify_regime(25.0, p), Regime::Beamformed);
  EXPECT_EQ(classify_regime(std::nextafter(25.0, 30.0), p), Regime::ScatteredOnly);
  EXPECT_EQ(classify_regime(50.0, p), Regime::ScatteredOnly);
  EXPECT_EQ(classify_regime(50.1, p), Regime::NoIrs);
  EXPECT_EQ(classify_regime(1.0, SystemParams()), Regime::NoIrs);
}

TEST(Regimes, Probabilities) {
  const auto none = regime_probabilities(SystemParams());
  EXPECT_EQ(none.P_bf, 0.0);
  EXPECT_EQ(none.P_sc, 0.0);
  EXPECT_EQ(none.P_wo, 1.0);

  const auto dense = regime_probabilities(SystemParams().with_lambda_I(10.0));
  EXPECT_NEAR(dense.P_bf, 1.0, 1e-15);
  EXPECT_NEAR(dense.P_sc, 0.0, 1e-15);
  EXPECT_NEAR(dense.P_wo, 0.0, 1e-15);

  const auto r = regime_probabilities(SystemParams().with_lambda_I(5e-6));
  const double a1 = 5e-6 * std::numbers::pi * 625.0;
  EXPECT_NEAR(r.P_bf, 1.0 - std::exp(-a1), 1e-15);
  EXPECT_NEAR(r.P_wo, 0.9615, 1e-4);
  EXPECT_NEAR(r.P_sc, std::exp(-a1) - std::exp(-4.0 * a1), 1e-15);
}

TEST(Regimes, SumToOneOnRandomDraws) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lg(-9.0, -1.0), u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    NetworkConfig c;
    c.lambda_I = std::pow(10.0, lg(rng));
    c.D1 = 1.0 + 100.0 * u(rng);
    c.D2 = c.D1 * (1.0 + 3.0 * u(rng)) + 1e-3;
    const auto r = regime_probabilities(SystemParams(c));
    EXPECT_NEAR(r.P_bf + r.P_sc + r.P_wo, 1.0, 1e-12);
    for (double v : {r.P_bf, r.P_sc, r.P_wo}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Cost, DensitySplit) {
  const CostModel cm;
  const double C = 80.0 * kLambda0;
  EXPECT_DOUBLE_EQ(cost_to_density(C, 0.0, cm).lambda_B, C);
  EXPECT_DOUBLE_EQ(cost_to_density(C, 0.0, cm).lambda_I, 0.0);
  EXPECT_NEAR(cost_to_density(C, 5.0, cm).lambda_B, 40.0 * kLambda0, 1e-20);
  const auto d = cost_to_density(C, 2.5, cm);
  EXPECT_NEAR(d.lambda_B, C / 1.5, 1e-20);
  EXPECT_NEAR(d.lambda_I / (2.5 * C / 1.5), 1.0, 1e-15);
}

TEST(Cost, RoundTrip) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> z(0.0, 10.0), lc(-7.0, -2.0);
  for (const CostModel cm : {CostModel{}, CostModel{2.5, 0.7}}) {
    for (int i = 0; i < 200; ++i) {
      const double C = std::pow(10.0, lc(rng)), zeta = z(rng);
      const auto d = cost_to_density(C, zeta, cm);
      EXPECT_NEAR(cm.total_cost(d.lambda_B, zeta) / C, 1.0, 1e-12);
    }
  }
}

TEST(Cost, Domain) {
  EXPECT_THROW(cost_to_density(0.0, 1.0, CostModel{}), DomainError);
  EXPECT_THROW(cost_to_density(1.0, -1.0, CostModel{}), DomainError);
  EXPECT_THROW(cost_to_density(1.0, 1.0, CostModel{1.0, 0.0}), DomainError);
}
