#pragma once

// Moments of sum_j g_r(d_j) over the IRSs in the annulus d0 < d_j <= D2
// (Campbell's theorem for a 2D HPPP of density lambda_I).

#include <cmath>
#include <numbers>

#include "hybridnet/error.hpp"
#include "hybridnet/model.hpp"

namespace hybridnet {

struct IrsAggregates {
  double E_I1 = 0.0;  // E{sum g_r}
  double E_I2 = 0.0;  // E{sum g_r^2}
  double E_I3 = 0.0;  // E{(sum g_r)^2} = E_I1^2 + E_I2
};

inline IrsAggregates irs_power_aggregates(double d0, const SystemParams& params) {
  if (!(d0 >= 0.0)) throw DomainError("irs_power_aggregates: d0 must be >= 0");
  if (d0 > params.D2()) throw DomainError("irs_power_aggregates: d0 must be <= D2");
  const double a = params.alpha();
  const double h2 = params.H_I() * params.H_I();
  const double in = d0 * d0 + h2;
  const double out = params.D2() * params.D2() + h2;
  const double beta = params.beta();
  const double pi = std::numbers::pi;
  IrsAggregates r;
  r.E_I1 = 2.0 * pi * params.lambda_I() * beta / (a - 2.0) * (std::pow(in, 1.0 - a / 2.0) - std::pow(out, 1.0 - a / 2.0));
  r.E_I2 = pi * params.lambda_I() * beta * beta / (a - 1.0) * (std::pow(in, 1.0 - a) - std::pow(out, 1.0 - a));
  r.E_I3 = r.E_I1 * r.E_I1 + r.E_I2;
  return r;
}

}  // namespace hybridnet
