#pragma once

// Monte Carlo oracle for the downlink model: PPP topologies, per-element
// fading, co-phased beamforming by the associated IRS, random scattering by
// every other IRS within D2, and the exact SINR.
//
// Shortcut used for speed, exact in distribution: given the IRS-UE channels
// h_r of IRS j, a randomly phased cascade from BS m is CN(0, g_i,mj rho_j)
// with rho_j = sum_n |h_r,n|^2 ~ g_r(d_j) Gamma(N, 1). rho_j is shared by all
// BSs within one fading draw, so each interferer contributes
//   (g_d(l_m) + sum_j g_i,mj rho_j) Exp(1).
// Only the beamformed IRS needs element-level samples.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "hybridnet/channel.hpp"
#include "hybridnet/error.hpp"
#include "hybridnet/model.hpp"
#include "hybridnet/parallel.hpp"

namespace hybridnet {

struct Point {
  double x = 0.0;
  double y = 0.0;
  double norm() const { return std::hypot(x, y); }
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// One network realization around a UE at the origin. IRSs farther than D2
/// never touch the UE and are not stored.
struct Topology {
  std::vector<Point> bs_points;
  std::vector<Point> irs_points;  // within D2 of the origin
  std::vector<char> active_mask;
  std::size_t serving_bs = 0;
  std::optional<std::size_t> assoc_irs;  // nearest IRS, if within D1

  double l0() const { return bs_points[serving_bs].norm(); }
  /// Distance to the nearest IRS; +inf if none within D2.
  double d0() const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& w : irs_points) d = std::min(d, w.norm());
    return d;
  }
};

using Rng = std::mt19937_64;

/// Independent stream for work item `index` under `master_seed`.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x9e3779b9u};
  return Rng(seq);
}

namespace detail {

inline Point uniform_in_annulus(double r_in, double r_out, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = std::sqrt(r_in * r_in + u(rng) * (r_out * r_out - r_in * r_in));
  const double phi = 2.0 * std::numbers::pi * u(rng);
  return {r * std::cos(phi), r * std::sin(phi)};
}

inline void add_ppp_annulus(std::vector<Point>& out, double lambda, double r_in, double r_out, Rng& rng) {
  if (lambda <= 0.0 || r_out <= r_in) return;
  const double mean = lambda * std::numbers::pi * (r_out * r_out - r_in * r_in);
  const auto n = std::poisson_distribution<long long>(mean)(rng);
  for (long long i = 0; i < n; ++i) out.push_back(uniform_in_annulus(r_in, r_out, rng));
}

inline void finish_topology(Topology& t, const SystemParams& params, Rng& rng) {
  std::bernoulli_distribution active(params.p());
  t.active_mask.assign(t.bs_points.size(), 0);
  for (std::size_t m = 0; m < t.bs_points.size(); ++m) t.active_mask[m] = active(rng) ? 1 : 0;
  t.active_mask[t.serving_bs] = 1;
  t.assoc_irs.reset();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < t.irs_points.size(); ++j) {
    const double d = t.irs_points[j].norm();
    if (d < best) {
      best = d;
      t.assoc_irs = j;
    }
  }
  if (best > params.D1()) t.assoc_irs.reset();
}

}  // namespace detail

inline void validate_disk_radius(double disk_radius, const SystemParams& params) {
  const double min_r = 20.0 / std::sqrt(params.lambda_B() * std::numbers::pi);
  if (!(disk_radius >= min_r)) throw ConfigError("disk radius must be at least 20 mean cell radii");
}

/// Unconditioned topology in a disk of the given radius.
inline Topology sample_topology(const SystemParams& params, double disk_radius, Rng& rng) {
  validate_disk_radius(disk_radius, params);
  Topology t;
  // Resample the (vanishingly rare) empty disk rather than return no server.
  while (t.bs_points.empty()) detail::add_ppp_annulus(t.bs_points, params.lambda_B(), 0.0, disk_radius, rng);
  detail::add_ppp_annulus(t.irs_points, params.lambda_I(), 0.0, params.D2(), rng);
  std::size_t best = 0;
  for (std::size_t m = 1; m < t.bs_points.size(); ++m)
    if (t.bs_points[m].norm() < t.bs_points[best].norm()) best = m;
  t.serving_bs = best;
  detail::finish_topology(t, params, rng);
  return t;
}

/// Topology conditioned on the serving distance l0 and, optionally, on the
/// nearest-IRS distance d0. The remaining points form PPPs outside those radii,
/// which is the exact conditional law of a PPP given its nearest point. With
/// lambda_I = 0 no IRS is placed.
inline Topology sample_conditioned_topology(const SystemParams& params, double disk_radius, double l0,
                                            std::optional<double> d0, Rng& rng) {
  if (!(l0 >= 0.0 && l0 < disk_radius)) throw DomainError("sample_conditioned_topology: l0 outside the disk");
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  Topology t;
  const double phi = u(rng);
  t.bs_points.push_back({l0 * std::cos(phi), l0 * std::sin(phi)});
  detail::add_ppp_annulus(t.bs_points, params.lambda_B(), l0, disk_radius, rng);
  t.serving_bs = 0;
  if (d0) {
    if (!(*d0 >= 0.0)) throw DomainError("sample_conditioned_topology: d0 must be >= 0");
    if (*d0 <= params.D2() && params.lambda_I() > 0.0) {
      const double psi = u(rng);
      t.irs_points.push_back({*d0 * std::cos(psi), *d0 * std::sin(psi)});
    }
    detail::add_ppp_annulus(t.irs_points, params.lambda_I(), std::min(*d0, params.D2()), params.D2(), rng);
  } else {
    detail::add_ppp_annulus(t.irs_points, params.lambda_I(), 0.0, params.D2(), rng);
  }
  detail::finish_topology(t, params, rng);
  return t;
}

struct SimOptions {
  /// Replace every BS-IRS gain g_i,mj by g_d(l_m), as the analysis does.
  bool approx_geometry = false;
  /// Skip the interference field (signal-only studies).
  bool signal_only = false;
};

struct FadingDraw {
  double S = 0.0;
  double I = 0.0;
  double sinr = 0.0;
};

/// Precomputed large-scale gains of one topology; draws fading on demand.
class ChannelSynthesizer {
 public:
  ChannelSynthesizer(const Topology& topo, const SystemParams& params, const SimOptions& opt = {})
      : params_(params), opt_(opt) {
    const auto& bs = topo.bs_points;
    const Point& b0 = bs[topo.serving_bs];
    const double l0 = b0.norm();
    g_d0_ = path_loss_direct(l0, params);
    const std::size_t J = topo.irs_points.size();
    for (std::size_t j = 0; j < J; ++j) {
      const Point& w = topo.irs_points[j];
      const double gr = path_loss_irs_ue(w.norm(), params);
      const double gi = opt.approx_geometry ? g_d0_ : path_loss_bs_irs(distance(b0, w), params);
      if (topo.assoc_irs && *topo.assoc_irs == j) {
        bf_ = true;
        g_i00_ = gi;
        g_r0_ = gr;
      } else {
        scat_g_r_.push_back(gr);
        scat_g_i0_.push_back(gi);
      }
    }
    // IRS order in the interference weights: beamforming IRS (if any) first.
    if (!opt.signal_only) {
      for (std::size_t m = 0; m < bs.size(); ++m) {
        if (m == topo.serving_bs || !topo.active_mask[m]) continue;
        const double lm = bs[m].norm();
        const double gd = path_loss_direct(lm, params);
        g_dm_.push_back(gd);
        auto gi_of = [&](const Point& w) {
          return opt.approx_geometry ? gd : path_loss_bs_irs(distance(bs[m], w), params);
        };
        if (bf_) g_im_.push_back(gi_of(topo.irs_points[*topo.assoc_irs]));
        for (std::size_t j = 0; j < J; ++j)
          if (!(topo.assoc_irs && *topo.assoc_irs == j)) g_im_.push_back(gi_of(topo.irs_points[j]));
      }
    }
  }

  FadingDraw draw(Rng& rng) {
    const int N = params_.N();
    std::gamma_distribution<double> gamma_n(static_cast<double>(N), 1.0);
    std::exponential_distribution<double> expo(1.0);

    // rho_j = sum_n |h_r,n|^2 for each IRS in the order used by g_im_.
    rho_.clear();
    const std::complex<double> hd = std::sqrt(g_d0_) * sample_cscg(rng);
    std::complex<double> h1 = hd;
    if (bf_) {
      const double si = std::sqrt(g_i00_), sr = std::sqrt(g_r0_);
      double A = 0.0, rho0 = 0.0;
      for (int n = 0; n < N; ++n) {
        const double a = sample_fading_rayleigh(rng);
        const double c = sample_fading_rayleigh(rng);
        A += a * c;
        rho0 += c * c;
      }
      A *= si * sr;
      rho_.push_back(g_r0_ * rho0);
      const double mag = std::abs(hd);
      h1 = mag > 0.0 ? hd * ((mag + A) / mag) : std::complex<double>(A, 0.0);
    }
    std::complex<double> h2 = 0.0;
    for (std::size_t j = 0; j < scat_g_r_.size(); ++j) {
      const double rho = scat_g_r_[j] * gamma_n(rng);
      rho_.push_back(rho);
      h2 += std::sqrt(scat_g_i0_[j] * rho) * sample_cscg(rng);
    }
    FadingDraw out;
    out.S = std::norm(h1 + h2);
    if (!opt_.signal_only) {
      const std::size_t J = rho_.size();
      double I = 0.0;
      for (std::size_t m = 0; m < g_dm_.size(); ++m) {
        double w = g_dm_[m];
        for (std::size_t j = 0; j < J; ++j) w += g_im_[m * J + j] * rho_[j];
        I += w * expo(rng);
      }
      out.I = I;
    }
    out.sinr = out.S / (out.I + params_.W());
    return out;
  }

  bool beamformed() const { return bf_; }

 private:
  SystemParams params_;
  SimOptions opt_;
  double g_d0_ = 0.0;
  bool bf_ = false;
  double g_i00_ = 0.0, g_r0_ = 0.0;
  std::vector<double> scat_g_r_, scat_g_i0_;
  std::vector<double> g_dm_;
  std::vector<double> g_im_;  // row-major [interferer][irs]
  std::vector<double> rho_;  // scratch
};

/// S/(I+W) for one fading draw.
inline double simulate_sinr(const Topology& topo, const SystemParams& params, Rng& rng, const SimOptions& opt = {}) {
  return ChannelSynthesizer(topo, params, opt).draw(rng).sinr;
}

struct SimEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::size_t n = 0;
};

/// Estimate from per-unit values: std_err = sample sd / sqrt(n).
inline SimEstimate make_estimate(const std::vector<double>& xs) {
  SimEstimate e;
  e.n = xs.size();
  if (xs.empty()) return e;
  double s = 0.0;
  for (double x : xs) s += x;
  e.value = s / xs.size();
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - e.value) * (x - e.value);
    e.std_err = std::sqrt(ss / (xs.size() - 1) / xs.size());
  }
  return e;
}

struct McConfig {
  double disk_radius = 5000.0;
  int n_topologies = 500;
  int n_fading = 200;
  std::uint64_t seed = 1;
  int threads = 1;
  /// Place the serving BS at stratified quantiles of the l0 law (exact
  /// conditional sampling, lower variance); off = plain PPP draws.
  bool stratify_l0 = true;
  SimOptions sim{};
  bool collect_samples = false;
};

struct McSample {
  std::size_t topology_id = 0;
  double l0 = 0.0;
  double d0 = 0.0;
  Regime regime = Regime::NoIrs;
  double S = 0.0;
  double I = 0.0;
  double sinr = 0.0;
};

struct CoverageEstimate {
  std::vector<double> thresholds;  // linear SINR thresholds
  std::vector<SimEstimate> p_cov;  // one per threshold
  SimEstimate mean_S;
  SimEstimate mean_I;
  std::size_t regime_counts[3] = {0, 0, 0};  // beamformed, scattered, no-IRS
  std::vector<McSample> samples;             // filled if collect_samples
};

/// P{SINR >= threshold} for each threshold, averaged over topologies x fading.
/// Deterministic in (seed, config) regardless of the thread count.
inline CoverageEstimate estimate_coverage(const SystemParams& params, const McConfig& cfg,
                                          const std::vector<double>& thresholds) {
  if (cfg.n_topologies < 100) throw ConfigError("Monte Carlo needs at least 100 topologies");
  if (cfg.n_fading < 1) throw ConfigError("Monte Carlo needs at least one fading draw");
  validate_disk_radius(cfg.disk_radius, params);
  const std::size_t T = cfg.n_topologies, K = thresholds.size();

  struct PerTopology {
    std::vector<double> cover;
    double S = 0.0, I = 0.0;
    Regime regime = Regime::NoIrs;
    std::vector<McSample> samples;
  };
  std::vector<PerTopology> per(T);

  parallel_for(T, cfg.threads, [&](std::size_t i) {
    Rng rng = make_stream(cfg.seed, i);
    Topology topo;
    if (cfg.stratify_l0) {
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      const double q = (static_cast<double>(i) + u) / static_cast<double>(T);
      double l0 = nearest_distance_quantile(q, params.lambda_B());
      l0 = std::min(l0, 0.999 * cfg.disk_radius);
      topo = sample_conditioned_topology(params, cfg.disk_radius, l0, std::nullopt, rng);
    } else {
      topo = sample_topology(params, cfg.disk_radius, rng);
    }
    ChannelSynthesizer synth(topo, params, cfg.sim);
    PerTopology r;
    r.cover.assign(K, 0.0);
    const double d0 = topo.d0();
    r.regime = classify_regime(d0, params);
    for (int f = 0; f < cfg.n_fading; ++f) {
      const FadingDraw d = synth.draw(rng);
      r.S += d.S;
      r.I += d.I;
      for (std::size_t k = 0; k < K; ++k)
        if (d.sinr >= thresholds[k]) r.cover[k] += 1.0;
      if (cfg.collect_samples) r.samples.push_back({i, topo.l0(), d0, r.regime, d.S, d.I, d.sinr});
    }
    for (auto& c : r.cover) c /= cfg.n_fading;
    r.S /= cfg.n_fading;
    r.I /= cfg.n_fading;
    per[i] = std::move(r);
  });

  CoverageEstimate out;
  out.thresholds = thresholds;
  std::vector<double> xs(T);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < T; ++i) xs[i] = per[i].cover[k];
    out.p_cov.push_back(make_estimate(xs));
  }
  for (std::size_t i = 0; i < T; ++i) xs[i] = per[i].S;
  out.mean_S = make_estimate(xs);
  for (std::size_t i = 0; i < T; ++i) xs[i] = per[i].I;
  out.mean_I = make_estimate(xs);
  for (auto& r : per) {
    out.regime_counts[static_cast<int>(r.regime)]++;
    out.samples.insert(out.samples.end(), r.samples.begin(), r.samples.end());
  }
  return out;
}

/// Draws of (S, I) conditioned on (l0, d0): a fresh conditioned topology for
/// every draw, so both the IRS/BS layout and the fading are averaged.
inline std::vector<FadingDraw> sample_conditioned_powers(const SystemParams& params, double l0, double d0,
                                                         std::size_t n, std::uint64_t seed, double disk_radius,
                                                         const SimOptions& opt = {}, int threads = 1) {
  std::vector<FadingDraw> out(n);
  constexpr std::size_t kChunk = 256;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    Rng rng = make_stream(seed, c);
    for (std::size_t i = c * kChunk; i < std::min(n, (c + 1) * kChunk); ++i) {
      const Topology t = sample_conditioned_topology(params, disk_radius, l0, d0, rng);
      out[i] = ChannelSynthesizer(t, params, opt).draw(rng);
    }
  });
  return out;
}

}  // namespace hybridnet
