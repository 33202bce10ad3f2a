/*
 * Copyright (C) 2026 The csense Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

// Snapshot Monte Carlo of a Poisson bipolar network: PPP transmitters, Matern
// type-II carrier-sensing thinning, Rayleigh-faded SIR at paired receivers.
// Every replication draws from its own substream of the master seed and
// results are reduced in replication order, so estimates are identical for
// any number of worker threads.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "csense/analytic_model.hpp"
#include "csense/error.hpp"
#include "csense/parallel.hpp"
#include "csense/rng.hpp"
#include "csense/spatial.hpp"

namespace csense {

struct Snapshot {
  SimRegion region;
  std::vector<Point> transmitters;
  std::vector<Point> receivers;
  std::vector<double> marks;  // i.i.d. uniform [0, 1) contention marks
};

struct SimOutcome {
  double estimate = 0.0;
  double half_width_95 = 0.0;
  std::uint64_t replications = 0;
  std::uint64_t seed = 0;
};

struct GeoSimSettings {
  SimRegion region;
  std::uint64_t replications = 200;
  std::uint64_t seed = 1;
  unsigned jobs = 1;
};

struct GeoEstimate {
  SimOutcome success_prob;
  SimOutcome active_density;
  SimOutcome ase;
  double tau = 0.0;
  double sense_range_m = 0.0;
  std::uint64_t retained_total = 0;
};

namespace detail {

inline constexpr double kZ95 = 1.959963984540054;

inline Point receiver_for(const SimRegion& region, const Point& tx, double link_distance_m, Rng& rng) {
  const double angle = 2.0 * std::numbers::pi * rng.uniform();
  return region.wrap({tx.x + link_distance_m * std::cos(angle), tx.y + link_distance_m * std::sin(angle)});
}

inline double path_gain(double d2, double alpha) {
  if (alpha == 4.0) return 1.0 / (d2 * d2);
  return std::pow(d2, -0.5 * alpha);
}

// Type-II hard core: keep a point iff no other point with a smaller mark lies
// within `radius`.
inline std::vector<std::size_t> matern_type2(const SimRegion& region, const std::vector<Point>& pts,
                                             const std::vector<double>& marks, double radius) {
  std::vector<std::size_t> kept;
  if (pts.empty()) return kept;
  const SpatialGrid grid(region, pts, radius);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    grid.for_each_within(pts[i], radius, [&](std::uint32_t j, double) {
      if (j != i && (marks[j] < marks[i] || (marks[j] == marks[i] && j < i))) dominated = true;
    });
    if (!dominated) kept.push_back(i);
  }
  return kept;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// 95% half-width of the mean of i.i.d. samples.
inline double mean_half_width(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return kZ95 * std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace detail

/// Homogeneous PPP on the region: N ~ Poisson(density * L^2), positions i.i.d.
/// uniform. Each transmitter gets a receiver at `link_distance_m` in a uniform
/// random direction and a uniform contention mark.
inline Snapshot sample_ppp(double density, const SimRegion& region, double link_distance_m, Rng& rng) {
  if (!(density >= 0.0)) throw ConfigError("sample_ppp: density must be >= 0");
  region.validate();
  Snapshot s;
  s.region = region;
  const std::uint64_t n = rng.poisson(density * region.area());
  s.transmitters.reserve(n);
  s.receivers.reserve(n);
  s.marks.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const Point tx = region.uniform_point(rng);
    s.transmitters.push_back(tx);
    s.receivers.push_back(detail::receiver_for(region, tx, link_distance_m, rng));
    s.marks.push_back(rng.uniform());
  }
  return s;
}

inline Snapshot sample_ppp(double density, const SimRegion& region, double link_distance_m, std::uint64_t seed) {
  Rng rng(seed);
  return sample_ppp(density, region, link_distance_m, rng);
}

/// Carrier-sensing thinning: Bernoulli(contend_prob) selects the contenders,
/// then a contender survives iff no other contender with a smaller mark lies
/// within sense_range_m. Returns indices into the snapshot.
inline std::vector<std::size_t> matern_thin(const Snapshot& snap, double contend_prob, double sense_range_m,
                                            Rng& rng) {
  if (!(contend_prob >= 0.0 && contend_prob <= 1.0)) throw ConfigError("matern_thin: tau must be in [0, 1]");
  if (!(sense_range_m > 0.0)) throw ConfigError("matern_thin: sensing range must be > 0");
  std::vector<std::size_t> contenders;
  for (std::size_t i = 0; i < snap.transmitters.size(); ++i)
    if (rng.uniform() < contend_prob) contenders.push_back(i);
  std::vector<Point> pts;
  std::vector<double> marks;
  pts.reserve(contenders.size());
  marks.reserve(contenders.size());
  for (std::size_t i : contenders) {
    pts.push_back(snap.transmitters[i]);
    marks.push_back(snap.marks[i]);
  }
  std::vector<std::size_t> kept = detail::matern_type2(snap.region, pts, marks, sense_range_m);
  for (auto& k : kept) k = contenders[k];
  return kept;
}

/// Fraction of replications in which the Rayleigh-faded interference at the
/// region center, from a Bernoulli(tau)-thinned PPP(density), reaches the
/// threshold. The thinned count is drawn as Binomial(Poisson(density L^2), tau).
inline SimOutcome estimate_busy_prob(double density, double tau, const LinkBudget& link, double threshold_watts,
                                     const GeoSimSettings& settings) {
  link.validate();
  settings.region.validate();
  if (!(threshold_watts > 0.0)) throw ConfigError("estimate_busy_prob: threshold must be > 0");
  const SimRegion& region = settings.region;
  const Point probe = region.center();
  std::vector<char> busy(settings.replications, 0);
  parallel_for(settings.replications, settings.jobs, [&](std::size_t r) {
    Rng rng(settings.seed, r);
    const std::uint64_t n = rng.binomial(rng.poisson(density * region.area()), tau);
    double interference = 0.0;
    for (std::uint64_t k = 0; k < n; ++k) {
      const Point p = region.uniform_point(rng);
      interference += rng.exponential() * link.tx_power_watts *
                      detail::path_gain(region.dist2(probe, p), link.path_loss_exp);
      if (interference >= threshold_watts) {
        busy[r] = 1;
        break;
      }
    }
  });
  std::uint64_t hits = 0;
  for (char b : busy) hits += static_cast<std::uint64_t>(b);
  SimOutcome out;
  out.replications = settings.replications;
  out.seed = settings.seed;
  const double n = static_cast<double>(settings.replications);
  out.estimate = n > 0 ? static_cast<double>(hits) / n : 0.0;
  out.half_width_95 = n > 0 ? detail::kZ95 * std::sqrt(out.estimate * (1.0 - out.estimate) / n) : 0.0;
  return out;
}

/// End-to-end snapshot estimate of success probability, active density and
/// ASE at one sensing threshold. tau comes from the analytic fixed point and
/// the exclusion radius from the mean sensing range; carrier sensing is purely
/// geometric here.
inline GeoEstimate estimate_success_and_ase(double density, const LinkBudget& link, const BackoffParams& backoff,
                                            double threshold_watts, const GeoSimSettings& settings) {
  link.validate();
  settings.region.validate();
  const SimRegion& region = settings.region;
  GeoEstimate est;
  est.tau = solve_tau(density, link, backoff, threshold_watts).tau;
  est.sense_range_m = sensing_range(density, est.tau, link.tx_power_watts, threshold_watts, link.path_loss_exp);
  if (!region.wraparound && region.side_m < 20.0 * std::max(est.sense_range_m, link.link_distance_m))
    throw ConfigError("estimate_success_and_ase: bounded region must be at least 20 x max(R_s, r_t) wide");

  const double rate = std::log2(1.0 + link.target_sir);
  const double signal_gain = link.tx_power_watts * std::pow(link.link_distance_m, -link.path_loss_exp);
  struct Rep {
    std::uint64_t retained = 0;
    std::uint64_t successes = 0;
  };
  std::vector<Rep> reps(settings.replications);
  parallel_for(settings.replications, settings.jobs, [&](std::size_t r) {
    Rng rng(settings.seed, r);
    const std::uint64_t n = rng.binomial(rng.poisson(density * region.area()), est.tau);
    std::vector<Point> contenders(n);
    std::vector<double> marks(n);
    for (std::uint64_t k = 0; k < n; ++k) {
      contenders[k] = region.uniform_point(rng);
      marks[k] = rng.uniform();
    }
    const auto kept = detail::matern_type2(region, contenders, marks, est.sense_range_m);
    std::vector<Point> tx, rx;
    tx.reserve(kept.size());
    rx.reserve(kept.size());
    for (std::size_t k : kept) {
      tx.push_back(contenders[k]);
      rx.push_back(detail::receiver_for(region, contenders[k], link.link_distance_m, rng));
    }
    Rep rep;
    rep.retained = kept.size();
    for (std::size_t i = 0; i < tx.size(); ++i) {
      const double signal = rng.exponential() * signal_gain;
      double interference = 0.0;
      for (std::size_t j = 0; j < tx.size(); ++j) {
        if (j == i) continue;
        interference += rng.exponential() * link.tx_power_watts *
                        detail::path_gain(region.dist2(tx[j], rx[i]), link.path_loss_exp);
      }
      if (signal >= link.target_sir * interference) ++rep.successes;
    }
    reps[r] = rep;
  });

  std::uint64_t retained = 0, successes = 0;
  std::vector<double> density_samples, ase_samples;
  density_samples.reserve(reps.size());
  ase_samples.reserve(reps.size());
  for (const Rep& rep : reps) {
    retained += rep.retained;
    successes += rep.successes;
    density_samples.push_back(static_cast<double>(rep.retained) / region.area());
    ase_samples.push_back(static_cast<double>(rep.successes) / region.area() * rate);
  }
  est.retained_total = retained;
  if (retained < 100)
    throw InsufficientRetained("estimate_success_and_ase: only " + std::to_string(retained) +
                               " retained transmitters in total; widen the region or add replications");

  const auto fill = [&](SimOutcome& o) {
    o.replications = settings.replications;
    o.seed = settings.seed;
  };
  fill(est.success_prob);
  fill(est.active_density);
  fill(est.ase);
  const double ps = static_cast<double>(successes) / static_cast<double>(retained);
  est.success_prob.estimate = ps;
  est.success_prob.half_width_95 = detail::kZ95 * std::sqrt(ps * (1.0 - ps) / static_cast<double>(retained));
  est.active_density.estimate = detail::mean(density_samples);
  est.active_density.half_width_95 = detail::mean_half_width(density_samples);
  est.ase.estimate = detail::mean(ase_samples);
  est.ase.half_width_95 = detail::mean_half_width(ase_samples);
  return est;
}

}  // namespace csense
