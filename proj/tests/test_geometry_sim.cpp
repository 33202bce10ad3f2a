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
#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "csense/geometry_sim.hpp"
#include "csense/units.hpp"

using namespace csense;

namespace {

// Threshold at which the closed-form busy probability equals `target`.
double threshold_for_busy(double density, double tau, const LinkBudget& link, double target) {
  const auto f = [&](double x) { return busy_prob(density, tau, link, std::pow(10.0, x)) - target; };
  return std::pow(10.0, newton_safeguarded(f, {}, -6.0, Bracket{-14.0, 0.0}, SolverConfig{}).root);
}

}  // namespace

TEST(Ppp, MeanCount) {
  SimRegion region;
  region.side_m = 500.0;
  double total = 0.0;
  for (std::uint64_t s = 0; s < 200; ++s) total += static_cast<double>(sample_ppp(1e-3, region, 50.0, s).transmitters.size());
  EXPECT_NEAR(total / 200.0, 250.0, 4.0);
}

TEST(Ppp, ReceiversAtLinkDistance) {
  SimRegion region;
  region.side_m = 300.0;
  const Snapshot s = sample_ppp(1e-3, region, 50.0, std::uint64_t{3});
  ASSERT_EQ(s.transmitters.size(), s.receivers.size());
  for (std::size_t i = 0; i < s.transmitters.size(); ++i)
    EXPECT_NEAR(region.distance(s.transmitters[i], s.receivers[i]), 50.0, 1e-9);
}

TEST(Matern, RetainedPointsRespectSensingRange) {
  for (bool wrap : {true, false}) {
    SimRegion region;
    region.side_m = 1000.0;
    region.wraparound = wrap;
    Rng rng(9);
    const Snapshot s = sample_ppp(0.01, region, 50.0, rng);
    const double rs = 40.0;
    const auto kept = matern_thin(s, 0.5, rs, rng);
    ASSERT_GT(kept.size(), 50u);
    for (std::size_t a = 0; a < kept.size(); ++a)
      for (std::size_t b = a + 1; b < kept.size(); ++b)
        EXPECT_GE(region.distance(s.transmitters[kept[a]], s.transmitters[kept[b]]), rs);
  }
}

TEST(Matern, DensityMatchesTheory) {
  SimRegion region;
  region.side_m = 1000.0;
  const double density = 2e-3, tau = 0.5;
  for (double x : {0.1, 1.0, 5.0}) {
    const double rs = std::sqrt(x / (std::numbers::pi * density * tau));
    double retained = 0.0;
    for (std::uint64_t r = 0; r < 100; ++r) {
      Rng rng(21, r);
      const Snapshot s = sample_ppp(density, region, 50.0, rng);
      retained += static_cast<double>(matern_thin(s, tau, rs, rng).size());
    }
    const double empirical = retained / 100.0 / region.area();
    EXPECT_NEAR(empirical / active_density(density, tau, rs), 1.0, 0.04) << x;
  }
}

TEST(Matern, Extremes) {
  SimRegion region;
  region.side_m = 200.0;
  Rng rng(4);
  const Snapshot s = sample_ppp(1e-2, region, 10.0, rng);
  EXPECT_TRUE(matern_thin(s, 0.0, 10.0, rng).empty());
  EXPECT_EQ(matern_thin(s, 1.0, 1e-9, rng).size(), s.transmitters.size());
  EXPECT_EQ(matern_thin(s, 1.0, 1e4, rng).size(), 1u);
  EXPECT_THROW(matern_thin(s, 1.5, 10.0, rng), ConfigError);
}

TEST(BusyProb, MonteCarloMatchesClosedForm) {
  LinkBudget link;
  const double density = 1e-3, tau = 0.05;
  const double is = threshold_for_busy(density, tau, link, 0.3);
  GeoSimSettings g;
  // Truncated tail mean at most 0.1% of the threshold.
  const double r = std::sqrt(1000.0 * std::numbers::pi * density * tau * link.tx_power_watts / is);
  g.region.side_m = 2.0 * r;
  g.replications = 20000;
  g.seed = 13;
  const SimOutcome o = estimate_busy_prob(density, tau, link, is, g);
  EXPECT_NEAR(o.estimate, 0.3, 3.0 * o.half_width_95);
}

TEST(GeoSim, DeterministicAcrossJobs) {
  LinkBudget link;
  GeoSimSettings g;
  g.replications = 40;
  g.seed = 77;
  g.jobs = 1;
  const GeoEstimate a = estimate_success_and_ase(0.2, link, {16, 32}, dbm_to_watts(-50.0), g);
  g.jobs = 4;
  const GeoEstimate b = estimate_success_and_ase(0.2, link, {16, 32}, dbm_to_watts(-50.0), g);
  EXPECT_EQ(a.success_prob.estimate, b.success_prob.estimate);
  EXPECT_EQ(a.ase.estimate, b.ase.estimate);
  EXPECT_EQ(a.ase.half_width_95, b.ase.half_width_95);
  EXPECT_EQ(a.retained_total, b.retained_total);
  g.seed = 78;
  const GeoEstimate c = estimate_success_and_ase(0.2, link, {16, 32}, dbm_to_watts(-50.0), g);
  EXPECT_NE(a.ase.estimate, c.ase.estimate);
}

TEST(GeoSim, SuccessProbabilityNearClosedForm) {
  LinkBudget link;
  GeoSimSettings g;
  g.replications = 400;
  g.seed = 5;
  for (double dbm : {-60.0, -45.0, -10.0}) {
    const GeoEstimate e = estimate_success_and_ase(0.2, link, {16, 32}, dbm_to_watts(dbm), g);
    const SpatialState s = ase(0.2, link, {16, 32}, dbm_to_watts(dbm));
    EXPECT_NEAR(e.success_prob.estimate / s.success_prob, 1.0, 0.10) << dbm;
    EXPECT_NEAR(e.active_density.estimate / s.active_density, 1.0, 0.03) << dbm;
  }
}

TEST(GeoSim, TooFewRetained) {
  LinkBudget link;
  GeoSimSettings g;
  g.region.side_m = 100.0;
  g.replications = 2;
  EXPECT_THROW(estimate_success_and_ase(0.2, link, {16, 32}, dbm_to_watts(-60.0), g), InsufficientRetained);
}

TEST(GeoSim, BoundedRegionMustBeWide) {
  LinkBudget link;
  GeoSimSettings g;
  g.region.side_m = 1000.0;
  g.region.wraparound = false;
  EXPECT_THROW(estimate_success_and_ase(0.2, link, {16, 32}, dbm_to_watts(-60.0), g), ConfigError);
}
