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
#include <random>

#include <gtest/gtest.h>

#include "csense/optimizer.hpp"

using namespace csense;

namespace {

LinkBudget figure_link(double beta_db) {
  LinkBudget l;
  l.tx_power_watts = dbm_to_watts(30.0);
  l.target_sir = db_to_linear(beta_db);
  l.control_target_sir = db_to_linear(10.0);
  return l;
}

const BackoffParams kFigureBackoff{16, 32};

}  // namespace

TEST(Optimizer, AgreesWithGridOverTargetSir) {
  double prev = 1e300;
  for (double beta_db = 0.0; beta_db <= 20.0; beta_db += 2.0) {
    const LinkBudget l = figure_link(beta_db);
    const OptimizerReport n = optimize_threshold(0.2, l, kFigureBackoff);
    const OptimizerReport g = grid_search_threshold(0.2, l, kFigureBackoff);
    EXPECT_LE(std::fabs(n.optimal_threshold_dbm - g.optimal_threshold_dbm), 0.1 + 1e-9) << beta_db;
    EXPECT_GE(n.converged_state.ase, g.converged_state.ase * (1 - 1e-9));
    EXPECT_LE(n.optimal_threshold_dbm, prev + 1e-9);
    EXPECT_TRUE(certify_local_max(0.2, l, kFigureBackoff, n));
    prev = n.optimal_threshold_dbm;
  }
}

TEST(Optimizer, InteriorOptimumUsesNewton) {
  const OptimizerReport r = optimize_threshold(0.2, figure_link(10.0), kFigureBackoff);
  EXPECT_EQ(r.method, OptimizerMethod::kNewton);
  EXPECT_FALSE(r.at_boundary);
  EXPECT_FALSE(r.trace.empty());
  EXPECT_LT(r.outer_iterations, 20);
  EXPECT_NEAR(r.optimal_threshold_dbm, -44.64, 0.05);
}

TEST(Optimizer, BoundaryOptimumFallsBack) {
  const OptimizerReport r = optimize_threshold(0.2, figure_link(0.0), kFigureBackoff);
  EXPECT_EQ(r.method, OptimizerMethod::kGoldenSection);
  EXPECT_TRUE(r.at_boundary);
  EXPECT_NEAR(r.optimal_threshold_watts, threshold_upper_bound(figure_link(0.0)), 1e-6 * r.optimal_threshold_watts);
}

TEST(Optimizer, FrozenTauIsAComparisonVariant) {
  // Holding tau fixed drops d(tau)/d(I_s) from the stationarity condition, so
  // the frozen variant lands near, but not on, the maximizer of the full model.
  OptimizerOptions opts;
  opts.derivative = DerivativeMode::kFrozenTau;
  for (double beta_db : {6.0, 10.0, 16.0}) {
    const LinkBudget l = figure_link(beta_db);
    const OptimizerReport f = optimize_threshold(0.2, l, kFigureBackoff, {}, opts);
    const OptimizerReport n = optimize_threshold(0.2, l, kFigureBackoff);
    EXPECT_EQ(f.method, OptimizerMethod::kNewton);
    EXPECT_LE(std::fabs(f.optimal_threshold_dbm - n.optimal_threshold_dbm), 0.5) << beta_db;
    EXPECT_LE(f.converged_state.ase, n.converged_state.ase * (1 + 1e-12)) << beta_db;
  }
}

TEST(Optimizer, RandomizedAgainstGrid) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 8; ++i) {
    LinkBudget l;
    l.tx_power_watts = dbm_to_watts(20.0 + 10.0 * u(gen));
    l.link_distance_m = 20.0 + 60.0 * u(gen);
    l.target_sir = db_to_linear(20.0 * u(gen));
    l.control_target_sir = db_to_linear(3.0 + 7.0 * u(gen));
    const double density = std::pow(10.0, -3.0 + 3.0 * u(gen));
    const BackoffParams b{8 << static_cast<int>(3 * u(gen)), 3 + static_cast<int>(30 * u(gen))};
    const OptimizerReport n = optimize_threshold(density, l, b);
    const OptimizerReport g = grid_search_threshold(density, l, b);
    EXPECT_LE(std::fabs(n.optimal_threshold_dbm - g.optimal_threshold_dbm), 0.1 + 1e-9) << i;
  }
}

TEST(Grid, RejectsZeroStep) {
  EXPECT_THROW(grid_search_threshold(0.2, figure_link(10.0), kFigureBackoff, 0.0), ConfigError);
}

TEST(Grid, StaysBelowUpperBound) {
  const LinkBudget l = figure_link(0.0);
  const OptimizerReport g = grid_search_threshold(0.2, l, kFigureBackoff);
  EXPECT_LT(g.optimal_threshold_watts, threshold_upper_bound(l));
  EXPECT_TRUE(g.at_boundary);
}

TEST(NoBackoff, OptimalRangeClosedForm) {
  LinkBudget l;
  l.target_sir = 1.0;
  EXPECT_DOUBLE_EQ(no_beb_optimal_range(l), 56.39192427808411);
  l.target_sir = 10.0;
  EXPECT_DOUBLE_EQ(no_beb_optimal_range(l), 1.1278384855616823 * std::pow(10.0, 0.25) * 50.0);
  l.path_loss_exp = 3.0;
  EXPECT_THROW(no_beb_optimal_range(l), UnsupportedAlpha);
}

TEST(NoBackoff, ThresholdReproducesRange) {
  for (double beta_db : {0.0, 10.0, 20.0}) {
    const LinkBudget l = figure_link(beta_db);
    const double is = no_beb_optimal_threshold(0.2, l);
    EXPECT_NEAR(sensing_range(0.2, 1.0, l.tx_power_watts, is, 4.0), no_beb_optimal_range(l),
                1e-9 * no_beb_optimal_range(l));
  }
}

TEST(NoBackoff, NeverBeatsBackoffAwareOptimum) {
  for (double beta_db = 0.0; beta_db <= 20.0; beta_db += 2.0) {
    const LinkBudget l = figure_link(beta_db);
    const OptimizerReport r = optimize_threshold(0.2, l, kFigureBackoff);
    EXPECT_GE(r.converged_state.ase, ase(0.2, l, kFigureBackoff, no_beb_optimal_threshold(0.2, l)).ase);
  }
}
