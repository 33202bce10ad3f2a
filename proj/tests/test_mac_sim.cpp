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

#include <gtest/gtest.h>

#include "csense/mac_sim.hpp"

using namespace csense;

namespace {

LinkBudget table_link(double control_sir_db) {
  LinkBudget l;
  l.control_target_sir = db_to_linear(control_sir_db);
  return l;
}

MacSimSettings small_settings(double side, std::uint64_t slots, std::uint64_t seed) {
  MacSimSettings s;
  s.region.side_m = side;
  s.slots = slots;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(ContentionWindow, DoublesUpToMaxStage) {
  const BackoffParams b{32, 5};
  EXPECT_EQ(contention_window(b, 0), 32u);
  EXPECT_EQ(contention_window(b, 3), 256u);
  EXPECT_EQ(contention_window(b, 5), 1024u);
  EXPECT_EQ(contention_window(b, 9), 1024u);
}

TEST(MacSim, IsolatedNode) {
  // One node never collides and never senses a busy channel: one attempt per
  // 1 + (W0 - 1)/2 slots on average.
  const std::vector<Point> one{{100.0, 100.0}};
  const MacSimStats st = run_mac_sim_on(one, table_link(10.0), {32, 5}, 1e-9, small_settings(200.0, 250'000, 1));
  EXPECT_NEAR(st.tau_hat, 2.0 / 33.0, 0.002);
  EXPECT_EQ(st.collisions, 0u);
  EXPECT_EQ(st.busy_hat, 0.0);
}

TEST(MacSim, Deterministic) {
  const MacSimSettings s = small_settings(600.0, 4000, 42);
  const MacSimStats a = run_mac_sim(1e-3, table_link(3.0), {32, 5}, dbm_to_watts(-40.0), s);
  const MacSimStats b = run_mac_sim(1e-3, table_link(3.0), {32, 5}, dbm_to_watts(-40.0), s);
  EXPECT_EQ(a.attempts, b.attempts);
  EXPECT_EQ(a.collisions, b.collisions);
  EXPECT_EQ(a.tau_hat, b.tau_hat);
  const MacSimStats c = run_mac_sim(1e-3, table_link(3.0), {32, 5}, dbm_to_watts(-40.0), small_settings(600.0, 4000, 43));
  EXPECT_NE(a.attempts, c.attempts);
}

TEST(MacSim, CloseToAnalyticAccessProbability) {
  for (double bc : {3.0, 10.0}) {
    const LinkBudget l = table_link(bc);
    const double is = dbm_to_watts(-40.0);
    const MacSimStats st = run_mac_sim(1e-3, l, {32, 5}, is, small_settings(700.0, 20'000, 8));
    const ContentionState cs = solve_tau(1e-3, l, {32, 5}, is);
    EXPECT_NEAR(st.tau_hat, cs.tau, 0.003) << bc;
    EXPECT_NEAR(st.p_c_hat, cs.collision_prob, 0.05) << bc;
    EXPECT_NEAR(st.busy_hat, cs.busy_prob, 0.05) << bc;
  }
}

TEST(MacSim, AccessDropsWithDensityAndControlSir) {
  const double is = dbm_to_watts(-40.0);
  const auto tau = [&](double density, double bc) {
    return run_mac_sim(density, table_link(bc), {32, 5}, is, small_settings(700.0, 10'000, 3)).tau_hat;
  };
  EXPECT_GT(tau(1e-4, 3.0), tau(1e-3, 3.0));
  EXPECT_GT(tau(1e-3, 3.0), tau(1e-3, 10.0));
}

TEST(MacSim, RejectsBadSettings) {
  const LinkBudget l = table_link(3.0);
  EXPECT_THROW(run_mac_sim_on({}, l, {32, 5}, 1e-7, small_settings(100.0, 100, 1)), InsufficientNodes);
  EXPECT_THROW(run_mac_sim_on({{1.0, 1.0}}, l, {32, 5}, 1e-7, small_settings(100.0, 0, 1)), ConfigError);
  MacSimSettings s = small_settings(100.0, 100, 1);
  s.warmup_fraction = 1.0;
  EXPECT_THROW(run_mac_sim_on({{1.0, 1.0}}, l, {32, 5}, 1e-7, s), ConfigError);
  EXPECT_THROW(run_mac_sim_on({{1.0, 1.0}}, l, {32, 41}, 1e-7, small_settings(100.0, 100, 1)), ConfigError);
  EXPECT_THROW(run_mac_sim(0.0, l, {32, 5}, 1e-7, small_settings(100.0, 100, 1)), ConfigError);
}

TEST(TauTable, CellsAndRegions) {
  const auto cells = default_tau_cells();
  ASSERT_EQ(cells.size(), 12u);
  TauTableSettings t;
  EXPECT_EQ(tau_cell_region(1e-3, t).side_m, 2000.0);
  EXPECT_NEAR(tau_cell_region(1e-2, t).side_m, std::sqrt(4000.0 / 1e-2), 1e-9);
  t.max_expected_nodes = 0.0;
  EXPECT_EQ(tau_cell_region(1e-2, t).side_m, 2000.0);
}

TEST(TauTable, AnalyticOnly) {
  TauTableSettings t;
  t.skip_sim = true;
  const auto rows = tau_table(default_tau_cells(), {32, 5}, LinkBudget{}, t);
  ASSERT_EQ(rows.size(), 12u);
  for (const TauRow& r : rows) {
    EXPECT_FALSE(r.simulated);
    EXPECT_GT(r.tau_analytic, 0.0);
  }
}

TEST(TauTable, SeedsReduceInOrder) {
  TauTableSettings t;
  t.sim.region.side_m = 500.0;
  t.sim.slots = 3000;
  t.seeds = 3;
  t.sim.seed = 9;
  const std::vector<TauCell> cells{{1e-3, -40.0, 3.0}};
  t.jobs = 1;
  const auto a = tau_table(cells, {32, 5}, LinkBudget{}, t);
  t.jobs = 3;
  const auto b = tau_table(cells, {32, 5}, LinkBudget{}, t);
  EXPECT_EQ(a[0].tau_sim, b[0].tau_sim);
  EXPECT_EQ(a[0].tau_sim_ci95, b[0].tau_sim_ci95);
  EXPECT_GT(a[0].tau_sim_ci95, 0.0);
}
