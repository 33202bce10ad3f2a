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

// Runs the slotted contention simulator at one operating point and prints the
// empirical access and collision probabilities next to the analytic ones.
//
//   mac_probe [density] [threshold_dbm] [beta_c_db] [region_m] [slots]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "csense/analytic_model.hpp"
#include "csense/mac_sim.hpp"
#include "csense/units.hpp"

int main(int argc, char** argv) {
  const double density = argc > 1 ? std::atof(argv[1]) : 1e-3;
  const double is_dbm = argc > 2 ? std::atof(argv[2]) : -40.0;
  const double bc_db = argc > 3 ? std::atof(argv[3]) : 3.0;

  csense::LinkBudget link;
  link.tx_power_watts = csense::dbm_to_watts(30.0);
  link.link_distance_m = 50.0;
  link.control_target_sir = csense::db_to_linear(bc_db);
  const csense::BackoffParams backoff{32, 5};

  csense::MacSimSettings sim;
  sim.region.side_m = argc > 4 ? std::atof(argv[4]) : 2000.0;
  sim.slots = argc > 5 ? std::strtoull(argv[5], nullptr, 10) : 62'500;
  sim.seed = 7;

  const double is_w = csense::dbm_to_watts(is_dbm);
  const auto analytic = csense::solve_tau(density, link, backoff, is_w);
  const auto t0 = std::chrono::steady_clock::now();
  const auto stats = csense::run_mac_sim(density, link, backoff, is_w, sim);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  std::printf("nodes=%llu slots=%llu (%.1f s)\n", static_cast<unsigned long long>(stats.nodes),
              static_cast<unsigned long long>(stats.slots_run), secs);
  std::printf("tau   analytic=%.5f  simulated=%.5f\n", analytic.tau, stats.tau_hat);
  std::printf("p_c   analytic=%.5f  simulated=%.5f\n", analytic.collision_prob, stats.p_c_hat);
  std::printf("p_b   analytic=%.5f  simulated=%.5f\n", analytic.busy_prob, stats.busy_hat);
  return 0;
}
