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
// Optimal carrier-sensing threshold for one target SIR, next to the threshold
// a backoff-unaware design would pick.
//
//   optimal_threshold [beta_db] [density]

#include <cstdio>
#include <cstdlib>

#include "csense/optimizer.hpp"
#include "csense/units.hpp"

int main(int argc, char** argv) {
  const double beta_db = argc > 1 ? std::atof(argv[1]) : 10.0;
  const double density = argc > 2 ? std::atof(argv[2]) : 0.2;

  csense::LinkBudget link;
  link.tx_power_watts = csense::dbm_to_watts(30.0);
  link.link_distance_m = 50.0;
  link.target_sir = csense::db_to_linear(beta_db);
  link.control_target_sir = csense::db_to_linear(10.0);
  const csense::BackoffParams backoff{16, 32};

  try {
    const auto best = csense::optimize_threshold(density, link, backoff);
    const auto& s = best.converged_state;
    std::printf("optimum  I_s = %.2f dBm (%s, %d iterations%s)\n", best.optimal_threshold_dbm,
                csense::to_string(best.method), best.outer_iterations, best.at_boundary ? ", at range end" : "");
    std::printf("         tau = %.3g  R_s = %.1f m  lambda_t = %.3g /m^2  p_s = %.3f  eta = %.4g\n",
                s.contention.tau, s.sense_range_m, s.active_density, s.success_prob, s.ase);

    const double nb = csense::no_beb_optimal_threshold(density, link);
    const auto at_nb = csense::ase(density, link, backoff, nb);
    std::printf("no-BEB   I_s = %.2f dBm (R* = %.1f m)  eta = %.4g  (%.1f%% below the optimum)\n",
                csense::watts_to_dbm(nb), csense::no_beb_optimal_range(link), at_nb.ase,
                100.0 * (1.0 - at_nb.ase / s.ase));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "optimal_threshold: %s\n", e.what());
    return 1;
  }
  return 0;
}
