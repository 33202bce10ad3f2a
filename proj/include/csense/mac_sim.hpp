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

// Slotted contention simulator for CSMA/CA with binary exponential backoff.
//
// Per slot:
//  1. nodes whose backoff counter is 0 send an RTS;
//  2. every other node compares the Rayleigh-faded interference produced by
//     the previous slot's senders with the sensing threshold and freezes its
//     counter if the channel is busy, otherwise decrements it;
//  3. an RTS succeeds iff its SIR at the paired receiver, over all concurrent
//     senders, reaches beta_c. Success resets the node to stage 0, failure
//     moves it to min(stage + 1, m); either way a fresh counter is drawn
//     uniformly from [0, W0 * 2^stage).
//
// Interference sums are truncated at a cutoff radius where one unit-gain
// interferer contributes `cutoff_fraction` of the relevant threshold; the
// mean of the truncated tail (senders beyond the cutoff at their empirical
// density) is added back as a constant.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "csense/analytic_model.hpp"
#include "csense/error.hpp"
#include "csense/geometry_sim.hpp"
#include "csense/parallel.hpp"
#include "csense/rng.hpp"
#include "csense/spatial.hpp"
#include "csense/units.hpp"

namespace csense {

struct NodeMacState {
  int stage = 0;
  std::uint64_t backoff_counter = 0;
  Point position;
  Point rx_position;
};

struct MacSimSettings {
  SimRegion region;
  std::uint64_t slots = 62'500;
  double warmup_fraction = 0.2;
  std::uint64_t seed = 1;
  double cutoff_fraction = 0.01;
};

struct MacSimStats {
  double tau_hat = 0.0;    // attempts per node per slot (frozen slots included)
  double p_c_hat = 0.0;    // failed RTS / attempts
  double busy_hat = 0.0;   // sensing node-slots found busy / sensing node-slots
  std::uint64_t slots_run = 0;
  std::uint64_t warmup_slots = 0;
  std::uint64_t nodes = 0;
  std::uint64_t attempts = 0;
  std::uint64_t collisions = 0;
};

/// Contention window at a backoff stage, W0 * 2^min(stage, m).
inline std::uint64_t contention_window(const BackoffParams& backoff, int stage) {
  return static_cast<std::uint64_t>(backoff.initial_window) << std::min(stage, backoff.max_stage);
}

namespace detail {

// Mean interference, at unit transmit power, from senders of density `rate`
// spread uniformly between radius r and the equal-area radius of the region.
inline double tail_interference(double rate, double r, const SimRegion& region, double alpha) {
  const double r_eq = region.side_m / std::sqrt(std::numbers::pi);
  if (!(r < r_eq) || rate <= 0.0) return 0.0;
  return rate * 2.0 * std::numbers::pi / (alpha - 2.0) * (std::pow(r, 2.0 - alpha) - std::pow(r_eq, 2.0 - alpha));
}

}  // namespace detail

/// Runs the contention process on a fixed set of node positions.
inline MacSimStats run_mac_sim_on(const std::vector<Point>& positions, const LinkBudget& link,
                                  const BackoffParams& backoff, double threshold_watts,
                                  const MacSimSettings& settings) {
  link.validate();
  backoff.validate();
  settings.region.validate();
  if (positions.empty()) throw InsufficientNodes("run_mac_sim: no nodes in the region");
  if (!(threshold_watts > 0.0)) throw ConfigError("run_mac_sim: threshold must be > 0");
  if (backoff.max_stage > 40) throw ConfigError("run_mac_sim: max stage above 40 overflows the window");
  if (!(settings.warmup_fraction >= 0.0 && settings.warmup_fraction < 1.0))
    throw ConfigError("run_mac_sim: warmup fraction must be in [0, 1)");
  if (!(settings.cutoff_fraction > 0.0)) throw ConfigError("run_mac_sim: cutoff fraction must be > 0");
  if (settings.slots == 0 || static_cast<std::uint64_t>(std::floor(settings.warmup_fraction * settings.slots)) >=
                                 settings.slots)
    throw ConfigError("run_mac_sim: need more slots than warmup slots");

  const SimRegion& region = settings.region;
  const double alpha = link.path_loss_exp;
  const double p = link.tx_power_watts;
  const double half_side = 0.5 * region.side_m;
  const double sense_cut =
      std::min(half_side, std::pow(p / (settings.cutoff_fraction * threshold_watts), 1.0 / alpha));
  const double coll_cut = std::min(
      half_side, link.link_distance_m * std::pow(link.control_target_sir / settings.cutoff_fraction, 1.0 / alpha));
  const double signal_gain = p * std::pow(link.link_distance_m, -alpha);

  Rng rng(settings.seed, 1);
  const std::size_t n = positions.size();
  std::vector<NodeMacState> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes[i].position = positions[i];
    nodes[i].rx_position = detail::receiver_for(region, positions[i], link.link_distance_m, rng);
    nodes[i].backoff_counter = rng.below(contention_window(backoff, 0));
  }
  const double expected_pairs = static_cast<double>(n) * static_cast<double>(n) / region.area() *
                                std::numbers::pi * sense_cut * sense_cut;
  if (expected_pairs > 5e7)
    throw ConfigError("run_mac_sim: about " + std::to_string(static_cast<long long>(expected_pairs)) +
                      " sensing pairs; use a smaller region or a larger cutoff fraction");

  // Static sensing neighbourhoods with their mean received powers.
  std::vector<std::size_t> nbr_start(n + 1, 0);
  std::vector<std::uint32_t> nbr_idx;
  std::vector<double> nbr_gain;
  {
    const SpatialGrid node_grid(region, positions, sense_cut);
    for (std::size_t i = 0; i < n; ++i) {
      node_grid.for_each_within(positions[i], sense_cut, [&](std::uint32_t j, double d2) {
        if (j == i) return;
        nbr_idx.push_back(j);
        nbr_gain.push_back(p * detail::path_gain(d2, alpha));
      });
      nbr_start[i + 1] = nbr_idx.size();
    }
  }

  std::vector<double> interference(n, 0.0);
  std::vector<char> busy(n, 0);
  std::vector<std::uint32_t> senders;
  std::vector<Point> sender_pos;
  std::vector<char> success;

  const std::uint64_t warmup = static_cast<std::uint64_t>(std::floor(settings.warmup_fraction * settings.slots));
  MacSimStats stats;
  stats.slots_run = settings.slots;
  stats.warmup_slots = warmup;
  stats.nodes = n;
  std::uint64_t node_slots = 0, sense_slots = 0, busy_slots = 0;

  for (std::uint64_t slot = 0; slot < settings.slots; ++slot) {
    const bool counted = slot >= warmup;

    senders.clear();
    sender_pos.clear();
    std::uint64_t frozen = 0;
    for (std::size_t i = 0; i < n; ++i) {
      NodeMacState& node = nodes[i];
      assert(node.backoff_counter < contention_window(backoff, node.stage));
      if (node.backoff_counter == 0) {
        senders.push_back(static_cast<std::uint32_t>(i));
        sender_pos.push_back(node.position);
      } else if (busy[i]) {
        ++frozen;
      } else {
        --node.backoff_counter;
      }
    }

    // RTS outcomes.
    const std::size_t k = senders.size();
    success.assign(k, 0);
    if (k > 0) {
      const SpatialGrid sender_grid(region, sender_pos, coll_cut);
      const double tail = p * detail::tail_interference(static_cast<double>(k - 1) / region.area(), coll_cut,
                                                        region, alpha);
      for (std::size_t s = 0; s < k; ++s) {
        const Point& rx = nodes[senders[s]].rx_position;
        double total = tail;
        sender_grid.for_each_within(rx, coll_cut, [&](std::uint32_t j, double d2) {
          if (j != s) total += rng.exponential() * p * detail::path_gain(d2, alpha);
        });
        success[s] = rng.exponential() * signal_gain >= link.control_target_sir * total;
      }
    }
    std::uint64_t failed = 0;
    for (std::size_t s = 0; s < k; ++s) {
      NodeMacState& node = nodes[senders[s]];
      if (success[s]) {
        node.stage = 0;
      } else {
        node.stage = std::min(node.stage + 1, backoff.max_stage);
        ++failed;
      }
      node.backoff_counter = rng.below(contention_window(backoff, node.stage));
    }

    // Channel state seen by everyone in the next slot.
    std::fill(interference.begin(), interference.end(), 0.0);
    for (std::size_t s = 0; s < k; ++s) {
      const std::uint32_t src = senders[s];
      for (std::size_t e = nbr_start[src]; e < nbr_start[src + 1]; ++e)
        interference[nbr_idx[e]] += rng.exponential() * nbr_gain[e];
    }
    // A sender's own signal is not part of its tail.
    const double sense_tail =
        p * detail::tail_interference(static_cast<double>(k) / region.area(), sense_cut, region, alpha);
    const double sender_tail =
        k > 0 ? p * detail::tail_interference(static_cast<double>(k - 1) / region.area(), sense_cut, region, alpha)
              : 0.0;
    for (std::size_t i = 0; i < n; ++i) busy[i] = interference[i] + sense_tail >= threshold_watts;
    for (std::uint32_t src : senders) busy[src] = interference[src] + sender_tail >= threshold_watts;

    if (counted) {
      stats.attempts += k;
      stats.collisions += failed;
      node_slots += n;
      sense_slots += n - k;
      busy_slots += frozen;
    }
  }

  stats.tau_hat = node_slots ? static_cast<double>(stats.attempts) / static_cast<double>(node_slots) : 0.0;
  stats.p_c_hat = stats.attempts ? static_cast<double>(stats.collisions) / static_cast<double>(stats.attempts) : 0.0;
  stats.busy_hat = sense_slots ? static_cast<double>(busy_slots) / static_cast<double>(sense_slots) : 0.0;
  return stats;
}

/// Samples PPP(density) node positions on the region (substream 0 of the seed)
/// and runs the contention process on them.
inline MacSimStats run_mac_sim(double density, const LinkBudget& link, const BackoffParams& backoff,
                               double threshold_watts, const MacSimSettings& settings) {
  if (!(density > 0.0)) throw ConfigError("run_mac_sim: density must be > 0");
  Rng rng(settings.seed, 0);
  const std::uint64_t n = rng.poisson(density * settings.region.area());
  std::vector<Point> positions(n);
  for (auto& pt : positions) pt = settings.region.uniform_point(rng);
  if (positions.empty())
    throw InsufficientNodes("run_mac_sim: no nodes drawn; expected " +
                            std::to_string(density * settings.region.area()));
  return run_mac_sim_on(positions, link, backoff, threshold_watts, settings);
}

struct TauCell {
  double density = 0.0;
  double threshold_dbm = 0.0;
  double control_sir_db = 0.0;
};

struct TauRow {
  TauCell cell;
  double tau_analytic = 0.0;
  bool simulated = false;
  double tau_sim = 0.0;
  double tau_sim_ci95 = 0.0;
  double p_c_analytic = 0.0;
  double p_c_sim = 0.0;
};

struct TauTableSettings {
  MacSimSettings sim;
  int seeds = 10;
  bool skip_sim = false;
  unsigned jobs = 1;
  // The torus side is shrunk for dense cells so that a run holds about this
  // many nodes at most. Zero keeps sim.region for every cell.
  double max_expected_nodes = 4000.0;
};

/// Region used for one tau-table cell.
inline SimRegion tau_cell_region(double density, const TauTableSettings& settings) {
  SimRegion r = settings.sim.region;
  if (settings.max_expected_nodes > 0.0 && density * r.area() > settings.max_expected_nodes)
    r.side_m = std::sqrt(settings.max_expected_nodes / density);
  return r;
}

/// The twelve cells: density {1e-4, 1e-3, 1e-2} x threshold {-40, -10} dBm x
/// control SIR {3, 10} dB.
inline std::vector<TauCell> default_tau_cells() {
  std::vector<TauCell> cells;
  for (double d : {1e-4, 1e-3, 1e-2})
    for (double is : {-40.0, -10.0})
      for (double bc : {3.0, 10.0}) cells.push_back({d, is, bc});
  return cells;
}

/// Analytic and simulated access probability per cell. Simulated values are
/// the mean of `seeds` independent runs; the CI is the 95% half-width of that
/// mean across runs.
inline std::vector<TauRow> tau_table(const std::vector<TauCell>& cells, const BackoffParams& backoff,
                                     const LinkBudget& link, const TauTableSettings& settings) {
  std::vector<TauRow> rows(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    LinkBudget l = link;
    l.control_target_sir = db_to_linear(cells[c].control_sir_db);
    const ContentionState cs = solve_tau(cells[c].density, l, backoff, dbm_to_watts(cells[c].threshold_dbm));
    rows[c].cell = cells[c];
    rows[c].tau_analytic = cs.tau;
    rows[c].p_c_analytic = cs.collision_prob;
  }
  if (settings.skip_sim) return rows;
  if (settings.seeds < 1) throw ConfigError("tau_table: need at least one seed");

  const std::size_t seeds = static_cast<std::size_t>(settings.seeds);
  std::vector<MacSimStats> runs(cells.size() * seeds);
  parallel_for(runs.size(), settings.jobs, [&](std::size_t job) {
    const std::size_t c = job / seeds, k = job % seeds;
    LinkBudget l = link;
    l.control_target_sir = db_to_linear(cells[c].control_sir_db);
    MacSimSettings s = settings.sim;
    s.seed = substream_seed(settings.sim.seed, (static_cast<std::uint64_t>(c) << 20) | k);
    s.region = tau_cell_region(cells[c].density, settings);
    runs[job] = run_mac_sim(cells[c].density, l, backoff, dbm_to_watts(cells[c].threshold_dbm), s);
  });
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> taus, pcs;
    for (std::size_t k = 0; k < seeds; ++k) {
      taus.push_back(runs[c * seeds + k].tau_hat);
      pcs.push_back(runs[c * seeds + k].p_c_hat);
    }
    rows[c].simulated = true;
    rows[c].tau_sim = detail::mean(taus);
    rows[c].tau_sim_ci95 = detail::mean_half_width(taus);
    rows[c].p_c_sim = detail::mean(pcs);
  }
  return rows;
}

}  // namespace csense
