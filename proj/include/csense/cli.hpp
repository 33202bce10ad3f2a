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

// Command-line front end. run_cli() does all the work so tests can drive it
// in-process; tools/csense.cpp only forwards argv.
//
//   csense tau-table  [--skip-sim] [--seeds N] [--slots N] ...
//   csense ase-sweep  [--from DBM --to DBM --step DB] [--with-sim] ...
//   csense optimize   [--beta-list DB,DB,... | --beta-from --beta-to --beta-step] [--method newton|grid]
//   csense mac-sim    --lambda X --is-dbm Y --beta-c-db Z ...
//   csense geo-sim    --lambda X --is-dbm Y --beta-db Z ...
//
// Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "csense/analytic_model.hpp"
#include "csense/error.hpp"
#include "csense/geometry_sim.hpp"
#include "csense/mac_sim.hpp"
#include "csense/optimizer.hpp"
#include "csense/units.hpp"

namespace csense {

namespace cli {

/// Shortest decimal string that reads back to the same double.
inline std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

struct CommonOptions {
  std::optional<double> lambda, p_dbm, is_dbm, beta_db, beta_c_db, rt_m, alpha;
  std::optional<int> w0, m;
  std::optional<std::uint64_t> seed;
  unsigned jobs = 1;
  std::string out;
};

// Per-command defaults; anything given on the command line wins.
struct Defaults {
  double lambda;
  double is_dbm;
  double beta_db;
  double beta_c_db;
  int w0;
  int m;
};

inline constexpr Defaults kTableDefaults{1e-3, -40.0, 10.0, 10.0, 32, 5};
inline constexpr Defaults kFigureDefaults{0.2, -50.0, 10.0, 10.0, 16, 32};

struct Resolved {
  double lambda;
  double is_watts;
  double is_dbm;
  LinkBudget link;
  BackoffParams backoff;
};

inline Resolved resolve(const CommonOptions& o, const Defaults& d) {
  Resolved r;
  r.lambda = o.lambda.value_or(d.lambda);
  if (!(r.lambda > 0.0)) throw ConfigError("--lambda must be > 0");
  r.is_dbm = o.is_dbm.value_or(d.is_dbm);
  r.is_watts = dbm_to_watts(r.is_dbm);
  r.link.tx_power_watts = dbm_to_watts(o.p_dbm.value_or(30.0));
  r.link.link_distance_m = o.rt_m.value_or(50.0);
  r.link.path_loss_exp = o.alpha.value_or(4.0);
  r.link.target_sir = db_to_linear(o.beta_db.value_or(d.beta_db));
  r.link.control_target_sir = db_to_linear(o.beta_c_db.value_or(d.beta_c_db));
  r.backoff.initial_window = o.w0.value_or(d.w0);
  r.backoff.max_stage = o.m.value_or(d.m);
  r.link.validate();
  r.backoff.validate();
  if (r.link.path_loss_exp != 4.0)
    throw UnsupportedAlpha("the busy probability and closed-form success probability need --alpha 4");
  return r;
}

// Seed given on the command line, or a fresh one announced on `err`.
inline std::uint64_t seed_or_draw(const CommonOptions& o, std::ostream& err) {
  if (o.seed) return *o.seed;
  std::random_device rd;
  const std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  err << "seed: " << s << "\n";
  return s;
}

inline std::vector<double> range_inclusive(double from, double to, double step, const char* what) {
  if (!(step > 0.0)) throw ConfigError(std::string(what) + ": step must be > 0");
  if (to < from) throw ConfigError(std::string(what) + ": empty range");
  std::vector<double> v;
  const long n = static_cast<long>(std::floor((to - from) / step + 1e-9));
  for (long k = 0; k <= n; ++k) v.push_back(from + k * step);
  return v;
}

inline std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    double x = 0.0;
    const auto r = std::from_chars(item.data(), item.data() + item.size(), x);
    if (r.ec != std::errc() || r.ptr != item.data() + item.size())
      throw ConfigError(std::string(what) + ": cannot parse '" + item + "'");
    v.push_back(x);
  }
  if (v.empty()) throw ConfigError(std::string(what) + ": empty list");
  return v;
}

inline nlohmann::ordered_json state_json(const SpatialState& s) {
  nlohmann::ordered_json j;
  j["is_dbm"] = watts_to_dbm(s.sense_threshold_watts);
  j["is_watts"] = s.sense_threshold_watts;
  j["tau"] = s.contention.tau;
  j["p_b"] = s.contention.busy_prob;
  j["p_c"] = s.contention.collision_prob;
  j["r_s_m"] = s.sense_range_m;
  j["lambda_t"] = s.active_density;
  j["p_s"] = s.success_prob;
  j["eta"] = s.ase;
  return j;
}

struct TauTableOptions {
  bool skip_sim = false;
  int seeds = 10;
  std::uint64_t slots = 62'500;
  double region_m = 2000.0;
  double max_nodes = 4000.0;
};

inline int cmd_tau_table(const CommonOptions& o, const TauTableOptions& t, std::ostream& out, std::ostream& err) {
  const Resolved r = resolve(o, kTableDefaults);
  std::vector<TauCell> cells;
  for (const TauCell& c : default_tau_cells()) {
    if (o.lambda && c.density != *o.lambda) continue;
    if (o.is_dbm && c.threshold_dbm != *o.is_dbm) continue;
    if (o.beta_c_db && c.control_sir_db != *o.beta_c_db) continue;
    cells.push_back(c);
  }
  if (cells.empty()) cells.push_back({r.lambda, r.is_dbm, o.beta_c_db.value_or(kTableDefaults.beta_c_db)});

  TauTableSettings s;
  s.skip_sim = t.skip_sim;
  s.seeds = t.seeds;
  s.jobs = o.jobs;
  s.max_expected_nodes = t.max_nodes;
  s.sim.slots = t.slots;
  s.sim.region.side_m = t.region_m;
  if (!t.skip_sim) s.sim.seed = seed_or_draw(o, err);
  const auto rows = tau_table(cells, r.backoff, r.link, s);

  out << "lambda,is_dbm,beta_c_db,tau_analytic,tau_sim,tau_sim_ci95\n";
  for (const TauRow& row : rows) {
    out << fmt(row.cell.density) << ',' << fmt(row.cell.threshold_dbm) << ',' << fmt(row.cell.control_sir_db) << ','
        << fmt(row.tau_analytic) << ',';
    if (row.simulated) out << fmt(row.tau_sim) << ',' << fmt(row.tau_sim_ci95);
    else out << ',';
    out << '\n';
  }
  return 0;
}

struct SweepOptions {
  double from = -60.0, to = -10.0, step = 1.0;
  bool with_sim = false;
  std::uint64_t reps = 200;
  double region_m = 2000.0;
};

inline int cmd_ase_sweep(const CommonOptions& o, const SweepOptions& w, std::ostream& out, std::ostream& err) {
  const Resolved r = resolve(o, kFigureDefaults);
  const auto points = range_inclusive(w.from, w.to, w.step, "ase-sweep");
  GeoSimSettings g;
  g.replications = w.reps;
  g.region.side_m = w.region_m;
  g.jobs = o.jobs;
  if (w.with_sim) g.seed = seed_or_draw(o, err);

  out << "is_dbm,tau,r_s_m,lambda_t,p_s,eta_analytic";
  if (w.with_sim) out << ",eta_sim,eta_sim_ci95";
  out << '\n';
  for (std::size_t k = 0; k < points.size(); ++k) {
    const double is_w = dbm_to_watts(points[k]);
    const SpatialState s = ase(r.lambda, r.link, r.backoff, is_w);
    out << fmt(points[k]) << ',' << fmt(s.contention.tau) << ',' << fmt(s.sense_range_m) << ','
        << fmt(s.active_density) << ',' << fmt(s.success_prob) << ',' << fmt(s.ase);
    if (w.with_sim) {
      GeoSimSettings gk = g;
      gk.seed = substream_seed(g.seed, k);
      const GeoEstimate e = estimate_success_and_ase(r.lambda, r.link, r.backoff, is_w, gk);
      out << ',' << fmt(e.ase.estimate) << ',' << fmt(e.ase.half_width_95);
    }
    out << '\n';
  }
  return 0;
}

struct OptimizeOptions {
  std::optional<std::string> beta_list;
  double beta_from = 0.0, beta_to = 20.0, beta_step = 2.0;
  std::string method = "newton";
  bool frozen_tau = false;
  double grid_db = 0.1;
};

inline int cmd_optimize(const CommonOptions& o, const OptimizeOptions& p, std::ostream& out, std::ostream& err) {
  if (p.method != "newton" && p.method != "grid") throw ConfigError("--method must be newton or grid");
  const std::vector<double> betas = p.beta_list ? parse_list(*p.beta_list, "--beta-list")
                                               : range_inclusive(p.beta_from, p.beta_to, p.beta_step, "optimize");
  OptimizerOptions opts;
  opts.derivative = p.frozen_tau ? DerivativeMode::kFrozenTau : DerivativeMode::kFullPipeline;

  nlohmann::ordered_json reports = nlohmann::ordered_json::array();
  bool all_certified = true;
  for (double beta_db : betas) {
    CommonOptions ob = o;
    ob.beta_db = beta_db;
    const Resolved r = resolve(ob, kFigureDefaults);
    const OptimizerReport grid = grid_search_threshold(r.lambda, r.link, r.backoff, p.grid_db, opts.lower_dbm);
    const OptimizerReport rep =
        p.method == "grid" ? grid : optimize_threshold(r.lambda, r.link, r.backoff, SolverConfig{}, opts);
    const bool certified = std::fabs(rep.optimal_threshold_dbm - grid.optimal_threshold_dbm) <= p.grid_db + 1e-9;

    nlohmann::ordered_json j;
    j["beta_db"] = beta_db;
    j["method"] = to_string(rep.method);
    j["optimal_is_dbm"] = rep.optimal_threshold_dbm;
    j["optimal_is_watts"] = rep.optimal_threshold_watts;
    j["at_boundary"] = rep.at_boundary;
    j["outer_iterations"] = rep.outer_iterations;
    j["state"] = state_json(rep.converged_state);
    j["grid_is_dbm"] = grid.optimal_threshold_dbm;
    j["grid_eta"] = grid.converged_state.ase;
    j["certified"] = certified;
    try {
      const double nb = no_beb_optimal_threshold(r.lambda, r.link);
      j["no_beb_range_m"] = no_beb_optimal_range(r.link);
      j["no_beb_is_dbm"] = watts_to_dbm(nb);
      j["eta_at_no_beb"] = ase(r.lambda, r.link, r.backoff, nb).ase;
    } catch (const NumericalError& e) {
      j["no_beb_error"] = e.what();
    }
    nlohmann::ordered_json trace = nlohmann::ordered_json::array();
    for (const TraceEntry& t : rep.trace)
      trace.push_back({{"is_dbm", watts_to_dbm(t.threshold_watts)}, {"tau", t.tau}, {"eta", t.ase}});
    j["trace"] = trace;
    if (!certified) {
      all_certified = false;
      err << "optimize: beta=" << fmt(beta_db) << " dB optimum " << fmt(rep.optimal_threshold_dbm)
          << " dBm disagrees with grid " << fmt(grid.optimal_threshold_dbm) << " dBm; trace:\n"
          << trace.dump(2) << "\n";
    }
    reports.push_back(std::move(j));
  }
  out << reports.dump(2) << '\n';
  return all_certified ? 0 : 3;
}

struct MacOptions {
  std::uint64_t slots = 62'500;
  double warmup = 0.2;
  double region_m = 2000.0;
  double cutoff = 0.01;
};

inline int cmd_mac_sim(const CommonOptions& o, const MacOptions& mo, std::ostream& out, std::ostream& err) {
  const Resolved r = resolve(o, kTableDefaults);
  MacSimSettings s;
  s.slots = mo.slots;
  s.warmup_fraction = mo.warmup;
  s.region.side_m = mo.region_m;
  s.cutoff_fraction = mo.cutoff;
  s.seed = seed_or_draw(o, err);
  const MacSimStats st = run_mac_sim(r.lambda, r.link, r.backoff, r.is_watts, s);
  const ContentionState cs = solve_tau(r.lambda, r.link, r.backoff, r.is_watts);

  nlohmann::ordered_json j;
  j["lambda"] = r.lambda;
  j["is_dbm"] = r.is_dbm;
  j["seed"] = s.seed;
  j["nodes"] = st.nodes;
  j["slots"] = st.slots_run;
  j["warmup_slots"] = st.warmup_slots;
  j["attempts"] = st.attempts;
  j["collisions"] = st.collisions;
  j["tau_sim"] = st.tau_hat;
  j["p_c_sim"] = st.p_c_hat;
  j["p_b_sim"] = st.busy_hat;
  j["tau_analytic"] = cs.tau;
  j["p_c_analytic"] = cs.collision_prob;
  j["p_b_analytic"] = cs.busy_prob;
  out << j.dump(2) << '\n';
  return 0;
}

struct GeoOptions {
  std::uint64_t reps = 200;
  double region_m = 2000.0;
};

inline int cmd_geo_sim(const CommonOptions& o, const GeoOptions& go, std::ostream& out, std::ostream& err) {
  const Resolved r = resolve(o, kFigureDefaults);
  GeoSimSettings g;
  g.replications = go.reps;
  g.region.side_m = go.region_m;
  g.jobs = o.jobs;
  g.seed = seed_or_draw(o, err);
  const GeoEstimate e = estimate_success_and_ase(r.lambda, r.link, r.backoff, r.is_watts, g);
  const SpatialState s = ase(r.lambda, r.link, r.backoff, r.is_watts);

  const auto outcome = [](const SimOutcome& so) {
    return nlohmann::ordered_json{{"estimate", so.estimate}, {"ci95", so.half_width_95}};
  };
  nlohmann::ordered_json j;
  j["lambda"] = r.lambda;
  j["is_dbm"] = r.is_dbm;
  j["seed"] = g.seed;
  j["replications"] = g.replications;
  j["retained_total"] = e.retained_total;
  j["p_s"] = outcome(e.success_prob);
  j["lambda_t"] = outcome(e.active_density);
  j["eta"] = outcome(e.ase);
  j["analytic"] = state_json(s);
  out << j.dump(2) << '\n';
  return 0;
}

}  // namespace cli

/// Parses `args` (without the program name) and runs one command. Output goes
/// to `out` unless --out names a file; diagnostics go to `err`.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Carrier-sensing threshold analysis for CSMA/CA networks", "csense"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value file; command-line flags override it");

  cli::CommonOptions o;
  double lambda = 0, p_dbm = 0, is_dbm = 0, beta_db = 0, beta_c_db = 0, rt_m = 0, alpha = 0;
  int w0 = 0, m = 0;
  std::uint64_t seed = 0;
  auto* o_lambda = app.add_option("--lambda", lambda, "Node density, nodes/m^2");
  auto* o_p = app.add_option("--p-dbm", p_dbm, "Transmit power, dBm (default 30)");
  auto* o_is = app.add_option("--is-dbm", is_dbm, "Carrier-sensing threshold, dBm");
  auto* o_beta = app.add_option("--beta-db", beta_db, "Data target SIR, dB");
  auto* o_bc = app.add_option("--beta-c-db", beta_c_db, "Control target SIR, dB");
  auto* o_rt = app.add_option("--rt-m", rt_m, "Link distance, m (default 50)");
  auto* o_alpha = app.add_option("--alpha", alpha, "Path-loss exponent (default 4)");
  auto* o_w0 = app.add_option("--w0", w0, "Initial contention window");
  auto* o_m = app.add_option("--m", m, "Maximum backoff stage");
  auto* o_seed = app.add_option("--seed", seed, "Master seed; drawn and printed when omitted");
  app.add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", o.out, "Write output to this file instead of stdout");

  cli::TauTableOptions tt;
  auto* c_tau = app.add_subcommand("tau-table", "Access probability per (lambda, I_s, beta_c) cell");
  c_tau->add_flag("--skip-sim", tt.skip_sim, "Analytic column only");
  c_tau->add_option("--seeds", tt.seeds, "Simulation runs per cell");
  c_tau->add_option("--slots", tt.slots, "Slots per run, warm-up included");
  c_tau->add_option("--region-m", tt.region_m, "Torus side, m");
  c_tau->add_option("--max-nodes", tt.max_nodes, "Shrink the torus so a run holds about this many nodes (0: never)");

  cli::SweepOptions sw;
  auto* c_sweep = app.add_subcommand("ase-sweep", "ASE versus sensing threshold");
  c_sweep->add_option("--from", sw.from, "First threshold, dBm");
  c_sweep->add_option("--to", sw.to, "Last threshold, dBm");
  c_sweep->add_option("--step", sw.step, "Threshold step, dB");
  c_sweep->add_flag("--with-sim", sw.with_sim, "Add snapshot Monte Carlo columns");
  c_sweep->add_option("--reps", sw.reps, "Monte Carlo replications per point");
  c_sweep->add_option("--region-m", sw.region_m, "Torus side, m");

  cli::OptimizeOptions op;
  auto* c_opt = app.add_subcommand("optimize", "Optimal sensing threshold per target SIR");
  std::string beta_list;
  auto* o_beta_list = c_opt->add_option("--beta-list", beta_list, "Comma-separated target SIRs, dB");
  c_opt->add_option("--beta-from", op.beta_from, "First target SIR, dB");
  c_opt->add_option("--beta-to", op.beta_to, "Last target SIR, dB");
  c_opt->add_option("--beta-step", op.beta_step, "Target SIR step, dB");
  c_opt->add_option("--method", op.method, "newton or grid");
  c_opt->add_flag("--frozen-tau", op.frozen_tau, "Hold tau fixed inside derivative stencils");
  c_opt->add_option("--grid-db", op.grid_db, "Grid spacing of the certificate, dB");

  cli::MacOptions mo;
  auto* c_mac = app.add_subcommand("mac-sim", "One run of the slotted contention simulator");
  c_mac->add_option("--slots", mo.slots, "Slots, warm-up included");
  c_mac->add_option("--warmup", mo.warmup, "Warm-up fraction of the slots");
  c_mac->add_option("--region-m", mo.region_m, "Torus side, m");
  c_mac->add_option("--cutoff", mo.cutoff, "Interference cutoff as a fraction of the threshold");

  cli::GeoOptions go;
  auto* c_geo = app.add_subcommand("geo-sim", "Snapshot Monte Carlo of success probability and ASE");
  c_geo->add_option("--reps", go.reps, "Replications");
  c_geo->add_option("--region-m", go.region_m, "Torus side, m");

  for (auto* sub : {c_tau, c_sweep, c_opt, c_mac, c_geo}) sub->fallthrough();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "csense: " << e.what() << "\n";
    return 2;
  }

  const auto take = [](CLI::Option* opt, auto value, auto& slot) {
    if (opt->count() > 0) slot = value;
  };
  take(o_lambda, lambda, o.lambda);
  take(o_p, p_dbm, o.p_dbm);
  take(o_is, is_dbm, o.is_dbm);
  take(o_beta, beta_db, o.beta_db);
  take(o_bc, beta_c_db, o.beta_c_db);
  take(o_rt, rt_m, o.rt_m);
  take(o_alpha, alpha, o.alpha);
  take(o_w0, w0, o.w0);
  take(o_m, m, o.m);
  take(o_seed, seed, o.seed);
  take(o_beta_list, beta_list, op.beta_list);

  std::ofstream file;
  std::ostream* sink = &out;
  if (!o.out.empty()) {
    file.open(o.out, std::ios::binary);
    if (!file) {
      err << "csense: cannot open " << o.out << " for writing\n";
      return 2;
    }
    sink = &file;
  }

  try {
    if (*c_tau) return cli::cmd_tau_table(o, tt, *sink, err);
    if (*c_sweep) return cli::cmd_ase_sweep(o, sw, *sink, err);
    if (*c_opt) return cli::cmd_optimize(o, op, *sink, err);
    if (*c_mac) return cli::cmd_mac_sim(o, mo, *sink, err);
    if (*c_geo) return cli::cmd_geo_sim(o, go, *sink, err);
  } catch (const ConfigError& e) {
    err << "csense: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "csense: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace csense
