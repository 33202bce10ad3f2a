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

// Carrier-sensing threshold optimization: nested Newton iteration (outer on the
// threshold, inner on the access probability), an exhaustive grid oracle, and
// the closed-form optimum of the high-density model without backoff.

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "csense/analytic_model.hpp"
#include "csense/math_support.hpp"
#include "csense/units.hpp"

namespace csense {

enum class DerivativeMode {
  kFullPipeline,  // tau re-solved at every perturbed threshold
  kFrozenTau,     // tau held at the value solved for the current iterate
};

enum class OptimizerMethod { kNewton, kGoldenSection, kGrid };

inline const char* to_string(OptimizerMethod m) {
  switch (m) {
    case OptimizerMethod::kNewton: return "newton";
    case OptimizerMethod::kGoldenSection: return "golden-section";
    case OptimizerMethod::kGrid: return "grid";
  }
  return "?";
}

struct TraceEntry {
  double threshold_watts;
  double tau;
  double ase;
};

struct OptimizerReport {
  double optimal_threshold_watts = 0.0;
  double optimal_threshold_dbm = 0.0;
  SpatialState converged_state;
  int outer_iterations = 0;
  std::vector<TraceEntry> trace;
  OptimizerMethod method = OptimizerMethod::kNewton;
  bool at_boundary = false;
};

struct OptimizerOptions {
  DerivativeMode derivative = DerivativeMode::kFullPipeline;
  double lower_dbm = -90.0;  // lower end of the admissible threshold range
};

/// Largest admissible sensing threshold, the mean received signal power r_t^-alpha P.
inline double threshold_upper_bound(const LinkBudget& link) { return link.received_power(); }

namespace detail {

// Configuration for tau solves inside derivative stencils: Newton is run to
// full double precision so that second differences of eta stay clean.
inline SolverConfig inner_config(const SolverConfig& cfg) {
  SolverConfig inner = cfg;
  inner.abs_tol = std::min(cfg.abs_tol, 1e-15);
  inner.rel_tol = std::min(cfg.rel_tol, 1e-14);
  inner.max_iter = std::max(cfg.max_iter, 200);
  return inner;
}

}  // namespace detail

/// Optimal threshold by Newton iteration on d(eta)/d(log10 I_s).
///
/// Starts at I_s = 1e-3 r_t^-alpha P. Each outer step solves tau at the current
/// threshold, evaluates eta, and moves by -eta'/eta''. Derivatives are central
/// differences in log10(I_s). If eta' does not change sign on the admissible
/// range (boundary maximum) or Newton fails, golden-section search over the
/// same range produces the answer and `method` records it.
inline OptimizerReport optimize_threshold(double density, const LinkBudget& link, const BackoffParams& backoff,
                                          const SolverConfig& cfg = {}, const OptimizerOptions& opts = {}) {
  link.validate();
  backoff.validate();
  cfg.validate();
  if (!(density > 0.0)) throw ConfigError("optimize_threshold: density must be > 0");

  const SolverConfig inner = detail::inner_config(cfg);
  const double hi = std::log10(threshold_upper_bound(link));
  const double lo = std::log10(dbm_to_watts(opts.lower_dbm));
  if (!(lo < hi)) throw ConfigError("optimize_threshold: empty admissible threshold range");
  const double x0 = std::log10(1e-3 * threshold_upper_bound(link));

  const auto eta_full = [&](double x) { return ase(density, link, backoff, std::pow(10.0, x), inner).ase; };

  OptimizerReport report;
  double frozen_tau = 0.0;
  const auto eta = [&](double x) {
    if (opts.derivative == DerivativeMode::kFrozenTau)
      return ase_at_tau(density, frozen_tau, link, std::pow(10.0, x)).ase;
    return eta_full(x);
  };
  const auto refresh_tau = [&](double x) {
    if (opts.derivative == DerivativeMode::kFrozenTau)
      frozen_tau = solve_tau(density, link, backoff, std::pow(10.0, x), inner).tau;
  };
  const auto d1 = [&](double x) {
    refresh_tau(x);
    return central_diff(eta, x, 1, cfg.fd_step_rel);
  };
  const auto d2 = [&](double x) {
    refresh_tau(x);
    return central_diff(eta, x, 2, cfg.fd_step_rel);
  };

  const auto record = [&](double x) {
    const SpatialState s = ase(density, link, backoff, std::pow(10.0, x), inner);
    report.trace.push_back({s.sense_threshold_watts, s.contention.tau, s.ase});
  };

  // Successive-iterate test only: eta' has the units of eta, so an absolute
  // residual tolerance on it would be meaningless.
  SolverConfig outer = cfg;
  outer.abs_tol = std::numeric_limits<double>::min();

  double x_star = x0;
  bool newton_ok = false;
  const double dlo = d1(lo), dhi = d1(hi);
  if (dlo > 0.0 && dhi < 0.0) {
    try {
      const RootResult r = newton_safeguarded(d1, d2, x0, Bracket{lo, hi}, outer, record);
      x_star = r.root;
      report.outer_iterations = r.iterations;
      newton_ok = true;
    } catch (const NumericalError&) {
      newton_ok = false;
    }
  }
  if (newton_ok) {
    report.method = OptimizerMethod::kNewton;
  } else {
    report.method = OptimizerMethod::kGoldenSection;
    x_star = golden_section_max(eta_full, lo, hi, cfg.rel_tol);
  }

  const double span = hi - lo;
  report.at_boundary = std::fabs(x_star - lo) <= 1e-6 * span || std::fabs(x_star - hi) <= 1e-6 * span;
  report.optimal_threshold_watts = std::pow(10.0, x_star);
  report.optimal_threshold_dbm = watts_to_dbm(report.optimal_threshold_watts);
  report.converged_state = ase(density, link, backoff, report.optimal_threshold_watts, inner);
  return report;
}

/// Exhaustive search over thresholds spaced grid_db apart, from lower_dbm up to
/// (excluding) r_t^-alpha P.
inline OptimizerReport grid_search_threshold(double density, const LinkBudget& link, const BackoffParams& backoff,
                                             double grid_db = 0.1, double lower_dbm = -90.0,
                                             const SolverConfig& cfg = {}) {
  if (!(grid_db > 0.0)) throw ConfigError("grid_search_threshold: grid step must be > 0");
  link.validate();
  backoff.validate();
  const double upper_dbm = watts_to_dbm(threshold_upper_bound(link));
  OptimizerReport report;
  report.method = OptimizerMethod::kGrid;
  bool found = false;
  long best_k = 0, count = 0;
  for (long k = 0;; ++k) {
    const double dbm = lower_dbm + k * grid_db;
    if (dbm >= upper_dbm) break;
    const SpatialState s = ase(density, link, backoff, dbm_to_watts(dbm), cfg);
    ++count;
    if (!found || s.ase > report.converged_state.ase) {
      report.converged_state = s;
      best_k = k;
      found = true;
    }
  }
  if (!found) throw ConfigError("grid_search_threshold: empty grid");
  report.optimal_threshold_dbm = lower_dbm + best_k * grid_db;
  report.optimal_threshold_watts = dbm_to_watts(report.optimal_threshold_dbm);
  report.at_boundary = best_k == 0 || best_k == count - 1;
  return report;
}

/// Optimal sensing range of the high-density model without backoff,
/// ((1 + sqrt 5)/2 * beta)^(1/4) * r_t.
inline double no_beb_optimal_range(const LinkBudget& link) {
  detail::require_alpha4(link, "no_beb_optimal_range");
  const double golden = 0.5 * (1.0 + std::sqrt(5.0));
  return std::pow(golden * link.target_sir, 0.25) * link.link_distance_m;
}

/// Threshold whose mean sensing range (with tau = 1, i.e. every node contends)
/// equals no_beb_optimal_range. R_s is strictly decreasing in I_s and lies in
/// [D_0, D_5], so the root lies in [P / R*^4, 6 P / R*^4]. The bracket is
/// widened by 0.1% on each side: in the dense limit R_s equals D_5 to rounding
/// and the root sits on the upper end.
inline double no_beb_optimal_threshold(double density, const LinkBudget& link, const SolverConfig& cfg = {}) {
  link.validate();
  const double r_star = no_beb_optimal_range(link);
  const double p = link.tx_power_watts;
  const double r4 = std::pow(r_star, 4.0);
  const double lo = std::log10(p / r4 / 1.001);
  double hi = std::log10(6.0 * 1.001 * p / r4);
  // Thresholds at or above P are outside the sensing-range model.
  hi = std::min(hi, std::log10(p) - 1e-12);
  const auto f = [&](double x) {
    return sensing_range(density, 1.0, p, std::pow(10.0, x), link.path_loss_exp) - r_star;
  };
  if (!(lo < hi)) throw NoBracket("no_beb_optimal_threshold: optimal range unattainable below the transmit power");
  const double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return std::pow(10.0, lo);
  if (fhi == 0.0) return std::pow(10.0, hi);
  if (std::signbit(flo) == std::signbit(fhi))
    throw NoBracket("no_beb_optimal_threshold: optimal range " + std::to_string(r_star) +
                    " m outside the attainable [D_0, D_5] range");
  SolverConfig c = cfg;
  c.abs_tol = std::min(cfg.abs_tol, 1e-12 * r_star);
  const RootResult r = newton_safeguarded(f, {}, 0.5 * (lo + hi), Bracket{lo, hi}, c);
  return std::pow(10.0, r.root);
}

/// Local-maximum certificate: eta at the optimum is not below eta one grid
/// step (in dB) to either side that lies inside the admissible range.
inline bool certify_local_max(double density, const LinkBudget& link, const BackoffParams& backoff,
                              const OptimizerReport& report, double step_db = 0.1, double lower_dbm = -90.0) {
  const double upper_dbm = watts_to_dbm(threshold_upper_bound(link));
  const double at = report.optimal_threshold_dbm;
  const double eta = report.converged_state.ase;
  for (double n : {at - step_db, at + step_db}) {
    if (n < lower_dbm || n >= upper_dbm) continue;
    if (ase(density, link, backoff, dbm_to_watts(n)).ase > eta) return false;
  }
  return true;
}

}  // namespace csense
