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

// Analytical model of a Poisson bipolar CSMA/CA network with binary
// exponential backoff: contention (collision, busy, access probability),
// carrier-sensing geometry, and area spectral efficiency.
//
// Units: watts and meters throughout, path loss d^-alpha with a 1 m reference.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "csense/error.hpp"
#include "csense/math_support.hpp"

namespace csense {

struct LinkBudget {
  double tx_power_watts = 1.0;      // P
  double link_distance_m = 50.0;    // r_t
  double path_loss_exp = 4.0;       // alpha
  double target_sir = 10.0;         // beta, linear
  double control_target_sir = 10.0; // beta_c, linear

  void validate() const {
    if (!(tx_power_watts > 0.0)) throw ConfigError("LinkBudget: transmit power must be > 0");
    if (!(link_distance_m > 0.0)) throw ConfigError("LinkBudget: link distance must be > 0");
    if (!(path_loss_exp > 2.0))
      throw InvalidAlpha("LinkBudget: path-loss exponent must be > 2 (got " + std::to_string(path_loss_exp) + ")");
    if (!(target_sir > 0.0)) throw ConfigError("LinkBudget: target SIR must be > 0");
    if (!(control_target_sir > 0.0)) throw ConfigError("LinkBudget: control target SIR must be > 0");
  }

  /// Mean received signal power at the intended receiver, r_t^-alpha * P.
  double received_power() const { return std::pow(link_distance_m, -path_loss_exp) * tx_power_watts; }
};

struct BackoffParams {
  int initial_window = 32;  // W0
  int max_stage = 5;        // m

  void validate() const {
    if (initial_window < 1) throw ConfigError("BackoffParams: initial window must be >= 1");
    if (max_stage < 0) throw ConfigError("BackoffParams: max stage must be >= 0");
  }
};

struct ContentionState {
  double tau = 0.0;
  double busy_prob = 0.0;
  double collision_prob = 0.0;
  int iterations = 0;
};

struct SpatialState {
  double sense_threshold_watts = 0.0;
  double sense_range_m = 0.0;
  double active_density = 0.0;
  double success_prob = 0.0;
  double ase = 0.0;
  ContentionState contention;
};

namespace detail {

inline void require_alpha4(const LinkBudget& link, const char* op) {
  if (link.path_loss_exp != 4.0)
    throw UnsupportedAlpha(std::string(op) + ": closed form holds only for path-loss exponent 4 (got " +
                           std::to_string(link.path_loss_exp) + ")");
}

}  // namespace detail

/// Collision probability of control messages among contenders of density
/// density*tau (RTS/CTS SIR below beta_c).
inline double collision_prob(double density, double tau, const LinkBudget& link) {
  const double a = link.path_loss_exp;
  if (!(a > 2.0)) throw InvalidAlpha("collision_prob: path-loss exponent must be > 2, got " + std::to_string(a));
  const double s = std::sin(2.0 * std::numbers::pi / a);
  const double r = link.link_distance_m;
  const double k = 2.0 * std::numbers::pi * std::numbers::pi / (a * s);
  return -std::expm1(-density * tau * r * r * std::pow(link.control_target_sir, 2.0 / a) * k);
}

/// Probability that Rayleigh-faded PPP interference at density*tau reaches the
/// sensing threshold. Closed form valid only for alpha = 4.
inline double busy_prob(double density, double tau, const LinkBudget& link, double threshold_watts) {
  detail::require_alpha4(link, "busy_prob");
  if (!(threshold_watts > 0.0)) throw ConfigError("busy_prob: sensing threshold must be > 0");
  constexpr double kPi2 = std::numbers::pi * std::numbers::pi;
  return csense::erf(kPi2 * density * tau / 4.0 * std::sqrt(link.tx_power_watts / threshold_watts));
}

/// Per-slot access probability under binary exponential backoff given the
/// busy and collision probabilities (right-hand side of the fixed point).
///
/// Numerator and denominator share the factor (1 - 2 p_c); it is cancelled
/// using (1 - u^m) = (1 - u) * sum_{k<m} u^k with u = 2 p_c, which leaves the
/// value unchanged everywhere else and removes the 0/0 at p_c = 1/2.
inline double backoff_access_prob(double busy, double coll, const BackoffParams& backoff) {
  const double w0 = backoff.initial_window;
  const int m = backoff.max_stage;
  const double u = 2.0 * coll;
  double geometric = 0.0;  // sum_{k=0}^{m-1} u^k
  double u_pow = 1.0;
  for (int k = 0; k < m; ++k) {
    geometric += u_pow;
    u_pow *= u;
  }
  // u_pow == u^m here.
  const double denom = 1.0 - 2.0 * busy + w0 * u_pow + w0 * (1.0 - coll) * geometric;
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "backoff_access_prob: degenerate denominator " << denom << " (p_b=" << busy << ", p_c=" << coll
        << ", W0=" << backoff.initial_window << ", m=" << m << ")";
    throw DegenerateDenominator(msg.str());
  }
  return 2.0 * (1.0 - busy) / denom;
}

/// Composite access map tau -> h(tau): busy and collision probabilities are
/// re-evaluated at the given tau before applying the backoff formula.
inline double access_map(double tau, double density, const LinkBudget& link, const BackoffParams& backoff,
                         double threshold_watts) {
  return backoff_access_prob(busy_prob(density, tau, link, threshold_watts), collision_prob(density, tau, link),
                             backoff);
}

/// Solves tau = h(tau) with Newton's method started at tau = 0, derivative by
/// central differences with a step proportional to tau, bisection on [0, 1] as
/// the safeguard.
inline ContentionState solve_tau(double density, const LinkBudget& link, const BackoffParams& backoff,
                                 double threshold_watts, const SolverConfig& cfg = {}) {
  link.validate();
  backoff.validate();
  if (!(density >= 0.0)) throw ConfigError("solve_tau: density must be >= 0");
  const auto residual = [&](double t) { return t - access_map(t, density, link, backoff, threshold_watts); };
  // Step relative to tau itself: tau is often 1e-5 or less, far below the
  // unit floor of central_diff.
  const auto slope = [&](double t) {
    const double h = cfg.fd_step_rel * std::max(std::fabs(t), 1e-9);
    return (residual(t + h) - residual(t - h)) / (2.0 * h);
  };
  const RootResult r = newton_safeguarded(residual, slope, 0.0, Bracket{0.0, 1.0}, cfg);
  ContentionState out;
  out.tau = r.root;
  out.busy_prob = busy_prob(density, r.root, link, threshold_watts);
  out.collision_prob = collision_prob(density, r.root, link);
  out.iterations = r.iterations;
  return out;
}

/// Mean carrier-sensing range for threshold I_s.
///
/// With D_i = ((i+1) P / I_s)^(1/alpha) and F(a, b) the probability mass of the
/// nearest-contender distance density 2 c r exp(-c r^2), c = pi*density*tau, on
/// [a, b]:
///   R_s = D5 F(0, D0) + sum_{i=1..5} D_{5-i} F(D_{i-1}, D_i) + D0 F(D5, inf).
inline double sensing_range(double density, double tau, double tx_power_watts, double threshold_watts,
                            double path_loss_exp) {
  if (!(threshold_watts > 0.0)) throw ConfigError("sensing_range: sensing threshold must be > 0");
  if (threshold_watts >= tx_power_watts)
    throw ThresholdAbovePower("sensing_range: threshold must be below the transmit power (D_0 < 1 m)");
  std::array<double, 6> d{};
  for (int i = 0; i < 6; ++i) d[i] = std::pow((i + 1) * tx_power_watts / threshold_watts, 1.0 / path_loss_exp);

  const double c = std::numbers::pi * density * tau;
  // exp(-c a^2) - exp(-c b^2), written to keep precision when c is tiny.
  const auto mass = [c](double a, double b) { return -std::exp(-c * a * a) * std::expm1(-c * (b * b - a * a)); };

  double r = d[5] * mass(0.0, d[0]);
  for (int i = 1; i <= 5; ++i) r += d[5 - i] * mass(d[i - 1], d[i]);
  r += d[0] * std::exp(-c * d[5] * d[5]);
  return r;
}

/// Retained density of a Matern type-II thinning of a PPP(density*tau) with
/// exclusion radius R_s.
inline double active_density(double density, double tau, double sense_range_m) {
  if (!(sense_range_m > 0.0)) throw ConfigError("active_density: sensing range must be > 0");
  const double area = std::numbers::pi * sense_range_m * sense_range_m;
  const double x = density * tau * area;
  if (x == 0.0) return 0.0;
  return -std::expm1(-x) / area;
}

/// Exponent of the closed-form success probability (alpha = 4):
/// pi * lambda_t * sqrt(beta) * r_t^2 * atan(sqrt(beta) r_t^2 / R_s^2).
inline double success_exponent_closed(double active_density_m2, const LinkBudget& link, double sense_range_m) {
  detail::require_alpha4(link, "success_prob_closed");
  const double sb = std::sqrt(link.target_sir);
  const double rt2 = link.link_distance_m * link.link_distance_m;
  return std::numbers::pi * active_density_m2 * sb * rt2 * std::atan(sb * rt2 / (sense_range_m * sense_range_m));
}

inline double success_prob_closed(double active_density_m2, const LinkBudget& link, double sense_range_m) {
  return std::exp(-success_exponent_closed(active_density_m2, link, sense_range_m));
}

/// Exponent 2 pi lambda_t int_{R_s}^inf beta v / (beta + (v/r_t)^alpha) dv for
/// any alpha > 2, by quadrature.
inline double success_exponent_general(double active_density_m2, const LinkBudget& link, double sense_range_m) {
  if (!(link.path_loss_exp > 2.0)) throw InvalidAlpha("success_prob_general: alpha must be > 2");
  const double beta = link.target_sir;
  const double rt = link.link_distance_m;
  const double a = link.path_loss_exp;
  const auto integrand = [&](double v) { return beta * v / (beta + std::pow(v / rt, a)); };
  const double scale = std::max(sense_range_m, rt * std::pow(beta, 1.0 / a));
  return 2.0 * std::numbers::pi * active_density_m2 * integrate_semi_infinite(integrand, sense_range_m, scale);
}

inline double success_prob_general(double active_density_m2, const LinkBudget& link, double sense_range_m) {
  return std::exp(-success_exponent_general(active_density_m2, link, sense_range_m));
}

/// Full analytic chain at one sensing threshold: tau, R_s, lambda_t, p_s, eta.
inline SpatialState ase(double density, const LinkBudget& link, const BackoffParams& backoff,
                        double threshold_watts, const SolverConfig& cfg = {}) {
  SpatialState s;
  s.sense_threshold_watts = threshold_watts;
  s.contention = solve_tau(density, link, backoff, threshold_watts, cfg);
  const double tau = s.contention.tau;
  s.sense_range_m = sensing_range(density, tau, link.tx_power_watts, threshold_watts, link.path_loss_exp);
  s.active_density = active_density(density, tau, s.sense_range_m);
  s.success_prob = link.path_loss_exp == 4.0 ? success_prob_closed(s.active_density, link, s.sense_range_m)
                                             : success_prob_general(s.active_density, link, s.sense_range_m);
  s.ase = s.active_density * std::log2(1.0 + link.target_sir) * s.success_prob;
  return s;
}

/// Same chain with tau held fixed (no fixed-point solve).
inline SpatialState ase_at_tau(double density, double tau, const LinkBudget& link, double threshold_watts) {
  SpatialState s;
  s.sense_threshold_watts = threshold_watts;
  s.contention.tau = tau;
  s.contention.busy_prob = link.path_loss_exp == 4.0 ? busy_prob(density, tau, link, threshold_watts)
                                                          : std::numeric_limits<double>::quiet_NaN();
  s.contention.collision_prob = collision_prob(density, tau, link);
  s.sense_range_m = sensing_range(density, tau, link.tx_power_watts, threshold_watts, link.path_loss_exp);
  s.active_density = active_density(density, tau, s.sense_range_m);
  s.success_prob = link.path_loss_exp == 4.0 ? success_prob_closed(s.active_density, link, s.sense_range_m)
                                             : success_prob_general(s.active_density, link, s.sense_range_m);
  s.ase = s.active_density * std::log2(1.0 + link.target_sir) * s.success_prob;
  return s;
}

}  // namespace csense
