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

// Scalar numerical primitives used by the analytic model and the optimizer.
// Everything here is pure and stateless.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>

#include "csense/error.hpp"

namespace csense {

struct SolverConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-9;
  int max_iter = 100;
  double fd_step_rel = 1e-5;

  void validate() const {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || !(fd_step_rel > 0.0))
      throw ConfigError("SolverConfig: tolerances must be strictly positive");
    if (max_iter < 1) throw ConfigError("SolverConfig: max_iter must be >= 1");
  }
};

using ScalarFn = std::function<double(double)>;

/// Error function, accurate to ~1e-15 relative on the whole real line.
///
/// |x| < 3 uses the everywhere-positive series
///   erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n (2x^2)^n x / (1*3*...*(2n+1)).
/// 3 <= |x| < 6 uses 1 - erfc(x) with erfc from its continued fraction
///   erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))),
/// evaluated by the modified Lentz method. Beyond 6 the result is +-1
/// (erfc(6) ~ 2e-17). Odd symmetry is exact because only |x| is evaluated.
inline double erf(double x) {
  if (std::isnan(x)) return x;
  const double ax = std::fabs(x);
  double result;
  if (ax >= 6.0) {
    result = 1.0;
  } else if (ax >= 3.0) {
    constexpr double kTiny = 1e-300;
    double f = ax, c = ax, d = 0.0;
    for (int n = 1; n < 500; ++n) {
      const double an = 0.5 * n;
      d = ax + an * d;
      d = d == 0.0 ? kTiny : 1.0 / d;
      c = ax + an / c;
      if (c == 0.0) c = kTiny;
      const double delta = c * d;
      f *= delta;
      if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    result = 1.0 - std::exp(-ax * ax) / (std::sqrt(std::numbers::pi) * f);
  } else {
    const double two_x2 = 2.0 * ax * ax;
    double term = ax;
    double sum = ax;
    for (int n = 1; n < 400; ++n) {
      term *= two_x2 / (2.0 * n + 1.0);
      sum += term;
      if (term < sum * 1e-17) break;
    }
    result = 2.0 / std::sqrt(std::numbers::pi) * std::exp(-ax * ax) * sum;
    if (result > 1.0) result = 1.0;
  }
  return x < 0.0 ? -result : result;
}

/// Central finite difference of order 1 or 2 with step h = h_rel * max(|x|, 1).
inline double central_diff(const ScalarFn& f, double x, int order, double h_rel = 1e-5) {
  const double h = h_rel * std::max(std::fabs(x), 1.0);
  if (order == 1) return (f(x + h) - f(x - h)) / (2.0 * h);
  if (order == 2) return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
  throw ConfigError("central_diff: order must be 1 or 2");
}

struct Bracket {
  double lo;
  double hi;
};

struct RootResult {
  double root = 0.0;
  int iterations = 0;
  int bisections = 0;
};

/// Newton's method with a bisection safeguard.
///
/// `df` may be empty, in which case the derivative is a central difference with
/// step cfg.fd_step_rel. When a bracket is given, any Newton step that leaves it
/// (or a derivative smaller than 1e-14 in magnitude) is replaced by bisection.
/// Without a bracket a vanishing derivative raises NoBracket. `on_iterate` sees
/// every point at which f is evaluated as an iterate.
inline RootResult newton_safeguarded(const ScalarFn& f, const ScalarFn& df, double x0,
                                     std::optional<Bracket> bracket, const SolverConfig& cfg,
                                     const std::function<void(double)>& on_iterate = {}) {
  cfg.validate();
  constexpr double kMinSlope = 1e-14;
  RootResult out;

  double lo = 0.0, hi = 0.0, flo = 0.0;
  if (bracket) {
    lo = std::min(bracket->lo, bracket->hi);
    hi = std::max(bracket->lo, bracket->hi);
    flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return {lo, 0, 0};
    if (fhi == 0.0) return {hi, 0, 0};
    if (std::signbit(flo) == std::signbit(fhi) || !std::isfinite(flo) || !std::isfinite(fhi))
      throw NoBracket("newton_safeguarded: f does not change sign on [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");
    x0 = std::clamp(x0, lo, hi);
  }

  double x = x0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    out.iterations = it;
    if (on_iterate) on_iterate(x);
    const double fx = f(x);
    if (fx == 0.0) {
      out.root = x;
      return out;
    }
    if (!std::isfinite(fx)) throw NoConvergence("newton_safeguarded: f is not finite at x=" + std::to_string(x));
    if (bracket) {
      if (std::signbit(fx) == std::signbit(flo)) {
        lo = x;
        flo = fx;
      } else {
        hi = x;
      }
    }

    const double d = df ? df(x) : central_diff(f, x, 1, cfg.fd_step_rel);
    const bool slope_ok = std::isfinite(d) && std::fabs(d) >= kMinSlope;
    double next = slope_ok ? x - fx / d : std::numeric_limits<double>::quiet_NaN();
    bool bisected = false;
    if (bracket) {
      if (!slope_ok || !(next > lo && next < hi)) {
        next = 0.5 * (lo + hi);
        bisected = true;
        ++out.bisections;
      }
    } else if (!slope_ok) {
      throw NoBracket("newton_safeguarded: derivative vanished at x=" + std::to_string(x) +
                      " and no bracket was supplied");
    }

    const bool small_residual = std::fabs(fx) <= cfg.abs_tol;
    const bool small_step = std::fabs(next - x) <= cfg.rel_tol * std::fabs(next);
    if (small_residual || small_step) {
      // A bisection midpoint is not a refinement of x, so keep x in that case.
      out.root = (bisected && small_residual) ? x : next;
      return out;
    }
    if (bracket && (hi - lo) <= cfg.rel_tol * std::max(std::fabs(lo), std::fabs(hi))) {
      out.root = 0.5 * (lo + hi);
      return out;
    }
    x = next;
  }
  throw NoConvergence("newton_safeguarded: no convergence after " + std::to_string(cfg.max_iter) +
                      " iterations (last x=" + std::to_string(x) + ")");
}

namespace detail {

struct SimpsonState {
  const std::function<double(double)>* f;
  int evaluations = 0;
  int max_evaluations = 2'000'000;
  bool exhausted = false;
  double magnitude = 0.0;  // size of the coarse estimate
};

inline double adaptive_simpson(SimpsonState& st, double a, double b, double fa, double fm, double fb,
                               double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = (*st.f)(lm);
  const double frm = (*st.f)(rm);
  st.evaluations += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  // Panels this narrow only arise next to t = 1 or a singularity. A bounded
  // jump leaves a negligible delta there; an integrable-looking but divergent
  // spike keeps delta at the size of the integral itself.
  const bool unresolved = (b - a) < 1e-13 && std::fabs(delta) > 1e-3 * st.magnitude;
  if (depth <= 0 || st.evaluations > st.max_evaluations || unresolved) {
    st.exhausted = true;
    return left + right + delta / 15.0;
  }
  return adaptive_simpson(st, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(st, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Integral of g over [a, inf).
///
/// Maps v = a + scale * t / (1 - t) onto t in [0, 1) and runs adaptive Simpson
/// on 32 initial panels. `scale` <= 0 picks max(|a|, 1). Throws Divergence if the
/// refinement cannot meet the tolerance (non-integrable tail, singularity).
inline double integrate_semi_infinite(const ScalarFn& g, double a, double scale = 0.0,
                                      double rel_tol = 1e-11) {
  if (!(scale > 0.0)) scale = std::max(std::fabs(a), 1.0);
  const std::function<double(double)> mapped = [&](double t) {
    if (t >= 1.0) return 0.0;
    const double one_minus = 1.0 - t;
    const double v = a + scale * t / one_minus;
    const double val = g(v) * scale / (one_minus * one_minus);
    return std::isfinite(val) ? val : 0.0;
  };

  constexpr int kPanels = 32;
  detail::SimpsonState st{&mapped};
  double coarse = 0.0;
  double panel_f[2 * kPanels + 1];
  for (int i = 0; i <= 2 * kPanels; ++i) panel_f[i] = mapped(static_cast<double>(i) / (2 * kPanels));
  const double h = 1.0 / kPanels;
  for (int p = 0; p < kPanels; ++p)
    coarse += h / 6.0 * (panel_f[2 * p] + 4.0 * panel_f[2 * p + 1] + panel_f[2 * p + 2]);
  if (!std::isfinite(coarse)) throw Divergence("integrate_semi_infinite: integrand not finite");

  st.magnitude = std::fabs(coarse);
  const double tol = rel_tol * std::max(std::fabs(coarse), 1e-300) / kPanels;
  double total = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    const double pa = p * h, pb = (p + 1) * h;
    const double whole = h / 6.0 * (panel_f[2 * p] + 4.0 * panel_f[2 * p + 1] + panel_f[2 * p + 2]);
    total += detail::adaptive_simpson(st, pa, pb, panel_f[2 * p], panel_f[2 * p + 1], panel_f[2 * p + 2],
                                      whole, tol, 50);
  }
  if (st.exhausted || !std::isfinite(total))
    throw Divergence("integrate_semi_infinite: estimate did not stabilize under subdivision");
  return total;
}

/// Maximizer of a unimodal f on [lo, hi] by golden-section search.
inline double golden_section_max(const ScalarFn& f, double lo, double hi, double tol = 1e-10,
                                 int max_iter = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iter && (b - a) > tol * std::max(1.0, std::fabs(a) + std::fabs(b)); ++i) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  // Endpoints are candidates too; golden section alone never lands on them.
  double best = 0.5 * (a + b);
  double fbest = f(best);
  for (double cand : {lo, hi}) {
    const double fv = f(cand);
    if (fv > fbest) {
      best = cand;
      fbest = fv;
    }
  }
  return best;
}

}  // namespace csense
