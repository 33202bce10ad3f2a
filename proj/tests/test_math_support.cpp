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

#include "csense/math_support.hpp"

using namespace csense;

TEST(Erf, ReferenceValue) { EXPECT_NEAR(csense::erf(1.0), 0.8427007929497149, 1e-14); }

TEST(Erf, EdgeValues) {
  EXPECT_EQ(csense::erf(0.0), 0.0);
  EXPECT_EQ(csense::erf(10.0), 1.0);
  EXPECT_EQ(csense::erf(-10.0), -1.0);
  EXPECT_TRUE(std::isnan(csense::erf(std::nan(""))));
}

TEST(Erf, AgreesWithLibm) {
  for (double x = -7.0; x <= 7.0; x += 0.01) EXPECT_NEAR(csense::erf(x), std::erf(x), 1e-14) << x;
}

TEST(Erf, OddAndMonotone) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  for (int i = 0; i < 10000; ++i) {
    const double a = u(gen), b = u(gen);
    EXPECT_EQ(csense::erf(-a), -csense::erf(a));
    if (a < b) EXPECT_LE(csense::erf(a), csense::erf(b));
    else EXPECT_GE(csense::erf(a), csense::erf(b));
  }
}

TEST(Newton, CosineFixedPoint) {
  const auto f = [](double x) { return x - std::cos(x); };
  const auto df = [](double x) { return 1.0 + std::sin(x); };
  const RootResult r = newton_safeguarded(f, df, 0.0, Bracket{0.0, 1.0}, SolverConfig{});
  EXPECT_NEAR(r.root, 0.7390851332151607, 1e-12);
  EXPECT_LE(r.iterations, 10);
}

TEST(Newton, FiniteDifferenceDerivative) {
  const auto f = [](double x) { return x * x - 2.0; };
  const RootResult r = newton_safeguarded(f, {}, 1.0, std::nullopt, SolverConfig{});
  EXPECT_NEAR(r.root, std::sqrt(2.0), 1e-10);
}

TEST(Newton, BisectionRescuesFlatStart) {
  // Zero slope at the start point forces a bisection step.
  const auto f = [](double x) { return x * x * x - 0.125; };
  const RootResult r = newton_safeguarded(f, {}, 0.0, Bracket{-1.0, 2.0}, SolverConfig{});
  EXPECT_NEAR(r.root, 0.5, 1e-10);
  EXPECT_GE(r.bisections, 1);
}

TEST(Newton, NoSignChangeIsNoBracket) {
  const auto f = [](double x) { return x * x + 1.0; };
  EXPECT_THROW(newton_safeguarded(f, {}, 0.0, Bracket{-1.0, 1.0}, SolverConfig{}), NoBracket);
}

TEST(Newton, VanishingSlopeWithoutBracket) {
  const auto f = [](double x) { return x * x + 1.0; };
  EXPECT_THROW(newton_safeguarded(f, {}, 0.0, std::nullopt, SolverConfig{}), NoBracket);
}

TEST(Newton, IterationCapIsNoConvergence) {
  SolverConfig cfg;
  cfg.max_iter = 3;
  const auto f = [](double x) { return std::atan(x); };
  EXPECT_THROW(newton_safeguarded(f, {}, 3.0, std::nullopt, cfg), NoConvergence);
}

TEST(SolverConfig, RejectsBadValues) {
  SolverConfig cfg;
  cfg.abs_tol = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.max_iter = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Integrate, RationalTail) {
  const auto g = [](double v) { return 4.0 * v / (4.0 + v * v * v * v); };
  EXPECT_NEAR(integrate_semi_infinite(g, 2.0), 0.4636476090008061, 1e-11);
}

TEST(Integrate, Exponential) {
  const auto g = [](double v) { return std::exp(-v); };
  EXPECT_NEAR(integrate_semi_infinite(g, 0.0), 1.0, 1e-11);
  EXPECT_NEAR(integrate_semi_infinite(g, 3.0), std::exp(-3.0), 1e-13);
}

TEST(Integrate, Gaussian) {
  const auto g = [](double v) { return std::exp(-v * v); };
  EXPECT_NEAR(integrate_semi_infinite(g, 0.0), std::sqrt(std::numbers::pi) / 2.0, 1e-11);
}

TEST(Integrate, PowerTail) {
  const auto g = [](double v) { return 1.0 / (v * v); };
  EXPECT_NEAR(integrate_semi_infinite(g, 5.0), 0.2, 1e-11);
}

TEST(Integrate, LargeScale) {
  // Mass concentrated near 1e4 needs the scale hint.
  const auto g = [](double v) { return 1.0 / (1e8 + v * v); };
  EXPECT_NEAR(integrate_semi_infinite(g, 0.0, 1e4), std::numbers::pi / 2.0 / 1e4, 1e-15);
}

TEST(Integrate, NonIntegrableTailDiverges) {
  const auto g = [](double v) { return 1.0 / v; };
  EXPECT_THROW(integrate_semi_infinite(g, 1.0), Divergence);
}

TEST(CentralDiff, Polynomial) {
  const auto f = [](double x) { return x * x * x; };
  EXPECT_NEAR(central_diff(f, 2.0, 1), 12.0, 1e-8);
  EXPECT_NEAR(central_diff(f, 2.0, 2), 12.0, 1e-3);
  EXPECT_THROW(central_diff(f, 2.0, 3), ConfigError);
}

TEST(GoldenSection, InteriorAndEndpoint) {
  EXPECT_NEAR(golden_section_max([](double x) { return -(x - 0.3) * (x - 0.3); }, 0.0, 1.0), 0.3, 1e-6);
  EXPECT_EQ(golden_section_max([](double x) { return x; }, 0.0, 1.0), 1.0);
}
