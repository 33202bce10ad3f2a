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

#include <stdexcept>
#include <string>

namespace csense {

// Bad user input: parameter out of range, malformed option. Maps to CLI exit 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Any failure of a numerical routine. Maps to CLI exit 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoBracket : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Divergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DegenerateDenominator : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ThresholdAbovePower : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InsufficientRetained : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class InsufficientNodes : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// The requested formula only holds for another path-loss exponent.
class UnsupportedAlpha : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class InvalidAlpha : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace csense
