// Copyright 2026 The Adiabatic PMP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace adiabatic {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a chart or formula is evaluated at a coordinate singularity
/// (sin(theta) below the pole guard, division by a vanishing momentum...).
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument outside the domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Failure of the ODE integrator; carries the time at which it happened.
class IntegrationError : public Error {
 public:
  IntegrationError(double time, const std::string& what)
      : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Scenario configuration rejected; line is 1-based, 0 when unknown.
class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace adiabatic
