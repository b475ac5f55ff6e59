// Copyright 2026 The critical-fronts Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace cfronts {

// Argument outside an operation's domain (site index, time, lengths, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SingularCouplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvariantViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(double time, double drift, const std::string& what)
      : std::runtime_error(what), time_(time), drift_(drift) {}
  double time() const noexcept { return time_; }
  double drift() const noexcept { return drift_; }

 private:
  double time_;
  double drift_;
};

class InvalidDecimation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class FitRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cfronts
