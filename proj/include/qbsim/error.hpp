// Copyright 2026 The qbsim Authors
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

namespace qbsim {

enum class Errc {
  InvalidCutoff,
  InvalidLevel,
  DimensionMismatch,
  DomainError,
  InvalidRate,
  InvalidState,
  NumericalFailure,
  NonUniqueSteadyState,
  PreconditionViolation,
  AmbiguousLabeling,
  ResonanceNotBracketed,
  FitDomain,
  InsufficientData,
  IncompleteScenario,
  Underdetermined,
  NonFiniteObjective,
  Config,
};

const char* to_string(Errc code);

/// Library-wide exception. The code lets callers (the CLI in particular)
/// map failures onto exit statuses without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  Errc code() const noexcept { return code_; }
  /// Message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace qbsim
