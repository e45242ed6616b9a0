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

#include <array>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "qbsim/dynamics.hpp"
#include "qbsim/fitting.hpp"
#include "qbsim/observables.hpp"
#include "qbsim/polaritons.hpp"
#include "qbsim/protocols.hpp"

namespace qbsim {

/// Significant digits for CSV floats; values below 9 are rejected.
inline constexpr int kDefaultCsvPrecision = 12;

/// Header plus rows of raw fields. Comma separated, no quoting.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

/// Strict reader: every row must have as many fields as the header.
/// Errors carry Errc::Config and the offending line number.
CsvTable read_csv(std::istream& in);

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, int precision = kDefaultCsvPrecision);
void write_sweep_csv(std::ostream& out, const SweepResult& sweep, int precision = kDefaultCsvPrecision);

struct BranchRow {
  double theta_deg = 0.0;
  std::array<PolaritonBranch, 4> branches;
};

void write_branches_csv(std::ostream& out, const std::vector<BranchRow>& rows, int precision = kDefaultCsvPrecision);
void write_fit_csv(std::ostream& out, const FitResult& fit, int precision = kDefaultCsvPrecision);

void write_dispersion_csv(std::ostream& out, const DispersionData& data, int precision = kDefaultCsvPrecision);
DispersionData read_dispersion_csv(std::istream& in);

void write_feature_csv(std::ostream& out, const FeatureTable& table, int precision = kDefaultCsvPrecision);
FeatureTable read_feature_csv(std::istream& in);

/// Parses a float field; Errc::Config on anything that is not a full number.
double parse_double(const std::string& field, const std::string& context);

}  // namespace qbsim
