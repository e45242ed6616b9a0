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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qbsim/fitting.hpp"
#include "qbsim/model.hpp"
#include "qbsim/protocols.hpp"

namespace qbsim {

/// Named device presets: mechanism1, mechanism2, cavity1 ... cavity5.
std::optional<DeviceParams> device_preset(std::string_view name);
std::vector<std::string> device_preset_names();

/// Named rate presets: rates-default.
std::optional<RateParams> rate_preset(std::string_view name);

struct SweepConfig {
  std::string parameter = "omega_c0";
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  double probe_time_ns = 10.0;
};

struct FitConfig {
  std::string data;  ///< CSV path, relative to the working directory
  std::vector<std::string> free{"omega_c0", "j_d", "j_a"};
  bool free_exciton_energies = false;
  double j_t_lo = 1e-4;
  double j_t_hi = 2e-2;
  FeatureWeights weights;
  std::vector<std::string> devices{"cavity1", "cavity2", "cavity3", "cavity4", "cavity5"};
  std::size_t reference = 0;
};

struct OutputConfig {
  std::string directory = ".";
  int precision = 12;
};

struct RunConfig {
  std::string device_preset;  ///< empty when given field by field
  DeviceParams device;
  RateParams rates;
  double theta_deg = 0.0;
  int n_max = 2;
  HamiltonianKind hamiltonian = HamiltonianKind::JaynesCummings;
  std::vector<Phase> phases;  ///< empty: default charge/relax schedule
  std::optional<SweepConfig> sweep;
  FitConfig fit;
  OutputConfig output;
};

/// Defaults: no device, rates-default, theta 0, n_max 2.
RunConfig default_config();

/// Strict JSON: unknown keys are rejected with their path, malformed
/// documents report line and column. All failures carry Errc::Config.
RunConfig parse_config_text(std::string_view text, const std::string& source = "<config>");
RunConfig parse_config(const std::filesystem::path& path);

}  // namespace qbsim
