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
#include <span>
#include <string>
#include <vector>

#include "qbsim/dynamics.hpp"
#include "qbsim/model.hpp"
#include "qbsim/observables.hpp"

namespace qbsim {

enum class Sampling { Log, Linear };

/// One segment of a schedule. Samples are taken at offsets in (0, duration]
/// and always include the phase end.
struct Phase {
  double duration = 0.0;  ///< ns
  bool pump = true;
  bool cavity_open = false;  ///< J_D = J_A = J_T = 0, rates kept
  Sampling sampling = Sampling::Log;
  int points = 60;
  double first = 1e-3;  ///< first log-grid offset, ns
};

struct Scenario {
  DeviceParams device;
  RateParams rates;
  double theta = 0.0;  ///< degrees
  int n_max = 2;
  HamiltonianKind hamiltonian = HamiltonianKind::JaynesCummings;
  std::vector<Phase> phases;
  std::string description;
};

/// Sample offsets of one phase.
std::vector<double> phase_grid(const Phase& phase);

/// Pump on for charge_ns (log grid from 1e-3 ns), then pump off for relax_ns
/// (log grid from 1e-1 ns), optionally opening the cavity for the relaxation.
Scenario charge_relax_scenario(const DeviceParams& device, const RateParams& rates, double charge_ns, double relax_ns,
                               bool open_on_relax = false);

/// Ground-state start, one generator per phase, the final state of each
/// phase seeds the next. The first sample is t = 0.
Trajectory run_scenario(const Scenario& scenario);

/// State after the first t_ns of the schedule.
DensityMatrix state_at(const Scenario& scenario, double t_ns);

inline constexpr double kCutoffTolerance = 1e-3;

struct CutoffCheck {
  int n_max = 0;            ///< cutoff of the trajectory under test
  double max_change = 0.0;  ///< largest population change at n_max + 1
  bool converged = true;
};

/// Re-runs the scenario one photon higher and compares every population
/// record of `traj` (which must come from run_scenario(scenario)).
CutoffCheck check_cutoff(const Scenario& scenario, const Trajectory& traj, double tol = kCutoffTolerance);

struct SweepPoint {
  double omega_c0 = 0.0;  ///< eV
  double p_t1 = 0.0;      ///< at the probe time
  std::array<double, 4> energies{};  ///< UP, MP, LP, T~ at the scenario angle
};

struct SweepResult {
  std::string axis = "omega_c0";
  std::vector<SweepPoint> points;
  std::size_t argmax = 0;  ///< index of the largest p_t1
  double probe_time = 0.0;

  double omega_at_max() const { return points.at(argmax).omega_c0; }
};

/// Evaluated in parallel over the grid; the grid must be strictly monotone.
SweepResult sweep_cavity_energy(const Scenario& scenario, std::span<const double> omega_grid, double probe_ns);

/// Emission features of each device with J_T replaced by j_t, divided by
/// those of devices[reference]. Devices are evaluated in parallel.
FeatureTable sweep_detuning_features(std::span<const DeviceParams> devices, const RateParams& rates, double j_t,
                                     std::size_t reference, int n_max = 2);

std::vector<double> linspace(double lo, double hi, int n);
std::vector<double> logspace(double lo, double hi, int n);

namespace reference {

SweepResult sweep_cavity_energy(const Scenario& scenario, std::span<const double> omega_grid, double probe_ns);

}  // namespace reference

}  // namespace qbsim
