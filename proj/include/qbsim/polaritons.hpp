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
#include <vector>

#include <Eigen/Dense>

#include "qbsim/model.hpp"

namespace qbsim {

/// Diabatic weights in the order (cavity, donor S1, acceptor S1, acceptor T1).
using Character = std::array<double, 4>;

struct PolaritonBranch {
  double energy = 0.0;
  Character character{};
  BranchLabel label = BranchLabel::LP;
};

struct DetuningReport {
  double e_lp = 0.0;
  double e_t1 = 0.0;
  double delta_e = 0.0;
};

/// Which diabatic states take part in a branch analysis.
enum class Subsystem {
  Full,               ///< cavity, donor, acceptor S1, acceptor T1
  SingletPolaritons,  ///< triplet removed (J_T ignored)
  CavityDonor,        ///< acceptor removed entirely
};

/// Single-excitation block in the order
/// (|1,S0,S0>, |0,S1,S0>, |0,S0,S1>, |0,S0,T1>).
Eigen::Matrix4d single_excitation_hamiltonian(const DeviceParams& device, double theta_deg = 0.0);

/// Eigenanalysis of the single-excitation block, ascending in energy.
/// T~ is the branch with the largest triplet weight; the other three are
/// LP/MP/UP by energy. Throws AmbiguousLabeling on degeneracies < 1e-12 eV.
std::array<PolaritonBranch, 4> polariton_branches(const DeviceParams& device, double theta_deg = 0.0);

/// Branches of a reduced subsystem, labelled LP(/MP)/UP by ascending energy.
std::vector<PolaritonBranch> subsystem_branches(const DeviceParams& device, double theta_deg, Subsystem subsystem);

/// Looks up a label; throws DomainError if absent.
const PolaritonBranch& find_branch(std::span<const PolaritonBranch> branches, BranchLabel label);

/// Delta E = E_LP - omega_T with E_LP taken at J_T = 0.
DetuningReport detuning(const DeviceParams& device, double theta_deg = 0.0);

/// tau = p_t tau_t + p_p tau_p.
double effective_triplet_lifetime(double p_t, double tau_t, double p_p, double tau_p);

struct ResonanceSweep {
  double lo = 0.0;  ///< omega_c0 range, eV
  double hi = 0.0;
  int steps = 0;
};

struct ResonanceTarget {
  BranchLabel branch = BranchLabel::LP;
  double energy = 0.0;
  Subsystem subsystem = Subsystem::Full;
};

/// omega_c0 minimising |E_branch(omega_c0) - target|: coarse grid scan
/// then bisection on the sign of the derivative, to 1e-6 eV.
double find_resonance(const DeviceParams& device_template, const ResonanceSweep& sweep, const ResonanceTarget& target);

/// Branch energies and linewidths from the non-Hermitian block
/// H - (i/2) diag(hbar gamma_c, hbar gamma_d, hbar (gamma_a + gamma_isc), hbar gamma_ic).
struct BranchLinewidth {
  BranchLabel label = BranchLabel::LP;
  double energy = 0.0;
  double fwhm = 0.0;  ///< eV
};

std::array<BranchLinewidth, 4> branch_linewidths(const DeviceParams& device, const RateParams& rates,
                                                 double theta_deg = 0.0);

}  // namespace qbsim
