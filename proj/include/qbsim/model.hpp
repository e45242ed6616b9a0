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

#include <optional>
#include <string>

#include "qbsim/hilbert.hpp"

namespace qbsim {

/// Reduced Planck constant in eV ns.
inline constexpr double kHbarEvNs = 6.582119569e-7;
/// Joules per electronvolt.
inline constexpr double kJoulePerEv = 1.602176634e-19;

inline constexpr double kDefaultRefractiveIndex = 1.5;

/// Coherent parameters of the cavity-donor-acceptor model. Energies and
/// couplings in eV.
struct DeviceParams {
  double omega_c0 = 0.0;  ///< cavity energy at normal incidence
  double n_eff = kDefaultRefractiveIndex;
  double omega_d = 0.0;   ///< donor S1
  double omega_a = 0.0;   ///< acceptor S1
  double omega_t = 0.0;   ///< acceptor T1
  double j_d = 0.0;       ///< cumulative cavity-donor coupling
  double j_a = 0.0;       ///< cumulative cavity-acceptor coupling
  double j_t = 0.0;       ///< cavity-triplet coupling

  friend bool operator==(const DeviceParams&, const DeviceParams&) = default;
};

/// Incoherent rates, GHz (ns^-1).
struct RateParams {
  double gamma_p = 0.0;    ///< incoherent pump into the cavity
  double gamma_c = 0.0;    ///< cavity loss
  double gamma_d = 0.0;    ///< donor S1 radiative loss
  double gamma_a = 0.0;    ///< acceptor S1 radiative loss
  double gamma_ic = 0.0;   ///< T1 -> S0 internal conversion
  double gamma_isc = 0.0;  ///< S1 -> T1 intersystem crossing at the acceptor

  friend bool operator==(const RateParams&, const RateParams&) = default;
};

void validate(const DeviceParams& device);
void validate(const RateParams& rates);

/// True when every coupling is below 0.2 of the smallest bare energy.
bool rwa_valid(const DeviceParams& device);

/// Same device with J_D = J_A = J_T = 0.
DeviceParams open_cavity(DeviceParams device);

/// Planar-microcavity dispersion omega_c0 / sqrt(1 - sin^2(theta)/n_eff^2).
double cavity_energy(double omega_c0, double n_eff, double theta_deg);
double cavity_energy(const DeviceParams& device, double theta_deg);

/// hbar * gamma in eV for gamma in GHz.
double rate_to_energy(double gamma_ghz);

/// Rotating-wave Hamiltonian including the optional triplet-cavity term
/// J_T(|T1><S0|_A a + h.c.).
Operator build_jc_hamiltonian(const DeviceParams& device, const CompositeBasis& basis, double theta_deg = 0.0);

/// Same Hamiltonian with the counter-rotating terms kept:
/// J (sigma_x) (a + a^dag) for each coupling.
Operator build_rabi_hamiltonian(const DeviceParams& device, const CompositeBasis& basis, double theta_deg = 0.0);

enum class HamiltonianKind { JaynesCummings, Rabi };

Operator build_hamiltonian(HamiltonianKind kind, const DeviceParams& device, const CompositeBasis& basis,
                           double theta_deg = 0.0);

enum class BranchLabel { LP, MP, UP, TT };

const char* to_string(BranchLabel label);

enum class Mechanism { Neither, Mechanism1, Mechanism2, Both };

const char* to_string(Mechanism m);

struct RegimeReport {
  bool isc_dominant = false;  ///< gamma_isc exceeds gamma_c, gamma_d and gamma_a
  std::optional<BranchLabel> singlet_resonance;   ///< bright branch within tol of omega_a
  std::optional<BranchLabel> triplet_resonance;   ///< bright branch within tol of omega_t, J_T > 0
  double singlet_mismatch = 0.0;  ///< min |omega_a - E_k| over bright branches, eV
  double triplet_mismatch = 0.0;  ///< min |omega_t - E_k| over bright branches, eV
  Mechanism verdict = Mechanism::Neither;
};

/// Checks the two transfer conditions. The singlet resonance is tested
/// against the cavity-donor polaritons (the acceptor removed); the triplet
/// resonance against the singlet polaritons (triplet removed).
RegimeReport classify_regime(const DeviceParams& device, const RateParams& rates, double theta_deg, double tol_ev);

}  // namespace qbsim
