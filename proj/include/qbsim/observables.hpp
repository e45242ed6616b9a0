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

#include <span>
#include <vector>

#include "qbsim/dynamics.hpp"
#include "qbsim/model.hpp"

namespace qbsim {

struct PopulationRecord {
  double t = 0.0;  ///< ns
  double p_ground = 0.0;
  double mean_photons = 0.0;
  double p_donor_s1 = 0.0;
  double p_acceptor_s1 = 0.0;
  double p_acceptor_t1 = 0.0;
};

PopulationRecord populations(const DensityMatrix& rho, const CompositeBasis& basis, double t_ns = 0.0);
std::vector<PopulationRecord> populations(const Trajectory& traj);

/// omega_T * p_T1, eV per acceptor.
double stored_energy_density(const DensityMatrix& rho, const DeviceParams& device, const CompositeBasis& basis);

/// p_T1 * E_T1 * rho_T1, eV cm^-3.
double volumetric_energy_density(double p_t1, double e_t1_ev, double rho_t1_cm3);

struct Capacity {
  double ev_total = 0.0;
  double watt_hours = 0.0;
};

Capacity battery_capacity(double e_t1_ev, double n_t1);

/// Log residuals above this RMS mark a series as not single-exponential.
inline constexpr double kSingleExponentialResidual = 1e-4;

struct DecayFit {
  double rate = 0.0;       ///< ns^-1, clamped at 0
  double amplitude = 0.0;
  double residual = 0.0;   ///< RMS of log(value) residuals
  bool single_exponential = true;
  int points = 0;
};

/// Least-squares line through log(value) against t over samples with
/// t in [t_a, t_b].
DecayFit fit_exponential_decay(std::span<const double> t, std::span<const double> value, double t_a, double t_b);

/// Trapezoid rule over [a, b]; the window ends are linearly interpolated
/// when they fall between samples.
double trapezoid_integral(std::span<const double> x, std::span<const double> f, double a, double b);

struct EnergyFigures {
  double charging_power = 0.0;       ///< eV/ns
  double stored_density = 0.0;       ///< eV per acceptor
  double self_discharge_time = 0.0;  ///< ns, 0 when nothing was stored
};

/// Needs at least one pump-on phase followed by a pump-off phase.
EnergyFigures charging_metrics(const Trajectory& traj, const DeviceParams& device, const CompositeBasis& basis);

/// Radiative photon flux gamma_c <n> + gamma_d p_D,S1 + gamma_a p_A,S1.
double bright_emission_flux(const DensityMatrix& rho, const RateParams& rates, const CompositeBasis& basis);

/// gamma_ic * p_T1.
double phosphorescence_intensity(double p_t1, const RateParams& rates);

/// Absolute emission proxies of one device under continuous pumping.
struct EmissionFeatures {
  double delta_e = 0.0;              ///< eV
  double fluorescence = 0.0;         ///< bright flux times the LP singlet fraction
  double sharpness = 0.0;            ///< 1 / FWHM_LP, eV^-1
  double phosphorescence_rate = 0.0; ///< 1 / effective triplet lifetime, ns^-1
  double lp_fwhm = 0.0;              ///< eV
  double triplet_fraction = 0.0;     ///< p_T / (p_T + p_P) in the steady state
};

/// Steady state of the full model at theta = 0. The effective triplet
/// lifetime mixes tau_T = 1/gamma_ic with the LP lifetime hbar/FWHM_LP,
/// weighted by the excited-manifold fractions held in the triplet and in
/// the singlet polariton states.
EmissionFeatures emission_features(const DeviceParams& device, const RateParams& rates, int n_max = 2);

/// One row of a relative emission-feature table.
struct FeatureRecord {
  double delta_e = 0.0;  ///< eV
  double rel_fluorescence_intensity = 1.0;
  double rel_sharpness = 1.0;
  double rel_phosphorescence_rate = 1.0;
};

using FeatureTable = std::vector<FeatureRecord>;

}  // namespace qbsim
