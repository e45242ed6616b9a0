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

#include "qbsim/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qbsim/error.hpp"
#include "qbsim/polaritons.hpp"

namespace qbsim {

PopulationRecord populations(const DensityMatrix& rho, const CompositeBasis& basis, double t_ns) {
  if (!(rho.basis() == basis)) {
    throw Error(Errc::DimensionMismatch, fmt::format("state dim {} vs basis dim {}", rho.dim(), basis.dim()));
  }
  PopulationRecord r;
  r.t = t_ns;
  r.p_ground = rho.population(CompositeBasis::ground_index());
  for (int i = 0; i < basis.dim(); ++i) {
    const double p = rho.population(i);
    const BasisLabel l = basis.label(i);
    r.mean_photons += l.photons * p;
    if (l.donor == Level::S1) r.p_donor_s1 += p;
    if (l.acceptor == Level::S1) r.p_acceptor_s1 += p;
    if (l.acceptor == Level::T1) r.p_acceptor_t1 += p;
  }
  return r;
}

std::vector<PopulationRecord> populations(const Trajectory& traj) {
  std::vector<PopulationRecord> out;
  out.reserve(traj.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out.push_back(populations(traj.states[k], traj.states[k].basis(), traj.times[k]));
  }
  return out;
}

double stored_energy_density(const DensityMatrix& rho, const DeviceParams& device, const CompositeBasis& basis) {
  return device.omega_t * populations(rho, basis).p_acceptor_t1;
}

double volumetric_energy_density(double p_t1, double e_t1_ev, double rho_t1_cm3) {
  if (!(p_t1 >= 0.0 && p_t1 <= 1.0)) throw Error(Errc::DomainError, fmt::format("p_t1 = {} outside [0, 1]", p_t1));
  if (!(e_t1_ev > 0.0 && rho_t1_cm3 > 0.0) || !std::isfinite(e_t1_ev) || !std::isfinite(rho_t1_cm3)) {
    throw Error(Errc::DomainError, "triplet energy and density must be positive");
  }
  return p_t1 * e_t1_ev * rho_t1_cm3;
}

Capacity battery_capacity(double e_t1_ev, double n_t1) {
  if (!(e_t1_ev >= 0.0 && n_t1 >= 0.0) || !std::isfinite(e_t1_ev) || !std::isfinite(n_t1)) {
    throw Error(Errc::DomainError, "capacity inputs must be non-negative");
  }
  Capacity c;
  c.ev_total = e_t1_ev * n_t1;
  c.watt_hours = c.ev_total * kJoulePerEv / 3600.0;
  return c;
}

DecayFit fit_exponential_decay(std::span<const double> t, std::span<const double> value, double t_a, double t_b) {
  if (t.size() != value.size()) throw Error(Errc::DimensionMismatch, "time and value series differ in length");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] < t_a || t[k] > t_b) continue;
    if (!(value[k] > 0.0) || !std::isfinite(value[k])) {
      throw Error(Errc::FitDomain, fmt::format("value {} at t = {} is not positive", value[k], t[k]));
    }
    xs.push_back(t[k]);
    ys.push_back(std::log(value[k]));
  }
  if (xs.size() < 5) {
    throw Error(Errc::InsufficientData, fmt::format("{} points in window, need at least 5", xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    mx += xs[k];
    my += ys[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) throw Error(Errc::InsufficientData, "all samples share one time");
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double r = ys[k] - (intercept + slope * xs[k]);
    ss += r * r;
  }
  DecayFit fit;
  fit.rate = std::max(0.0, -slope);
  fit.amplitude = std::exp(intercept);
  fit.residual = std::sqrt(ss / n);
  fit.single_exponential = fit.residual <= kSingleExponentialResidual;
  fit.points = static_cast<int>(xs.size());
  return fit;
}

double trapezoid_integral(std::span<const double> x, std::span<const double> f, double a, double b) {
  if (x.size() != f.size()) throw Error(Errc::DimensionMismatch, "x and f differ in length");
  if (x.size() < 2) throw Error(Errc::InsufficientData, "need at least 2 samples");
  if (!(a < b)) throw Error(Errc::DomainError, "integration window needs a < b");
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] > x[k - 1])) throw Error(Errc::DomainError, "abscissae must be strictly increasing");
  }
  if (a < x.front() || b > x.back()) {
    throw Error(Errc::DomainError, fmt::format("window [{}, {}] outside samples [{}, {}]", a, b, x.front(), x.back()));
  }
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    const double lo = std::max(a, x[k]);
    const double hi = std::min(b, x[k + 1]);
    if (!(hi > lo)) continue;
    const double slope = (f[k + 1] - f[k]) / (x[k + 1] - x[k]);
    const double f_lo = (lo == x[k]) ? f[k] : f[k] + slope * (lo - x[k]);
    const double f_hi = (hi == x[k + 1]) ? f[k + 1] : f[k] + slope * (hi - x[k]);
    sum += 0.5 * (hi - lo) * (f_lo + f_hi);
  }
  return sum;
}

EnergyFigures charging_metrics(const Trajectory& traj, const DeviceParams& device, const CompositeBasis& basis) {
  int on = -1, off = -1;
  for (std::size_t p = 0; p < traj.phases.size(); ++p) {
    if (on < 0 && traj.phases[p].pump) {
      on = static_cast<int>(p);
    } else if (on >= 0 && !traj.phases[p].pump) {
      off = static_cast<int>(p);
      break;
    }
  }
  if (on < 0 || off < 0) throw Error(Errc::IncompleteScenario, "trajectory lacks a pump-on phase followed by pump-off");

  std::vector<double> t_on, e_on, t_off, p_off;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double pt = populations(traj.states[k], basis).p_acceptor_t1;
    if (traj.phase[k] == on) {
      t_on.push_back(traj.times[k]);
      e_on.push_back(device.omega_t * pt);
    } else if (traj.phase[k] == off) {
      t_off.push_back(traj.times[k]);
      p_off.push_back(pt);
    }
  }
  if (t_on.empty() || t_off.empty()) throw Error(Errc::IncompleteScenario, "a phase has no samples");

  EnergyFigures fig;
  const std::size_t n = t_on.size();
  for (std::size_t k = 0; n >= 2 && k < n; ++k) {
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = k + 1 == n ? n - 1 : k + 1;
    fig.charging_power = std::max(fig.charging_power, (e_on[hi] - e_on[lo]) / (t_on[hi] - t_on[lo]));
  }
  fig.stored_density = std::max(0.0, e_on.back());

  // The relaxation starts from the last pump-on state.
  const double p_start = e_on.back() / device.omega_t;
  if (!(p_start > 0.0)) return fig;
  std::vector<double> ts{t_on.back()}, ps{p_start};
  for (std::size_t k = 0; k < t_off.size(); ++k) {
    if (p_off[k] >= 1e-6 * p_start) {
      ts.push_back(t_off[k]);
      ps.push_back(p_off[k]);
    }
  }
  const DecayFit fit = fit_exponential_decay(ts, ps, ts.front(), ts.back());
  fig.self_discharge_time = fit.rate > 0.0 ? 1.0 / fit.rate : std::numeric_limits<double>::infinity();
  return fig;
}

double bright_emission_flux(const DensityMatrix& rho, const RateParams& rates, const CompositeBasis& basis) {
  const PopulationRecord r = populations(rho, basis);
  return rates.gamma_c * r.mean_photons + rates.gamma_d * r.p_donor_s1 + rates.gamma_a * r.p_acceptor_s1;
}

double phosphorescence_intensity(double p_t1, const RateParams& rates) { return rates.gamma_ic * p_t1; }

EmissionFeatures emission_features(const DeviceParams& device, const RateParams& rates, int n_max) {
  validate(device);
  validate(rates);
  if (!(rates.gamma_ic > 0.0)) throw Error(Errc::InvalidRate, "emission features need gamma_ic > 0");
  const CompositeBasis basis(n_max);
  const Liouvillian l = build_liouvillian(build_jc_hamiltonian(device, basis), rates, basis);
  const DensityMatrix ss = steady_state(l);
  const PopulationRecord pop = populations(ss, basis);

  EmissionFeatures f;
  f.delta_e = detuning(device).delta_e;

  const auto widths = branch_linewidths(device, rates);
  for (const auto& w : widths) {
    if (w.label == BranchLabel::LP) f.lp_fwhm = w.fwhm;
  }
  if (!(f.lp_fwhm > 0.0)) throw Error(Errc::NumericalFailure, "LP linewidth is not positive");
  f.sharpness = 1.0 / f.lp_fwhm;

  const auto branches = polariton_branches(device);
  const double lp_triplet = find_branch(branches, BranchLabel::LP).character[3];
  f.fluorescence = bright_emission_flux(ss, rates, basis) * (1.0 - lp_triplet);

  const double p_t = pop.p_acceptor_t1;
  const double p_p = std::max(0.0, 1.0 - pop.p_ground - p_t);
  const double excited = p_t + p_p;
  if (!(excited > 0.0)) throw Error(Errc::NumericalFailure, "steady state holds no excitation");
  f.triplet_fraction = p_t / excited;
  const double tau_t = 1.0 / rates.gamma_ic;
  const double tau_p = kHbarEvNs / f.lp_fwhm;
  f.phosphorescence_rate = 1.0 / effective_triplet_lifetime(f.triplet_fraction, tau_t, 1.0 - f.triplet_fraction, tau_p);
  return f;
}

}  // namespace qbsim
