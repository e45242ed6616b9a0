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

#include "qbsim/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <fmt/format.h>

#include "qbsim/error.hpp"
#include "qbsim/polaritons.hpp"

namespace qbsim {

namespace {

void check_scenario(const Scenario& s) {
  validate(s.device);
  validate(s.rates);
  if (s.phases.empty()) throw Error(Errc::IncompleteScenario, "scenario has no phases");
  for (std::size_t p = 0; p < s.phases.size(); ++p) {
    const Phase& ph = s.phases[p];
    if (!(ph.duration > 0.0) || !std::isfinite(ph.duration)) {
      throw Error(Errc::DomainError, fmt::format("phase {} duration {} is not positive", p, ph.duration));
    }
    if (ph.points < 1) throw Error(Errc::DomainError, fmt::format("phase {} has no samples", p));
    if (ph.sampling == Sampling::Log && !(ph.first > 0.0)) {
      throw Error(Errc::DomainError, fmt::format("phase {} log grid needs a positive first offset", p));
    }
  }
}

Liouvillian phase_generator(const Scenario& s, const Phase& ph, const CompositeBasis& basis) {
  const DeviceParams device = ph.cavity_open ? open_cavity(s.device) : s.device;
  RateParams rates = s.rates;
  if (!ph.pump) rates.gamma_p = 0.0;
  return build_liouvillian(build_hamiltonian(s.hamiltonian, device, basis, s.theta), rates, basis);
}

template <class F>
auto tagged(std::size_t phase, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.code(), fmt::format("phase {}: {}", phase, e.detail()));
  }
}

std::array<double, 4> branch_energies(const DeviceParams& device, double theta) {
  const auto branches = polariton_branches(device, theta);
  std::array<double, 4> out{};
  const BranchLabel order[4] = {BranchLabel::UP, BranchLabel::MP, BranchLabel::LP, BranchLabel::TT};
  for (int k = 0; k < 4; ++k) out[k] = find_branch(branches, order[k]).energy;
  return out;
}

void check_grid(std::span<const double> grid) {
  if (grid.empty()) throw Error(Errc::DomainError, "sweep grid is empty");
  if (grid.size() < 2) return;
  const bool up = grid[1] > grid[0];
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(up ? grid[k] > grid[k - 1] : grid[k] < grid[k - 1])) {
      throw Error(Errc::DomainError, "sweep grid must be strictly monotone");
    }
  }
}

double total_duration(const Scenario& s) {
  double t = 0.0;
  for (const auto& ph : s.phases) t += ph.duration;
  return t;
}

SweepPoint sweep_point(const Scenario& s, double omega, double probe) {
  Scenario local = s;
  local.device.omega_c0 = omega;
  SweepPoint pt;
  pt.omega_c0 = omega;
  const CompositeBasis basis(local.n_max);
  pt.p_t1 = populations(state_at(local, probe), basis).p_acceptor_t1;
  pt.energies = branch_energies(local.device, local.theta);
  return pt;
}

SweepResult finish_sweep(std::vector<SweepPoint> points, double probe) {
  SweepResult r;
  r.points = std::move(points);
  r.probe_time = probe;
  for (std::size_t k = 1; k < r.points.size(); ++k) {
    if (r.points[k].p_t1 > r.points[r.argmax].p_t1) r.argmax = k;
  }
  return r;
}

void check_sweep(const Scenario& s, std::span<const double> grid, double probe) {
  check_scenario(s);
  check_grid(grid);
  if (!(probe > 0.0) || probe > total_duration(s) * (1.0 + 1e-12)) {
    throw Error(Errc::DomainError, fmt::format("probe time {} ns outside the scenario span", probe));
  }
}

}  // namespace

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw Error(Errc::DomainError, "grid needs at least one point");
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) out[k] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  if (n > 1) out.back() = hi;
  return out;
}

std::vector<double> logspace(double lo, double hi, int n) {
  if (!(lo > 0.0 && hi > 0.0)) throw Error(Errc::DomainError, "log grid bounds must be positive");
  std::vector<double> out = linspace(std::log10(lo), std::log10(hi), n);
  for (double& x : out) x = std::pow(10.0, x);
  out.front() = lo;
  if (n > 1) out.back() = hi;
  return out;
}

std::vector<double> phase_grid(const Phase& ph) {
  if (ph.points == 1) return {ph.duration};
  if (ph.sampling == Sampling::Log && ph.first < ph.duration) return logspace(ph.first, ph.duration, ph.points);
  std::vector<double> out(ph.points);
  for (int k = 0; k < ph.points; ++k) out[k] = ph.duration * (k + 1) / ph.points;
  out.back() = ph.duration;
  return out;
}

Scenario charge_relax_scenario(const DeviceParams& device, const RateParams& rates, double charge_ns, double relax_ns,
                               bool open_on_relax) {
  Scenario s;
  s.device = device;
  s.rates = rates;
  s.phases.push_back({charge_ns, true, false, Sampling::Log, 60, 1e-3});
  s.phases.push_back({relax_ns, false, open_on_relax, Sampling::Log, 90, 1e-1});
  s.description = fmt::format("charge {} ns, relax {} ns, cavity {} during relaxation", charge_ns, relax_ns,
                              open_on_relax ? "open" : "closed");
  return s;
}

Trajectory run_scenario(const Scenario& s) {
  check_scenario(s);
  const CompositeBasis basis(s.n_max);
  Trajectory traj;
  traj.description = s.description;
  DensityMatrix rho = DensityMatrix::ground(basis);
  traj.times.push_back(0.0);
  traj.states.push_back(rho);
  traj.phase.push_back(0);
  double t0 = 0.0;
  for (std::size_t p = 0; p < s.phases.size(); ++p) {
    const Phase& ph = s.phases[p];
    const std::vector<double> offsets = phase_grid(ph);
    Trajectory part = tagged(p, [&] { return propagate(phase_generator(s, ph, basis), rho, offsets); });
    for (std::size_t k = 0; k < part.size(); ++k) {
      traj.times.push_back(t0 + offsets[k]);
      traj.states.push_back(std::move(part.states[k]));
      traj.phase.push_back(static_cast<int>(p));
    }
    traj.phases.push_back({t0, t0 + ph.duration, ph.pump, ph.cavity_open});
    rho = traj.states.back();
    t0 += ph.duration;
  }
  return traj;
}

DensityMatrix state_at(const Scenario& s, double t_ns) {
  check_scenario(s);
  if (!(t_ns >= 0.0)) throw Error(Errc::DomainError, "time must be >= 0");
  const CompositeBasis basis(s.n_max);
  DensityMatrix rho = DensityMatrix::ground(basis);
  double t0 = 0.0;
  for (std::size_t p = 0; p < s.phases.size() && t_ns > t0; ++p) {
    const Phase& ph = s.phases[p];
    const double dt = std::min(ph.duration, t_ns - t0);
    rho = tagged(p, [&] { return Propagator(phase_generator(s, ph, basis), rho).evolve(dt); });
    t0 += ph.duration;
  }
  if (t_ns > t0 * (1.0 + 1e-12)) throw Error(Errc::DomainError, fmt::format("t = {} ns is past the schedule", t_ns));
  return rho;
}

CutoffCheck check_cutoff(const Scenario& s, const Trajectory& traj, double tol) {
  Scenario up = s;
  up.n_max = s.n_max + 1;
  const auto lo = populations(traj);
  const auto hi = populations(run_scenario(up));
  if (hi.size() != lo.size()) throw Error(Errc::DimensionMismatch, "trajectory does not belong to the scenario");
  CutoffCheck c;
  c.n_max = s.n_max;
  for (std::size_t k = 0; k < lo.size(); ++k) {
    const double d[] = {lo[k].p_ground - hi[k].p_ground, lo[k].mean_photons - hi[k].mean_photons,
                        lo[k].p_donor_s1 - hi[k].p_donor_s1, lo[k].p_acceptor_s1 - hi[k].p_acceptor_s1,
                        lo[k].p_acceptor_t1 - hi[k].p_acceptor_t1};
    for (double x : d) c.max_change = std::max(c.max_change, std::abs(x));
  }
  c.converged = c.max_change < tol;
  return c;
}

SweepResult sweep_cavity_energy(const Scenario& s, std::span<const double> grid, double probe) {
  check_sweep(s, grid, probe);
  const long n = static_cast<long>(grid.size());
  std::vector<std::optional<SweepPoint>> points(n);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    try {
      points[k] = sweep_point(s, grid[k], probe);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  std::vector<SweepPoint> out;
  for (long k = 0; k < n; ++k) {
    if (!points[k]) throw Error(Errc::NumericalFailure, fmt::format("omega_c0 = {}: {}", grid[k], errors[k]));
    out.push_back(*points[k]);
  }
  return finish_sweep(std::move(out), probe);
}

FeatureTable sweep_detuning_features(std::span<const DeviceParams> devices, const RateParams& rates, double j_t,
                                     std::size_t reference, int n_max) {
  if (devices.size() < 2) throw Error(Errc::InsufficientData, "feature sweep needs at least 2 devices");
  if (reference >= devices.size()) throw Error(Errc::DomainError, fmt::format("reference index {} out of range", reference));
  if (!(j_t >= 0.0) || !std::isfinite(j_t)) throw Error(Errc::DomainError, "j_t must be finite and >= 0");
  const long n = static_cast<long>(devices.size());
  std::vector<std::optional<EmissionFeatures>> feats(n);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    try {
      DeviceParams d = devices[k];
      d.j_t = j_t;
      feats[k] = emission_features(d, rates, n_max);
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  for (long k = 0; k < n; ++k) {
    if (!feats[k]) throw Error(Errc::NumericalFailure, fmt::format("device {}: {}", k, errors[k]));
  }
  const EmissionFeatures& ref = *feats[reference];
  FeatureTable table;
  for (long k = 0; k < n; ++k) {
    const EmissionFeatures& f = *feats[k];
    table.push_back({f.delta_e, f.fluorescence / ref.fluorescence, f.sharpness / ref.sharpness,
                     f.phosphorescence_rate / ref.phosphorescence_rate});
  }
  return table;
}

namespace reference {

SweepResult sweep_cavity_energy(const Scenario& s, std::span<const double> grid, double probe) {
  check_sweep(s, grid, probe);
  std::vector<SweepPoint> out;
  for (double omega : grid) out.push_back(sweep_point(s, omega, probe));
  return finish_sweep(std::move(out), probe);
}

}  // namespace reference

}  // namespace qbsim
