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

#include "qbsim/polaritons.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "qbsim/error.hpp"

namespace qbsim {

namespace {

constexpr double kDegeneracyTol = 1e-12;

struct Eigenpairs {
  std::vector<double> energies;
  std::vector<Eigen::Vector4d> vectors;  // in the full 4-slot diabatic basis
};

// Diagonalise the block of the single-excitation matrix restricted to the
// given diabatic slots. Results ascend in energy.
Eigenpairs diagonalize(const Eigen::Matrix4d& h, const std::vector<int>& slots) {
  const int n = static_cast<int>(slots.size());
  Eigen::MatrixXd sub(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) sub(i, j) = h(slots[i], slots[j]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub);
  if (es.info() != Eigen::Success) throw Error(Errc::NumericalFailure, "single-excitation diagonalisation failed");
  Eigenpairs out;
  for (int k = 0; k < n; ++k) {
    out.energies.push_back(es.eigenvalues()(k));
    Eigen::Vector4d v = Eigen::Vector4d::Zero();
    for (int i = 0; i < n; ++i) v(slots[i]) = es.eigenvectors()(i, k);
    out.vectors.push_back(v);
  }
  return out;
}

void check_distinct(const std::vector<double>& sorted_energies) {
  for (std::size_t k = 1; k < sorted_energies.size(); ++k) {
    if (sorted_energies[k] - sorted_energies[k - 1] < kDegeneracyTol) {
      throw Error(Errc::AmbiguousLabeling, "degenerate branches at " + std::to_string(sorted_energies[k - 1]) +
                                               " and " + std::to_string(sorted_energies[k]) + " eV");
    }
  }
}

Character character_of(const Eigen::Vector4d& v) {
  Character c{};
  const double norm = v.squaredNorm();
  for (int i = 0; i < 4; ++i) c[i] = v(i) * v(i) / norm;
  return c;
}

std::vector<BranchLabel> energy_labels(std::size_t n) {
  if (n == 2) return {BranchLabel::LP, BranchLabel::UP};
  if (n == 3) return {BranchLabel::LP, BranchLabel::MP, BranchLabel::UP};
  throw Error(Errc::DomainError, "unsupported subsystem size");
}

std::vector<int> subsystem_slots(Subsystem s) {
  switch (s) {
    case Subsystem::Full: return {0, 1, 2, 3};
    case Subsystem::SingletPolaritons: return {0, 1, 2};
    case Subsystem::CavityDonor: return {0, 1};
  }
  return {};
}

struct Analysis {
  std::array<PolaritonBranch, 4> branches;
  std::array<Eigen::Vector4d, 4> vectors;
};

Analysis analyze(const DeviceParams& device, double theta_deg) {
  const Eigen::Matrix4d h = single_excitation_hamiltonian(device, theta_deg);
  Analysis out;
  if (device.j_t == 0.0) {
    // Decoupled triplet: keep it exact instead of trusting the solver's zeros.
    Eigenpairs singlets = diagonalize(h, {0, 1, 2});
    check_distinct(singlets.energies);
    const auto labels = energy_labels(3);
    std::array<std::pair<double, int>, 4> order;
    for (int k = 0; k < 3; ++k) order[k] = {singlets.energies[k], k};
    order[3] = {device.omega_t, 3};
    std::stable_sort(order.begin(), order.end(), [](auto& a, auto& b) { return a.first < b.first; });
    for (int i = 0; i < 4; ++i) {
      const int k = order[i].second;
      Eigen::Vector4d v = k == 3 ? Eigen::Vector4d::UnitW().eval() : singlets.vectors[k];
      out.vectors[i] = v;
      out.branches[i] = {order[i].first, character_of(v), k == 3 ? BranchLabel::TT : labels[k]};
    }
    return out;
  }

  Eigenpairs all = diagonalize(h, {0, 1, 2, 3});
  check_distinct(all.energies);
  int tt = 0;
  for (int k = 1; k < 4; ++k) {
    if (std::abs(all.vectors[k](3)) > std::abs(all.vectors[tt](3))) tt = k;
  }
  for (int k = 0; k < 4; ++k) {
    if (k != tt && std::abs(std::abs(all.vectors[k](3)) - std::abs(all.vectors[tt](3))) < kDegeneracyTol) {
      throw Error(Errc::AmbiguousLabeling, "two branches share the maximal triplet weight");
    }
  }
  const auto labels = energy_labels(3);
  int next = 0;
  for (int k = 0; k < 4; ++k) {
    out.vectors[k] = all.vectors[k];
    out.branches[k] = {all.energies[k], character_of(all.vectors[k]), k == tt ? BranchLabel::TT : labels[next++]};
  }
  return out;
}

}  // namespace

Eigen::Matrix4d single_excitation_hamiltonian(const DeviceParams& d, double theta_deg) {
  validate(d);
  const double wc = cavity_energy(d, theta_deg);
  Eigen::Matrix4d h;
  // clang-format off
  h << wc,    d.j_d,     d.j_a,     d.j_t,
       d.j_d, d.omega_d, 0.0,       0.0,
       d.j_a, 0.0,       d.omega_a, 0.0,
       d.j_t, 0.0,       0.0,       d.omega_t;
  // clang-format on
  return h;
}

std::array<PolaritonBranch, 4> polariton_branches(const DeviceParams& device, double theta_deg) {
  return analyze(device, theta_deg).branches;
}

std::vector<PolaritonBranch> subsystem_branches(const DeviceParams& device, double theta_deg, Subsystem subsystem) {
  if (subsystem == Subsystem::Full) {
    const auto b = polariton_branches(device, theta_deg);
    return {b.begin(), b.end()};
  }
  const Eigen::Matrix4d h = single_excitation_hamiltonian(device, theta_deg);
  const Eigenpairs pairs = diagonalize(h, subsystem_slots(subsystem));
  check_distinct(pairs.energies);
  const auto labels = energy_labels(pairs.energies.size());
  std::vector<PolaritonBranch> out;
  for (std::size_t k = 0; k < pairs.energies.size(); ++k) {
    out.push_back({pairs.energies[k], character_of(pairs.vectors[k]), labels[k]});
  }
  return out;
}

const PolaritonBranch& find_branch(std::span<const PolaritonBranch> branches, BranchLabel label) {
  for (const auto& b : branches) {
    if (b.label == label) return b;
  }
  throw Error(Errc::DomainError, std::string("no branch labelled ") + to_string(label));
}

DetuningReport detuning(const DeviceParams& device, double theta_deg) {
  DeviceParams bare = device;
  bare.j_t = 0.0;
  const auto branches = polariton_branches(bare, theta_deg);
  DetuningReport r;
  r.e_lp = find_branch(branches, BranchLabel::LP).energy;
  r.e_t1 = device.omega_t;
  r.delta_e = r.e_lp - r.e_t1;
  return r;
}

double effective_triplet_lifetime(double p_t, double tau_t, double p_p, double tau_p) {
  if (!(p_t >= 0.0 && p_p >= 0.0 && p_t + p_p <= 1.0 + 1e-9)) {
    throw Error(Errc::DomainError, "populations must be non-negative and sum to at most 1");
  }
  if (!(tau_t > 0.0 && tau_p > 0.0)) throw Error(Errc::DomainError, "lifetimes must be positive");
  return p_t * tau_t + p_p * tau_p;
}

double find_resonance(const DeviceParams& device_template, const ResonanceSweep& sweep, const ResonanceTarget& target) {
  if (!(sweep.hi > sweep.lo) || sweep.steps < 3) {
    throw Error(Errc::DomainError, "resonance sweep needs lo < hi and at least 3 steps");
  }
  auto mismatch = [&](double omega) {
    DeviceParams d = device_template;
    d.omega_c0 = omega;
    const auto branches = subsystem_branches(d, 0.0, target.subsystem);
    return std::abs(find_branch(branches, target.branch).energy - target.energy);
  };

  const double step = (sweep.hi - sweep.lo) / (sweep.steps - 1);
  int best = 0;
  double best_value = mismatch(sweep.lo);
  for (int i = 1; i < sweep.steps; ++i) {
    const double v = mismatch(sweep.lo + i * step);
    if (v < best_value) {
      best_value = v;
      best = i;
    }
  }
  if (best == 0 || best == sweep.steps - 1) {
    throw Error(Errc::ResonanceNotBracketed, "closest approach at the edge of [" + std::to_string(sweep.lo) + ", " +
                                                 std::to_string(sweep.hi) + "] eV");
  }

  double lo = sweep.lo + (best - 1) * step;
  double hi = sweep.lo + (best + 1) * step;
  constexpr double h = 1e-9;
  while (hi - lo > 1e-7) {
    const double mid = 0.5 * (lo + hi);
    if (mismatch(mid + h) - mismatch(mid - h) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::array<BranchLinewidth, 4> branch_linewidths(const DeviceParams& device, const RateParams& rates,
                                                 double theta_deg) {
  validate(rates);
  const Analysis herm = analyze(device, theta_deg);
  Eigen::Matrix4cd heff = single_excitation_hamiltonian(device, theta_deg).cast<Complex>();
  const Complex half_i(0.0, 0.5);
  heff(0, 0) -= half_i * rate_to_energy(rates.gamma_c);
  heff(1, 1) -= half_i * rate_to_energy(rates.gamma_d);
  heff(2, 2) -= half_i * rate_to_energy(rates.gamma_a + rates.gamma_isc);
  heff(3, 3) -= half_i * rate_to_energy(rates.gamma_ic);

  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(heff);
  if (es.info() != Eigen::Success) throw Error(Errc::NumericalFailure, "non-Hermitian diagonalisation failed");

  // Greedy assignment of non-Hermitian modes to Hermitian branches by overlap.
  std::array<std::array<double, 4>, 4> overlap{};
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      const Eigen::Vector4cd v = es.eigenvectors().col(k).normalized();
      overlap[i][k] = std::norm(herm.vectors[i].cast<Complex>().dot(v));
    }
  }
  std::array<int, 4> assigned;
  assigned.fill(-1);
  std::array<bool, 4> used{};
  for (int round = 0; round < 4; ++round) {
    int bi = -1, bk = -1;
    double bv = -1.0;
    for (int i = 0; i < 4; ++i) {
      if (assigned[i] >= 0) continue;
      for (int k = 0; k < 4; ++k) {
        if (!used[k] && overlap[i][k] > bv) {
          bv = overlap[i][k];
          bi = i;
          bk = k;
        }
      }
    }
    assigned[bi] = bk;
    used[bk] = true;
  }

  std::array<BranchLinewidth, 4> out;
  for (int i = 0; i < 4; ++i) {
    const Complex lambda = es.eigenvalues()(assigned[i]);
    out[i] = {herm.branches[i].label, lambda.real(), -2.0 * lambda.imag()};
  }
  return out;
}

RegimeReport classify_regime(const DeviceParams& device, const RateParams& rates, double theta_deg, double tol_ev) {
  validate(rates);
  if (!(tol_ev > 0.0)) throw Error(Errc::DomainError, "tolerance must be positive");
  RegimeReport r;
  r.isc_dominant = rates.gamma_isc > rates.gamma_c && rates.gamma_isc > rates.gamma_d && rates.gamma_isc > rates.gamma_a;

  auto closest = [](const std::vector<PolaritonBranch>& branches, double energy) {
    const PolaritonBranch* best = &branches.front();
    for (const auto& b : branches) {
      if (std::abs(b.energy - energy) < std::abs(best->energy - energy)) best = &b;
    }
    return std::make_pair(best->label, std::abs(best->energy - energy));
  };

  const auto [s_label, s_gap] = closest(subsystem_branches(device, theta_deg, Subsystem::CavityDonor), device.omega_a);
  r.singlet_mismatch = s_gap;
  if (s_gap <= tol_ev) r.singlet_resonance = s_label;

  const auto [t_label, t_gap] =
      closest(subsystem_branches(device, theta_deg, Subsystem::SingletPolaritons), device.omega_t);
  r.triplet_mismatch = t_gap;
  if (t_gap <= tol_ev && device.j_t > 0.0) r.triplet_resonance = t_label;

  const bool m1 = r.singlet_resonance.has_value();
  const bool m2 = r.triplet_resonance.has_value();
  r.verdict = m1 && m2 ? Mechanism::Both : m1 ? Mechanism::Mechanism1 : m2 ? Mechanism::Mechanism2 : Mechanism::Neither;
  return r;
}

}  // namespace qbsim
