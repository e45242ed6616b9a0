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

#include "qbsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "qbsim/error.hpp"

namespace qbsim {

namespace {

void require(bool ok, Errc code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void validate(const DeviceParams& d) {
  require(std::isfinite(d.omega_c0) && d.omega_c0 > 0, Errc::DomainError, "omega_c0 must be > 0");
  require(std::isfinite(d.omega_d) && d.omega_d > 0, Errc::DomainError, "omega_d must be > 0");
  require(std::isfinite(d.omega_a) && d.omega_a > 0, Errc::DomainError, "omega_a must be > 0");
  require(std::isfinite(d.omega_t) && d.omega_t > 0, Errc::DomainError, "omega_t must be > 0");
  require(std::isfinite(d.n_eff) && d.n_eff >= 1.0, Errc::DomainError, "n_eff must be >= 1");
  require(finite_nonneg(d.j_d) && finite_nonneg(d.j_a) && finite_nonneg(d.j_t), Errc::DomainError,
          "couplings must be >= 0");
}

void validate(const RateParams& r) {
  for (double g : {r.gamma_p, r.gamma_c, r.gamma_d, r.gamma_a, r.gamma_ic, r.gamma_isc}) {
    require(finite_nonneg(g), Errc::InvalidRate, "rates must be finite and >= 0");
  }
}

bool rwa_valid(const DeviceParams& d) {
  const double floor = 0.2 * std::min({d.omega_c0, d.omega_d, d.omega_a});
  return d.j_d < floor && d.j_a < floor && d.j_t < floor;
}

DeviceParams open_cavity(DeviceParams device) {
  device.j_d = device.j_a = device.j_t = 0.0;
  return device;
}

double cavity_energy(double omega_c0, double n_eff, double theta_deg) {
  require(std::abs(theta_deg) < 90.0, Errc::DomainError, "|theta| must be < 90 degrees");
  require(n_eff >= 1.0, Errc::DomainError, "n_eff must be >= 1");
  const double s = std::sin(theta_deg * std::numbers::pi / 180.0);
  const double ratio = s * s / (n_eff * n_eff);
  require(ratio < 1.0, Errc::DomainError, "evanescent regime: sin^2(theta) >= n_eff^2");
  return omega_c0 / std::sqrt(1.0 - ratio);
}

double cavity_energy(const DeviceParams& device, double theta_deg) {
  return cavity_energy(device.omega_c0, device.n_eff, theta_deg);
}

double rate_to_energy(double gamma_ghz) {
  require(std::isfinite(gamma_ghz) && gamma_ghz >= 0.0, Errc::InvalidRate, "rate must be >= 0");
  return kHbarEvNs * gamma_ghz;
}

namespace {

struct Ladder {
  Operator a, sd, sa, st;  // lowering operators
};

Ladder ladder(const CompositeBasis& basis) {
  return {photon_annihilation(basis), transition(basis, Site::Donor, Level::S1, Level::S0),
          transition(basis, Site::Acceptor, Level::S1, Level::S0),
          transition(basis, Site::Acceptor, Level::T1, Level::S0)};
}

Operator bare_hamiltonian(const DeviceParams& d, const Ladder& l, double theta_deg) {
  const double wc = cavity_energy(d, theta_deg);
  return Complex(wc) * (l.a.adjoint() * l.a) + Complex(d.omega_d) * (l.sd.adjoint() * l.sd) +
         Complex(d.omega_a) * (l.sa.adjoint() * l.sa) + Complex(d.omega_t) * (l.st.adjoint() * l.st);
}

}  // namespace

Operator build_jc_hamiltonian(const DeviceParams& d, const CompositeBasis& basis, double theta_deg) {
  validate(d);
  const Ladder l = ladder(basis);
  Operator h = bare_hamiltonian(d, l, theta_deg);
  const Operator ad = l.a.adjoint();
  h += Complex(d.j_d) * (l.sd.adjoint() * l.a + l.sd * ad);
  h += Complex(d.j_a) * (l.sa.adjoint() * l.a + l.sa * ad);
  h += Complex(d.j_t) * (l.st.adjoint() * l.a + l.st * ad);
  return h;
}

Operator build_rabi_hamiltonian(const DeviceParams& d, const CompositeBasis& basis, double theta_deg) {
  validate(d);
  const Ladder l = ladder(basis);
  Operator h = bare_hamiltonian(d, l, theta_deg);
  const Operator x = l.a + l.a.adjoint();
  h += Complex(d.j_d) * ((l.sd + l.sd.adjoint()) * x);
  h += Complex(d.j_a) * ((l.sa + l.sa.adjoint()) * x);
  h += Complex(d.j_t) * ((l.st + l.st.adjoint()) * x);
  return h;
}

Operator build_hamiltonian(HamiltonianKind kind, const DeviceParams& device, const CompositeBasis& basis,
                           double theta_deg) {
  return kind == HamiltonianKind::Rabi ? build_rabi_hamiltonian(device, basis, theta_deg)
                                       : build_jc_hamiltonian(device, basis, theta_deg);
}

const char* to_string(BranchLabel label) {
  switch (label) {
    case BranchLabel::LP: return "LP";
    case BranchLabel::MP: return "MP";
    case BranchLabel::UP: return "UP";
    case BranchLabel::TT: return "T~";
  }
  return "?";
}

const char* to_string(Mechanism m) {
  switch (m) {
    case Mechanism::Neither: return "neither";
    case Mechanism::Mechanism1: return "mechanism1";
    case Mechanism::Mechanism2: return "mechanism2";
    case Mechanism::Both: return "both";
  }
  return "?";
}

}  // namespace qbsim
