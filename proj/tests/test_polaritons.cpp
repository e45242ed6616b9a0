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

#include <doctest.h>

#include <cmath>

#include "qbsim/config.hpp"
#include "qbsim/error.hpp"
#include "qbsim/polaritons.hpp"
#include "oracles.hpp"

using namespace qbsim;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no qbsim::Error thrown");
  return Errc::Config;
}

double weight_sum(const Character& c) { return c[0] + c[1] + c[2] + c[3]; }

}  // namespace

TEST_CASE("single-excitation matrix layout") {
  auto d = *device_preset("mechanism2");
  const auto h = single_excitation_hamiltonian(d, 10.0);
  CHECK(h(0, 0) == cavity_energy(d, 10.0));
  CHECK(h(0, 1) == d.j_d);
  CHECK(h(0, 2) == d.j_a);
  CHECK(h(0, 3) == d.j_t);
  CHECK(h(1, 1) == d.omega_d);
  CHECK(h(2, 2) == d.omega_a);
  CHECK(h(3, 3) == d.omega_t);
  CHECK(h(1, 2) == 0.0);
  CHECK(h(1, 3) == 0.0);
  CHECK(h(2, 3) == 0.0);
  CHECK((h - h.transpose()).norm() == 0.0);
}

TEST_CASE("cavity 1 lowest branch") {
  const auto d = *device_preset("cavity1");
  const double root = oracle::arrow_lowest_root(d.omega_c0, d.omega_d, d.omega_a, d.j_d, d.j_a);
  CHECK(std::abs(oracle::arrow_charpoly(d.omega_c0, d.omega_d, d.omega_a, d.j_d, d.j_a, 1.966)) < 2e-5);
  const auto br = polariton_branches(d);
  CHECK(find_branch(br, BranchLabel::LP).energy == doctest::Approx(root).epsilon(1e-12));
  CHECK(detuning(d).delta_e == doctest::Approx(0.216).epsilon(0.0005 / 0.216));
}

TEST_CASE("diagonal limit returns bare energies") {
  DeviceParams d{2.0, 1.5, 2.3, 2.4, 1.7, 0.0, 0.0, 0.0};
  const auto br = polariton_branches(d);
  CHECK(find_branch(br, BranchLabel::LP).energy == 2.0);
  CHECK(find_branch(br, BranchLabel::MP).energy == 2.3);
  CHECK(find_branch(br, BranchLabel::UP).energy == 2.4);
  CHECK(find_branch(br, BranchLabel::TT).energy == 1.7);
}

TEST_CASE("resonant two-level characters") {
  DeviceParams d{2.0, 1.5, 2.0, 3.0, 1.7, 0.1, 0.0, 0.0};
  const auto br = polariton_branches(d);
  for (auto label : {BranchLabel::LP, BranchLabel::MP}) {
    const auto& c = find_branch(br, label).character;
    CHECK(c[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c[1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(c[2] == doctest::Approx(0.0));
    CHECK(c[3] == doctest::Approx(0.0));
  }
  const auto ev = oracle::two_level(2.0, 2.0, 0.1);
  CHECK(find_branch(br, BranchLabel::LP).energy == doctest::Approx(ev[0]).epsilon(1e-14));
}

TEST_CASE("cavity 4 middle polariton is acceptor-like") {
  const auto br = polariton_branches(*device_preset("cavity4"));
  // independent 3x3 diagonalisation gives 0.878656 acceptor weight
  CHECK(find_branch(br, BranchLabel::MP).character[2] == doctest::Approx(0.878656).epsilon(1e-5));
  CHECK(find_branch(br, BranchLabel::MP).character[2] > 0.85);
  const auto& t = find_branch(br, BranchLabel::TT);
  CHECK(t.character[3] == 1.0);
  CHECK(t.character[0] == 0.0);
  CHECK(t.energy == 1.75);
}

TEST_CASE("cavity 4 middle polariton exceeds 0.9 acceptor weight" * doctest::may_fail()) {
  const auto br = polariton_branches(*device_preset("cavity4"));
  CHECK(find_branch(br, BranchLabel::MP).character[2] > 0.9);
}

TEST_CASE("characters are normalised and complete") {
  for (const auto& name : device_preset_names()) {
    auto d = *device_preset(name);
    d.j_t = 5e-3;
    for (double th : {0.0, 15.0, 40.0}) {
      const auto br = polariton_branches(d, th);
      Character total{};
      for (const auto& b : br) {
        CHECK(weight_sum(b.character) == doctest::Approx(1.0).epsilon(1e-10));
        for (int k = 0; k < 4; ++k) total[k] += b.character[k];
      }
      for (double w : total) CHECK(w == doctest::Approx(1.0).epsilon(1e-10));
      int labels = 0;
      for (auto l : {BranchLabel::LP, BranchLabel::MP, BranchLabel::UP, BranchLabel::TT}) {
        for (const auto& b : br) labels += b.label == l;
      }
      CHECK(labels == 4);
    }
  }
}

TEST_CASE("degenerate branches are ambiguous") {
  DeviceParams d{2.0, 1.5, 2.0, 2.4, 1.7, 0.0, 0.0, 0.0};
  CHECK(code_of([&] { polariton_branches(d); }) == Errc::AmbiguousLabeling);
}

TEST_CASE("table detunings") {
  const std::pair<const char*, double> rows[] = {
      {"cavity1", 0.216}, {"cavity2", 0.094}, {"cavity3", 0.036}, {"cavity4", 0.011}, {"cavity5", -0.091}};
  for (const auto& [name, de] : rows) {
    CAPTURE(name);
    const auto d = *device_preset(name);
    const auto r = detuning(d);
    CHECK(std::abs(r.delta_e - de) <= 0.005);
    CHECK(r.delta_e == r.e_lp - r.e_t1);
    CHECK(r.e_t1 == d.omega_t);
    const double oracle_lp = oracle::arrow_lowest_root(d.omega_c0, d.omega_d, d.omega_a, d.j_d, d.j_a);
    CHECK(r.e_lp == doctest::Approx(oracle_lp).epsilon(1e-12));
  }
}

TEST_CASE("detuning ignores the triplet coupling") {
  auto d = *device_preset("cavity4");
  const double bare = detuning(d).delta_e;
  d.j_t = 0.01;
  CHECK(detuning(d).delta_e == doctest::Approx(bare).epsilon(1e-14));
}

TEST_CASE("detuning vanishes in the decoupled limit") {
  DeviceParams d{1.75 + 1e-9, 1.5, 2.34, 2.36, 1.75, 0.0, 0.0, 0.0};
  CHECK(std::abs(detuning(d).delta_e) < 1e-8);
}

TEST_CASE("effective triplet lifetime") {
  CHECK(effective_triplet_lifetime(1.0, 40.0, 0.0, 123.0) == 40.0);
  CHECK(effective_triplet_lifetime(0.5, 40.0, 0.5, 1e-6) == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(effective_triplet_lifetime(0.0, 7.0, 1.0, 0.001) == 0.001);
  CHECK(code_of([] { effective_triplet_lifetime(-0.1, 40.0, 0.5, 1.0); }) == Errc::DomainError);
  CHECK(code_of([] { effective_triplet_lifetime(0.7, 40.0, 0.5, 1.0); }) == Errc::DomainError);
  CHECK(code_of([] { effective_triplet_lifetime(0.5, 0.0, 0.5, 1.0); }) == Errc::DomainError);
}

TEST_CASE("resonance finder against closed forms") {
  auto m2 = *device_preset("mechanism2");
  m2.j_a = 0.0;
  const double w = find_resonance(m2, {1.7, 2.0, 31}, {BranchLabel::LP, m2.omega_t, Subsystem::CavityDonor});
  const double exact = oracle::lp_resonance(m2.omega_t, m2.omega_d, m2.j_d);
  CHECK(std::abs(w - exact) <= 1e-6);
  CHECK(w == doctest::Approx(1.8559).epsilon(5e-5 / 1.8559));

  DeviceParams bare{2.0, 1.5, 2.34, 2.36, 1.75, 0.0, 0.0, 0.0};
  const double wb = find_resonance(bare, {1.9, 2.1, 11}, {BranchLabel::LP, 2.03, Subsystem::CavityDonor});
  CHECK(std::abs(wb - 2.03) <= 1e-6);

  auto m1 = *device_preset("mechanism1");
  const double up = find_resonance(m1, {2.0, 2.5, 51}, {BranchLabel::UP, m1.omega_a, Subsystem::CavityDonor});
  CHECK(std::abs(up - oracle::up_resonance(m1.omega_a, m1.omega_d, m1.j_d)) <= 1e-6);
}

// The table value sits near but not on the UP-acceptor resonance; the exact
// root is about 0.035 eV higher.
TEST_CASE("mechanism 1 table energy is within 0.03 eV of the UP resonance" * doctest::may_fail()) {
  auto m1 = *device_preset("mechanism1");
  const double up = find_resonance(m1, {2.0, 2.5, 51}, {BranchLabel::UP, m1.omega_a, Subsystem::CavityDonor});
  CHECK(std::abs(up - 2.217) <= 0.03);
}

TEST_CASE("resonance finder errors") {
  auto m2 = *device_preset("mechanism2");
  CHECK(code_of([&] { find_resonance(m2, {2.0, 2.2, 21}, {BranchLabel::LP, 1.75, Subsystem::CavityDonor}); }) ==
        Errc::ResonanceNotBracketed);
  CHECK(code_of([&] { find_resonance(m2, {2.0, 2.0, 21}, {BranchLabel::LP, 1.75, Subsystem::CavityDonor}); }) ==
        Errc::DomainError);
  CHECK(code_of([&] { find_resonance(m2, {1.7, 2.0, 2}, {BranchLabel::LP, 1.75, Subsystem::CavityDonor}); }) ==
        Errc::DomainError);
}

TEST_CASE("linewidths reduce to the loss rates when uncoupled") {
  DeviceParams d{2.0, 1.5, 2.3, 2.4, 1.7, 0.0, 0.0, 0.0};
  RateParams r;
  r.gamma_c = 50.0;
  r.gamma_d = 1.0;
  r.gamma_a = 1.0;
  r.gamma_isc = 0.48;
  r.gamma_ic = 1e-4;
  const auto lw = branch_linewidths(d, r);
  for (const auto& b : lw) {
    if (b.label == BranchLabel::LP) CHECK(b.fwhm == doctest::Approx(rate_to_energy(50.0)).epsilon(1e-9));
    if (b.label == BranchLabel::MP) CHECK(b.fwhm == doctest::Approx(rate_to_energy(1.0)).epsilon(1e-9));
    if (b.label == BranchLabel::UP) CHECK(b.fwhm == doctest::Approx(rate_to_energy(1.48)).epsilon(1e-9));
    if (b.label == BranchLabel::TT) CHECK(b.fwhm == doctest::Approx(rate_to_energy(1e-4)).epsilon(1e-6));
  }
}

TEST_CASE("resonant two-level linewidth is the mean of the losses") {
  DeviceParams d{2.0, 1.5, 2.0, 3.0, 1.7, 0.1, 0.0, 0.0};
  RateParams r;
  r.gamma_c = 50.0;
  r.gamma_d = 2.0;
  const auto lw = branch_linewidths(d, r);
  for (const auto& b : lw) {
    if (b.label == BranchLabel::LP || b.label == BranchLabel::MP) {
      CHECK(b.fwhm == doctest::Approx(rate_to_energy(26.0)).epsilon(1e-6));
    }
  }
}
