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
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "qbsim/config.hpp"
#include "qbsim/dynamics.hpp"
#include "qbsim/error.hpp"
#include "qbsim/io.hpp"
#include "qbsim/observables.hpp"
#include "qbsim/protocols.hpp"
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

RateParams only_cavity_loss(double g) {
  RateParams r;
  r.gamma_c = g;
  return r;
}

DensityMatrix mixture(const CompositeBasis& b, std::initializer_list<std::pair<int, double>> weights) {
  Matrix m = Matrix::Zero(b.dim(), b.dim());
  for (const auto& [i, w] : weights) m(i, i) = w;
  return DensityMatrix(b, m);
}

Liouvillian m1_generator(int n_max, bool pump = true) {
  const auto b = build_basis(n_max);
  auto rates = *rate_preset("rates-default");
  if (!pump) rates.gamma_p = 0.0;
  return build_liouvillian(build_jc_hamiltonian(*device_preset("mechanism1"), b), rates, b);
}

}  // namespace

TEST_CASE("channel list omits zero rates") {
  const auto b = build_basis(1);
  RateParams r = *rate_preset("rates-default");
  auto ch = jump_channels(r, b);
  CHECK(ch.size() == 6);
  r.gamma_isc = 0.0;
  r.gamma_p = 0.0;
  ch = jump_channels(r, b);
  REQUIRE(ch.size() == 4);
  CHECK(ch[0].label == "cavity_loss");

  const auto l = build_liouvillian(Operator::zero(b), r, b);
  CHECK(l.rate("cavity_loss") == 50.0);
  CHECK(l.rate("pump") == 0.0);
  CHECK(l.rate("internal_conversion") == 1e-4);
}

TEST_CASE("generator is trace-annihilating with a stable spectrum") {
  const auto l = m1_generator(1);
  const int d = l.dim();
  const Vector id = vectorize(Matrix::Identity(d, d));
  const double tr = (id.transpose() * l.generator()).cwiseAbs().maxCoeff();
  CHECK(tr <= 1e-12);

  Eigen::ComplexEigenSolver<Matrix> es(l.generator(), false);
  CHECK(es.eigenvalues().real().maxCoeff() <= 1e-9);
}

TEST_CASE("parallel and reference generators agree") {
  for (const char* name : {"mechanism1", "mechanism2", "cavity4"}) {
    const auto b = build_basis(2);
    auto dev = *device_preset(name);
    dev.j_t = 5e-3;
    const auto h = build_jc_hamiltonian(dev, b, 12.0);
    const auto rates = *rate_preset("rates-default");
    const auto fast = build_liouvillian(h, rates, b);
    const auto slow = reference::build_liouvillian(h, rates, b);
    const double scale = fast.generator().cwiseAbs().maxCoeff();
    CHECK((fast.generator() - slow.generator()).cwiseAbs().maxCoeff() <= 1e-13 * scale);
  }
}

TEST_CASE("generator input validation") {
  const auto b2 = build_basis(2);
  const auto b3 = build_basis(3);
  const auto h = build_jc_hamiltonian(*device_preset("cavity1"), b2);
  CHECK(code_of([&] { build_liouvillian(h, RateParams{}, b3); }) == Errc::DimensionMismatch);
  RateParams bad;
  bad.gamma_c = std::nan("");
  CHECK(code_of([&] { build_liouvillian(h, bad, b2); }) == Errc::InvalidRate);
}

TEST_CASE("zero generator leaves the state unchanged") {
  const auto b = build_basis(1);
  const auto l = build_liouvillian(Operator::zero(b), RateParams{}, b);
  const auto rho0 = mixture(b, {{0, 0.25}, {3, 0.5}, {7, 0.25}});
  const double times[] = {0.0, 1.0, 1e3, 1e9};
  const auto traj = propagate(l, rho0, times);
  for (const auto& s : traj.states) CHECK((s.matrix() - rho0.matrix()).norm() == 0.0);
}

TEST_CASE("cavity decay is exponential") {
  const auto b = build_basis(1);
  const double g = 50.0;
  const auto l = build_liouvillian(Operator::zero(b), only_cavity_loss(g), b);
  const auto rho0 = DensityMatrix::pure(b, b.index(1, Level::S0, Level::S0));
  const double times[] = {0.01 / g, 0.1 / g, 1.0 / g};
  const auto traj = propagate(l, rho0, times);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    CHECK(std::abs(traj.states[k].population(b.index(1, Level::S0, Level::S0)) - std::exp(-g * times[k])) <= 1e-8);
  }
}

TEST_CASE("birth-death cavity steady state") {
  RateParams r;
  r.gamma_p = 10.0;
  r.gamma_c = 50.0;
  // molecular losses only make the steady state unique; H = 0 keeps the
  // photon ladder decoupled from them
  r.gamma_d = 1.0;
  r.gamma_a = 1.0;
  r.gamma_ic = 1e-4;
  for (int n_max : {3, 5}) {
    const auto b = build_basis(n_max);
    const auto ss = steady_state(build_liouvillian(Operator::zero(b), r, b));
    const auto pops = populations(ss, b);
    CHECK(pops.mean_photons == doctest::Approx(oracle::birth_death_mean(10.0, 50.0, n_max)).epsilon(1e-10));
    CHECK(std::abs(pops.mean_photons - 0.25) <= 2e-2);
    for (int n = 0; n < n_max; ++n) {
      const double ratio = ss.population(b.index(n + 1, Level::S0, Level::S0)) / ss.population(b.index(n, Level::S0, Level::S0));
      CHECK(ratio == doctest::Approx(0.2).epsilon(1e-9));
    }
  }
  CHECK(oracle::birth_death_mean(10.0, 50.0, 3) == doctest::Approx(0.243590).epsilon(1e-6));
}

TEST_CASE("isolated acceptor triplet yield") {
  const auto b = build_basis(1);
  RateParams r;
  r.gamma_isc = 0.48;
  r.gamma_a = 1.0;
  const auto l = build_liouvillian(Operator::zero(b), r, b);
  const auto rho0 = DensityMatrix::pure(b, b.index(0, Level::S0, Level::S1));
  const double times[] = {100.0};
  const auto p = populations(propagate(l, rho0, times).states[0], b);
  CHECK(p.p_acceptor_t1 == doctest::Approx(0.48 / 1.48).epsilon(1e-10));
  CHECK(p.p_acceptor_t1 == doctest::Approx(0.3243).epsilon(1e-4));
}

TEST_CASE("diagonal dynamics match the classical rate equation") {
  // four states closed under the jumps: |1,S0,S0>, |0,S0,S1>, |0,S0,T1>, |0,S0,S0>
  const auto b = build_basis(1);
  RateParams r;
  r.gamma_c = 5.0;
  r.gamma_a = 1.0;
  r.gamma_isc = 0.48;
  r.gamma_ic = 0.3;
  const auto l = build_liouvillian(Operator::zero(b), r, b);
  const int s[] = {b.index(1, Level::S0, Level::S0), b.index(0, Level::S0, Level::S1), b.index(0, Level::S0, Level::T1),
                   b.index(0, Level::S0, Level::S0)};
  const auto rho0 = mixture(b, {{s[0], 0.6}, {s[1], 0.4}});
  std::vector<std::vector<double>> w(4, std::vector<double>(4, 0.0));
  w[3][0] = r.gamma_c;
  w[3][1] = r.gamma_a;
  w[2][1] = r.gamma_isc;
  w[3][2] = r.gamma_ic;
  const double times[] = {0.05, 0.5, 2.0, 7.0};
  const auto traj = propagate(l, rho0, times);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const auto p = oracle::rk4_master(w, {0.6, 0.4, 0.0, 0.0}, times[k], 20000);
    for (int i = 0; i < 4; ++i) CHECK(traj.states[k].population(s[i]) == doctest::Approx(p[i]).epsilon(1e-9));
  }

  // pumped photon ladder at n_max = 3
  const auto b3 = build_basis(3);
  RateParams bd;
  bd.gamma_p = 10.0;
  bd.gamma_c = 50.0;
  const auto l3 = build_liouvillian(Operator::zero(b3), bd, b3);
  std::vector<std::vector<double>> wl(4, std::vector<double>(4, 0.0));
  for (int n = 0; n < 3; ++n) {
    wl[n + 1][n] = (n + 1) * bd.gamma_p;
    wl[n][n + 1] = (n + 1) * bd.gamma_c;
  }
  const double t3[] = {0.01, 0.05, 0.3};
  const auto traj3 = propagate(l3, DensityMatrix::ground(b3), t3);
  for (std::size_t k = 0; k < traj3.size(); ++k) {
    const auto p = oracle::rk4_master(wl, {1.0, 0.0, 0.0, 0.0}, t3[k], 20000);
    for (int n = 0; n < 4; ++n) {
      CHECK(traj3.states[k].population(b3.index(n, Level::S0, Level::S0)) == doctest::Approx(p[n]).epsilon(1e-9));
    }
  }
}

TEST_CASE("spectral and reference propagation agree") {
  const auto b = build_basis(2);
  const auto h = build_jc_hamiltonian(*device_preset("mechanism2"), b);
  const auto rates = *rate_preset("rates-default");
  const auto l = build_liouvillian(h, rates, b);
  const auto lr = reference::build_liouvillian(h, rates, b);
  const double times[] = {0.5, 2.0};
  const auto fast = propagate(l, DensityMatrix::ground(b), times);
  const auto slow = reference::propagate(lr, DensityMatrix::ground(b), times);
  // the reference expm carries roundoff of order t ||G|| eps ~ 1e-9 here
  for (std::size_t k = 0; k < fast.size(); ++k) {
    CHECK((fast.states[k].matrix() - slow.states[k].matrix()).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("semigroup property on random small systems") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> e(1.6, 2.5), j(0.0, 0.2), g(0.0, 5.0);
  const auto b = build_basis(1);
  for (int trial = 0; trial < 6; ++trial) {
    DeviceParams d{e(rng), 1.5, e(rng), e(rng), e(rng), j(rng), j(rng), 0.1 * j(rng)};
    RateParams r;
    r.gamma_c = g(rng) + 1.0;
    r.gamma_p = 0.2 * r.gamma_c;
    r.gamma_d = g(rng);
    r.gamma_a = g(rng);
    r.gamma_isc = g(rng);
    r.gamma_ic = 0.01 * g(rng);
    const auto l = build_liouvillian(build_jc_hamiltonian(d, b), r, b);
    const double t1 = 0.3, t2 = 1.1;
    const auto mid = Propagator(l, DensityMatrix::ground(b)).evolve(t1);
    const auto two_step = Propagator(l, mid).evolve(t2 - t1);
    const auto direct = Propagator(l, DensityMatrix::ground(b)).evolve(t2);
    CHECK((two_step.matrix() - direct.matrix()).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("trace and positivity over nine decades") {
  const auto l = m1_generator(2);
  const auto times = [] {
    std::vector<double> t;
    for (int k = -3; k <= 9; ++k) t.push_back(std::pow(10.0, k));
    return t;
  }();
  const auto traj = propagate(l, DensityMatrix::ground(l.basis()), times);
  for (const auto& s : traj.states) {
    CHECK(std::abs(s.matrix().trace().real() - 1.0) <= 1e-9);
    CHECK(s.min_eigenvalue() >= -1e-9);
  }
  // the long-time limit is the steady state
  const auto ss = steady_state(l);
  CHECK((traj.states.back().matrix() - ss.matrix()).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("time grid validation") {
  const auto l = m1_generator(1);
  const auto g = DensityMatrix::ground(l.basis());
  const double dup[] = {1.0, 1.0};
  const double neg[] = {-1.0, 1.0};
  CHECK(code_of([&] { propagate(l, g, dup); }) == Errc::DomainError);
  CHECK(code_of([&] { propagate(l, g, neg); }) == Errc::DomainError);
  CHECK(code_of([&] { Propagator(l, DensityMatrix::ground(build_basis(2))); }) == Errc::DimensionMismatch);
}

// At gamma_p / gamma_C = 0.2 the photon ladder truncation alone moves <n> by
// ~0.018 between n_max = 2 and 3, so a 1e-3 criterion needs n_max >= 5.
TEST_CASE("table devices are converged in the cutoff at n_max = 2" * doctest::may_fail()) {
  const auto rates = *rate_preset("rates-default");
  for (const char* name : {"mechanism1", "mechanism2"}) {
    CAPTURE(name);
    const auto s = charge_relax_scenario(*device_preset(name), rates, 100.0, 1e8);
    CHECK(check_cutoff(s, run_scenario(s)).converged);
  }
}

TEST_CASE("cutoff error shrinks geometrically") {
  const auto rates = *rate_preset("rates-default");
  auto s = charge_relax_scenario(*device_preset("mechanism2"), rates, 20.0, 1e3);
  std::vector<double> change;
  for (int n_max : {2, 3, 4}) {
    s.n_max = n_max;
    const auto c = check_cutoff(s, run_scenario(s));
    CHECK(c.n_max == n_max);
    CHECK(c.converged == (c.max_change < kCutoffTolerance));
    change.push_back(c.max_change);
  }
  // birth-death truncation oracle for <n>
  const double bd = oracle::birth_death_mean(10.0, 50.0, 3) - oracle::birth_death_mean(10.0, 50.0, 2);
  CHECK(change[0] == doctest::Approx(bd).epsilon(0.1));
  CHECK(change[1] < 0.35 * change[0]);
  CHECK(change[2] < 0.35 * change[1]);
}

TEST_CASE("steady states") {
  const auto b = build_basis(2);
  RateParams loss = *rate_preset("rates-default");
  loss.gamma_p = 0.0;
  const auto h = build_jc_hamiltonian(*device_preset("cavity3"), b);
  const auto g = steady_state(build_liouvillian(h, loss, b));
  CHECK(g.population(0) == doctest::Approx(1.0).epsilon(1e-10));

  RateParams hot = *rate_preset("rates-default");
  hot.gamma_p = hot.gamma_c;
  CHECK(code_of([&] { steady_state(build_liouvillian(h, hot, b)); }) == Errc::PreconditionViolation);

  const auto none = build_liouvillian(Operator::zero(b), RateParams{}, b);
  CHECK(code_of([&] { steady_state(none); }) == Errc::NonUniqueSteadyState);
  CHECK(kernel_dimension(none) == b.dim() * b.dim());

  const auto l = m1_generator(2);
  const auto ss = steady_state(l);
  CHECK((l.generator() * vectorize(ss.matrix())).norm() <= 1e-9 * l.generator().cwiseAbs().maxCoeff());
  CHECK(kernel_dimension(l) == 1);
  // regression value for the table Mechanism-1 device under continuous pumping
  CHECK(populations(ss, b).p_acceptor_t1 == doctest::Approx(0.269346788).epsilon(1e-6));
}

// The table device only reaches p_T ~ 0.27 in the steady state and ~4e-3 after
// 100 ns; the ISC funnel is slow compared with the singlet losses.
TEST_CASE("mechanism 1 charges the triplet almost completely" * doctest::may_fail()) {
  const auto l = m1_generator(2);
  CHECK(populations(steady_state(l), l.basis()).p_acceptor_t1 >= 0.9);
  const double t[] = {100.0};
  CHECK(populations(propagate(l, DensityMatrix::ground(l.basis()), t).states[0], l.basis()).p_acceptor_t1 >= 0.9);
}

TEST_CASE("generator dump") {
  const auto l = m1_generator(1);
  std::ostringstream out;
  write_generator_csv(l, out);
  std::istringstream in(out.str());
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (rows == 0 || rows == 77) {
      std::istringstream ls(line);
      std::string field;
      std::vector<double> v;
      while (std::getline(ls, field, ',')) v.push_back(parse_double(field, "dump"));
      REQUIRE(v.size() == static_cast<std::size_t>(2 * l.generator().cols()));
      for (int c = 0; c < l.generator().cols(); ++c) {
        CHECK(v[2 * c] == l.generator()(rows, c).real());
        CHECK(v[2 * c + 1] == l.generator()(rows, c).imag());
      }
    }
    ++rows;
  }
  CHECK(rows == l.generator().rows());
}
