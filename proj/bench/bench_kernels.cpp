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

// Parallel kernels against their serial references.
//   build/bench/bench_kernels --benchmark_filter=Liouvillian

#include <benchmark/benchmark.h>
#include <omp.h>

#include "qbsim/config.hpp"
#include "qbsim/dynamics.hpp"
#include "qbsim/protocols.hpp"

using namespace qbsim;

namespace {

const RateParams kRates = *rate_preset("rates-default");

template <bool Parallel>
void BM_Liouvillian(benchmark::State& state) {
  const auto b = build_basis(static_cast<int>(state.range(0)));
  const auto h = build_jc_hamiltonian(*device_preset("mechanism2"), b);
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(build_liouvillian(h, kRates, b));
    } else {
      benchmark::DoNotOptimize(reference::build_liouvillian(h, kRates, b));
    }
  }
  state.counters["dim"] = b.dim();
}

template <bool Parallel>
void BM_Propagate(benchmark::State& state) {
  const auto b = build_basis(static_cast<int>(state.range(0)));
  const auto l = build_liouvillian(build_jc_hamiltonian(*device_preset("mechanism2"), b), kRates, b);
  // the full-space reference loses ~t |G| eps of trace, so stay below 1 ns
  const auto times = logspace(1e-3, 1.0, 8);
  const auto rho0 = DensityMatrix::ground(b);
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(propagate(l, rho0, times));
    } else {
      benchmark::DoNotOptimize(reference::propagate(l, rho0, times));
    }
  }
}

template <bool Parallel>
void BM_Sweep(benchmark::State& state) {
  const Scenario s = charge_relax_scenario(*device_preset("mechanism2"), kRates, 100.0, 1e8);
  const auto grid = linspace(1.6, 2.1, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel) {
      benchmark::DoNotOptimize(sweep_cavity_energy(s, grid, 10.0));
    } else {
      benchmark::DoNotOptimize(reference::sweep_cavity_energy(s, grid, 10.0));
    }
  }
  state.counters["threads"] = omp_get_max_threads();
}

}  // namespace

BENCHMARK(BM_Liouvillian<false>)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Liouvillian<true>)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Propagate<false>)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Propagate<true>)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep<false>)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Sweep<true>)->Arg(16)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
