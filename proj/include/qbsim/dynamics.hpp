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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qbsim/hilbert.hpp"
#include "qbsim/model.hpp"

namespace qbsim {

struct ChannelRecord {
  std::string label;
  double rate = 0.0;  ///< GHz
};

/// A Lindblad jump channel: sqrt(rate) * jump.
struct JumpChannel {
  std::string label;
  double rate = 0.0;
  Operator jump;
};

/// Nonzero-rate channels in the fixed order pump, cavity_loss, donor_loss,
/// acceptor_loss, internal_conversion, intersystem_crossing.
std::vector<JumpChannel> jump_channels(const RateParams& rates, const CompositeBasis& basis);

/// Dense Lindblad generator acting on column-stacked density matrices,
/// vec(rho)[i + j*d] = rho(i, j). Units are ns^-1: the Hamiltonian enters as
/// -(i/hbar)[H, .] with hbar in eV ns.
class Liouvillian {
 public:
  Liouvillian(const CompositeBasis& basis, Matrix generator, std::vector<ChannelRecord> channels);

  const CompositeBasis& basis() const noexcept { return basis_; }
  int dim() const noexcept { return basis_.dim(); }
  const Matrix& generator() const noexcept { return g_; }
  const std::vector<ChannelRecord>& channels() const noexcept { return channels_; }

  /// Rate of a channel by label, 0 if the channel is absent.
  double rate(const std::string& label) const;

 private:
  CompositeBasis basis_;
  Matrix g_;
  std::vector<ChannelRecord> channels_;
};

/// OpenMP assembly: each generator column is filled independently from the
/// entry formula.
Liouvillian build_liouvillian(const Operator& hamiltonian, const RateParams& rates, const CompositeBasis& basis);

Vector vectorize(const Matrix& rho);
Matrix unvectorize(const Vector& v, int dim);

struct PhaseInfo {
  double start = 0.0;  ///< ns
  double end = 0.0;    ///< ns
  bool pump = false;
  bool cavity_open = false;
};

struct Trajectory {
  std::vector<double> times;  ///< ns
  std::vector<DensityMatrix> states;
  std::vector<int> phase;     ///< phase index per sample
  std::vector<PhaseInfo> phases;
  std::string description;

  std::size_t size() const noexcept { return times.size(); }
};

/// exp(G t) applied to one initial state. The generator is restricted to the
/// coordinates reachable from the support of rho0 through its nonzero
/// pattern (exact, the rest stays zero), then diagonalised once. If the
/// eigenbasis condition number exceeds 1e12 a scaling-and-squaring matrix
/// exponential is used per requested time instead.
class Propagator {
 public:
  enum class Method { Spectral, MatrixExponential };

  Propagator(const Liouvillian& liouvillian, const DensityMatrix& rho0);

  DensityMatrix evolve(double t_ns) const;

  Method method() const noexcept { return method_; }
  double condition_number() const noexcept { return condition_; }
  int reduced_dim() const noexcept { return static_cast<int>(coords_.size()); }

 private:
  CompositeBasis basis_;
  std::vector<int> coords_;  // positions of the reduced coordinates in vec(rho)
  Matrix reduced_;           // restricted generator
  Vector initial_;           // reduced vec(rho0)
  Method method_ = Method::Spectral;
  double condition_ = 0.0;
  Vector eigenvalues_;
  Matrix eigenvectors_;
  Vector coefficients_;
};

/// rho(t) at each requested time; times strictly increasing and >= 0.
/// Evaluated in parallel over times.
Trajectory propagate(const Liouvillian& liouvillian, const DensityMatrix& rho0, std::span<const double> times);

/// Trace-one kernel vector of the generator. Throws NonUniqueSteadyState
/// (with the kernel dimension) or PreconditionViolation when the pump is
/// not weaker than the cavity drain.
DensityMatrix steady_state(const Liouvillian& liouvillian);

/// Number of generator eigenvalues with |lambda| below 1e-13 * ||G||_inf.
int kernel_dimension(const Liouvillian& liouvillian);

/// Row-major dump, each entry written as "re,im".
void write_generator_csv(const Liouvillian& liouvillian, std::ostream& out);

namespace reference {

/// Serial Kronecker-product assembly:
/// -(i/hbar)(1 (x) H - H^T (x) 1) + sum_k g_k (conj(L) (x) L - 1/2 1 (x) L^dag L - 1/2 (L^dag L)^T (x) 1).
Liouvillian build_liouvillian(const Operator& hamiltonian, const RateParams& rates, const CompositeBasis& basis);

/// Full-space matrix exponential per time, serial.
Trajectory propagate(const Liouvillian& liouvillian, const DensityMatrix& rho0, std::span<const double> times);

}  // namespace reference

}  // namespace qbsim
