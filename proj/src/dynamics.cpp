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

#include "qbsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "qbsim/error.hpp"

namespace qbsim {

namespace {

constexpr double kKernelTol = 1e-13;
constexpr double kConditionLimit = 1e12;

void check_hamiltonian(const Operator& h, const CompositeBasis& basis) {
  if (!(h.basis() == basis)) {
    throw Error(Errc::DimensionMismatch,
                fmt::format("hamiltonian has dim {}, basis has dim {}", h.dim(), basis.dim()));
  }
  const Matrix& m = h.matrix();
  if (!m.allFinite()) throw Error(Errc::DomainError, "hamiltonian has non-finite entries");
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw Error(Errc::DomainError, "hamiltonian is not Hermitian");
  }
}

double inf_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double one_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

std::vector<ChannelRecord> records(const std::vector<JumpChannel>& channels) {
  std::vector<ChannelRecord> out;
  for (const auto& c : channels) out.push_back({c.label, c.rate});
  return out;
}

void check_times(std::span<const double> times) {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || times[k] < 0.0) {
      throw Error(Errc::DomainError, fmt::format("time {} is negative or not finite", times[k]));
    }
    if (k > 0 && !(times[k] > times[k - 1])) {
      throw Error(Errc::DomainError, "times must be strictly increasing");
    }
  }
}

DensityMatrix to_state(const CompositeBasis& basis, Matrix rho, double t) {
  rho = 0.5 * (rho + rho.adjoint()).eval();
  try {
    return DensityMatrix(basis, std::move(rho));
  } catch (const Error& e) {
    throw Error(Errc::NumericalFailure, fmt::format("state at t = {} ns is not physical ({})", t, e.what()));
  }
}

}  // namespace

std::vector<JumpChannel> jump_channels(const RateParams& rates, const CompositeBasis& basis) {
  validate(rates);
  Operator a = photon_annihilation(basis);
  std::vector<JumpChannel> all;
  all.push_back({"pump", rates.gamma_p, a.adjoint()});
  all.push_back({"cavity_loss", rates.gamma_c, a});
  all.push_back({"donor_loss", rates.gamma_d, transition(basis, Site::Donor, Level::S1, Level::S0)});
  all.push_back({"acceptor_loss", rates.gamma_a, transition(basis, Site::Acceptor, Level::S1, Level::S0)});
  all.push_back({"internal_conversion", rates.gamma_ic, transition(basis, Site::Acceptor, Level::T1, Level::S0)});
  all.push_back(
      {"intersystem_crossing", rates.gamma_isc, transition(basis, Site::Acceptor, Level::S1, Level::T1)});
  std::vector<JumpChannel> out;
  for (auto& c : all) {
    if (c.rate > 0.0) out.push_back(std::move(c));
  }
  return out;
}

Liouvillian::Liouvillian(const CompositeBasis& basis, Matrix generator, std::vector<ChannelRecord> channels)
    : basis_(basis), g_(std::move(generator)), channels_(std::move(channels)) {
  const int n = basis_.dim() * basis_.dim();
  if (g_.rows() != n || g_.cols() != n) {
    throw Error(Errc::DimensionMismatch, fmt::format("generator is {}x{}, expected {}x{}", g_.rows(), g_.cols(), n, n));
  }
}

double Liouvillian::rate(const std::string& label) const {
  for (const auto& c : channels_) {
    if (c.label == label) return c.rate;
  }
  return 0.0;
}

Liouvillian build_liouvillian(const Operator& hamiltonian, const RateParams& rates, const CompositeBasis& basis) {
  check_hamiltonian(hamiltonian, basis);
  const auto channels = jump_channels(rates, basis);
  const int d = basis.dim();
  const long n = static_cast<long>(d) * d;

  // drho/dt = K rho + rho K^dag + sum L rho L^dag with K = -(i/hbar) H - 1/2 sum g L^dag L.
  Matrix k_mat = Complex(0.0, -1.0 / kHbarEvNs) * hamiltonian.matrix();
  std::vector<Matrix> jumps;
  for (const auto& c : channels) {
    k_mat -= 0.5 * c.rate * (c.jump.matrix().adjoint() * c.jump.matrix());
    jumps.push_back(std::sqrt(c.rate) * c.jump.matrix());
  }

  Matrix g = Matrix::Zero(n, n);
#pragma omp parallel for schedule(static)
  for (long col = 0; col < n; ++col) {
    const int k = static_cast<int>(col % d);
    const int l = static_cast<int>(col / d);
    // K rho: d_jl K_ik
    for (int i = 0; i < d; ++i) g(i + static_cast<long>(l) * d, col) += k_mat(i, k);
    // rho K^dag: d_ik conj(K_jl)
    for (int j = 0; j < d; ++j) g(k + static_cast<long>(j) * d, col) += std::conj(k_mat(j, l));
    // L rho L^dag: L_ik conj(L_jl)
    for (const auto& lm : jumps) {
      for (int j = 0; j < d; ++j) {
        const Complex ljl = std::conj(lm(j, l));
        if (ljl == Complex(0.0)) continue;
        for (int i = 0; i < d; ++i) {
          const Complex lik = lm(i, k);
          if (lik != Complex(0.0)) g(i + static_cast<long>(j) * d, col) += lik * ljl;
        }
      }
    }
  }
  return Liouvillian(basis, std::move(g), records(channels));
}

Vector vectorize(const Matrix& rho) {
  return Eigen::Map<const Vector>(rho.data(), rho.size());
}

Matrix unvectorize(const Vector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw Error(Errc::DimensionMismatch, fmt::format("vector of size {} is not {}^2", v.size(), dim));
  }
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Propagator::Propagator(const Liouvillian& liouvillian, const DensityMatrix& rho0) : basis_(liouvillian.basis()) {
  if (!(rho0.basis() == liouvillian.basis())) {
    throw Error(Errc::DimensionMismatch, "initial state and generator use different cutoffs");
  }
  const Matrix& g = liouvillian.generator();
  const int d = basis_.dim();
  const int n = d * d;
  const Vector v0 = vectorize(rho0.matrix());

  // Coordinates reachable from the initial support through nonzero entries.
  // The trace-one diagonal is always included so the kernel is captured.
  std::vector<char> seen(n, 0);
  std::deque<int> queue;
  auto visit = [&](int idx) {
    if (!seen[idx]) {
      seen[idx] = 1;
      queue.push_back(idx);
    }
  };
  for (int i = 0; i < n; ++i) {
    if (v0[i] != Complex(0.0)) visit(i);
  }
  while (!queue.empty()) {
    const int j = queue.front();
    queue.pop_front();
    for (int i = 0; i < n; ++i) {
      if (g(i, j) != Complex(0.0)) visit(i);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (seen[i]) coords_.push_back(i);
  }
  const int m = static_cast<int>(coords_.size());
  reduced_.resize(m, m);
  initial_.resize(m);
  for (int b = 0; b < m; ++b) {
    initial_[b] = v0[coords_[b]];
    for (int a = 0; a < m; ++a) reduced_(a, b) = g(coords_[a], coords_[b]);
  }
  if (!reduced_.allFinite()) throw Error(Errc::NumericalFailure, "generator has non-finite entries");

  // Trace functional on the reduced coordinates.
  Vector trace_row = Vector::Zero(m);
  for (int a = 0; a < m; ++a) {
    if (coords_[a] % d == coords_[a] / d) trace_row[a] = 1.0;
  }

  Eigen::ComplexEigenSolver<Matrix> es(reduced_);
  if (es.info() != Eigen::Success) {
    method_ = Method::MatrixExponential;
    condition_ = std::numeric_limits<double>::infinity();
    return;
  }
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();

  const double scale = std::max(inf_norm(reduced_), 1e-300);
  std::vector<int> kernel;
  for (int k = 0; k < m; ++k) {
    if (std::abs(eigenvalues_[k]) < kKernelTol * scale) {
      eigenvalues_[k] = 0.0;
      kernel.push_back(k);
    } else if (eigenvalues_[k].real() > 0.0) {
      eigenvalues_[k] = Complex(0.0, eigenvalues_[k].imag());
    }
  }

  if (kernel.size() == 1 && m > 1) {
    // Replace the kernel vector by an accurately solved one and make the
    // decaying modes traceless, so populations stay normalised.
    Matrix a = reduced_;
    int row = 0;
    while (trace_row[row] == Complex(0.0)) ++row;
    a.row(row) = scale * trace_row.transpose();
    Vector rhs = Vector::Zero(m);
    rhs[row] = scale;
    Vector ss = a.partialPivLu().solve(rhs);
    if (ss.allFinite()) {
      eigenvectors_.col(kernel[0]) = ss;
      for (int k = 0; k < m; ++k) {
        if (k == kernel[0]) continue;
        const Complex tr = trace_row.dot(eigenvectors_.col(k));
        eigenvectors_.col(k) -= tr * ss;
      }
    }
  }

  Eigen::PartialPivLU<Matrix> lu(eigenvectors_);
  Matrix inv = lu.inverse();
  condition_ = one_norm(eigenvectors_) * one_norm(inv);
  if (!std::isfinite(condition_) || condition_ > kConditionLimit) {
    method_ = Method::MatrixExponential;
    return;
  }
  coefficients_ = inv * initial_;
}

DensityMatrix Propagator::evolve(double t_ns) const {
  if (!std::isfinite(t_ns) || t_ns < 0.0) throw Error(Errc::DomainError, "time must be finite and >= 0");
  Vector red;
  if (method_ == Method::Spectral) {
    Vector w(coefficients_.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = coefficients_[k] * std::exp(eigenvalues_[k] * t_ns);
    red = eigenvectors_ * w;
  } else {
    Matrix gt = reduced_ * t_ns;
    red = gt.exp() * initial_;
  }
  const int d = basis_.dim();
  Vector full = Vector::Zero(static_cast<Eigen::Index>(d) * d);
  for (std::size_t a = 0; a < coords_.size(); ++a) full[coords_[a]] = red[a];
  if (!full.allFinite()) throw Error(Errc::NumericalFailure, fmt::format("non-finite state at t = {} ns", t_ns));
  return to_state(basis_, unvectorize(full, d), t_ns);
}

Trajectory propagate(const Liouvillian& liouvillian, const DensityMatrix& rho0, std::span<const double> times) {
  check_times(times);
  const Propagator prop(liouvillian, rho0);
  const long n = static_cast<long>(times.size());
  std::vector<std::optional<DensityMatrix>> states(n);
  std::vector<std::string> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    try {
      states[k].emplace(prop.evolve(times[k]));
    } catch (const std::exception& e) {
      errors[k] = e.what();
    }
  }
  Trajectory traj;
  for (long k = 0; k < n; ++k) {
    if (!states[k]) throw Error(Errc::NumericalFailure, errors[k]);
    traj.times.push_back(times[k]);
    traj.states.push_back(std::move(*states[k]));
    traj.phase.push_back(0);
  }
  if (!times.empty()) traj.phases.push_back({times.front(), times.back(), liouvillian.rate("pump") > 0.0, false});
  return traj;
}

int kernel_dimension(const Liouvillian& liouvillian) {
  const Matrix& g = liouvillian.generator();
  const double scale = std::max(inf_norm(g), 1e-300);
  Eigen::ComplexEigenSolver<Matrix> es(g, false);
  int count = 0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    if (std::abs(es.eigenvalues()[k]) < kKernelTol * scale) ++count;
  }
  return count;
}

DensityMatrix steady_state(const Liouvillian& liouvillian) {
  const double pump = liouvillian.rate("pump");
  const double drain = liouvillian.rate("cavity_loss");
  if (pump > 0.0 && pump >= drain) {
    throw Error(Errc::PreconditionViolation,
                fmt::format("pump rate {} GHz is not below cavity loss {} GHz; photon number grows to the cutoff",
                            pump, drain));
  }
  const Matrix& g = liouvillian.generator();
  const int d = liouvillian.dim();
  const int n = d * d;
  const double scale = std::max(inf_norm(g), 1e-300);

  // The ground-population row is a combination of the other population rows,
  // so it can carry the trace condition.
  Matrix a = g;
  a.row(0).setZero();
  for (int i = 0; i < d; ++i) a(0, i + i * d) = scale;
  Vector rhs = Vector::Zero(n);
  rhs[0] = scale;
  Eigen::PartialPivLU<Matrix> lu(a);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-14)) {
    const int kdim = kernel_dimension(liouvillian);
    if (kdim != 1) {
      throw Error(Errc::NonUniqueSteadyState, fmt::format("generator kernel has dimension {}", kdim));
    }
  }
  Vector x = lu.solve(rhs);
  if (!x.allFinite()) throw Error(Errc::NumericalFailure, "steady-state solve produced non-finite values");
  const double residual = (g * x).cwiseAbs().maxCoeff();
  if (residual > 1e-8 * scale * std::max(1.0, x.cwiseAbs().maxCoeff())) {
    throw Error(Errc::NumericalFailure, fmt::format("steady-state residual {} too large", residual));
  }
  Matrix rho = unvectorize(x, d);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return to_state(liouvillian.basis(), std::move(rho), std::numeric_limits<double>::infinity());
}

void write_generator_csv(const Liouvillian& liouvillian, std::ostream& out) {
  const Matrix& g = liouvillian.generator();
  std::string line;
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    line.clear();
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      if (j > 0) line += ',';
      line += fmt::format("{:.17g},{:.17g}", g(i, j).real(), g(i, j).imag());
    }
    line += '\n';
    out << line;
  }
}

namespace reference {

Liouvillian build_liouvillian(const Operator& hamiltonian, const RateParams& rates, const CompositeBasis& basis) {
  check_hamiltonian(hamiltonian, basis);
  const auto channels = jump_channels(rates, basis);
  const int d = basis.dim();
  const Matrix id = Matrix::Identity(d, d);
  const Matrix& h = hamiltonian.matrix();
  Matrix g = Complex(0.0, -1.0 / kHbarEvNs) *
             (Matrix(Eigen::kroneckerProduct(id, h)) - Matrix(Eigen::kroneckerProduct(h.transpose(), id)));
  for (const auto& c : channels) {
    const Matrix& l = c.jump.matrix();
    const Matrix ldl = l.adjoint() * l;
    g += c.rate * (Matrix(Eigen::kroneckerProduct(l.conjugate(), l)) -
                   0.5 * Matrix(Eigen::kroneckerProduct(id, ldl)) -
                   0.5 * Matrix(Eigen::kroneckerProduct(ldl.transpose(), id)));
  }
  return Liouvillian(basis, std::move(g), records(channels));
}

Trajectory propagate(const Liouvillian& liouvillian, const DensityMatrix& rho0, std::span<const double> times) {
  check_times(times);
  const int d = liouvillian.dim();
  const Vector v0 = vectorize(rho0.matrix());
  Trajectory traj;
  for (double t : times) {
    Matrix gt = liouvillian.generator() * t;
    Vector v = gt.exp() * v0;
    traj.times.push_back(t);
    traj.states.push_back(to_state(liouvillian.basis(), unvectorize(v, d), t));
    traj.phase.push_back(0);
  }
  if (!times.empty()) traj.phases.push_back({times.front(), times.back(), liouvillian.rate("pump") > 0.0, false});
  return traj;
}

}  // namespace reference

}  // namespace qbsim
