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

#include "qbsim/hilbert.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "qbsim/error.hpp"

namespace qbsim {

const char* to_string(Errc code) {
  switch (code) {
    case Errc::InvalidCutoff: return "invalid cutoff";
    case Errc::InvalidLevel: return "invalid level";
    case Errc::DimensionMismatch: return "dimension mismatch";
    case Errc::DomainError: return "domain error";
    case Errc::InvalidRate: return "invalid rate";
    case Errc::InvalidState: return "invalid state";
    case Errc::NumericalFailure: return "numerical failure";
    case Errc::NonUniqueSteadyState: return "non-unique steady state";
    case Errc::PreconditionViolation: return "precondition violation";
    case Errc::AmbiguousLabeling: return "ambiguous labeling";
    case Errc::ResonanceNotBracketed: return "resonance not bracketed";
    case Errc::FitDomain: return "fit domain";
    case Errc::InsufficientData: return "insufficient data";
    case Errc::IncompleteScenario: return "incomplete scenario";
    case Errc::Underdetermined: return "underdetermined";
    case Errc::NonFiniteObjective: return "non-finite objective";
    case Errc::Config: return "config";
  }
  return "unknown";
}

const char* to_string(Level level) {
  switch (level) {
    case Level::S0: return "S0";
    case Level::T1: return "T1";
    case Level::S1: return "S1";
  }
  return "?";
}

namespace {

int donor_slot(Level level) {
  switch (level) {
    case Level::S0: return 0;
    case Level::S1: return 1;
    case Level::T1: break;
  }
  throw Error(Errc::InvalidLevel, "donor has no T1 level");
}

int acceptor_slot(Level level) {
  switch (level) {
    case Level::S0: return 0;
    case Level::T1: return 1;
    case Level::S1: return 2;
  }
  throw Error(Errc::InvalidLevel, "unknown acceptor level");
}

constexpr Level kDonorLevels[] = {Level::S0, Level::S1};
constexpr Level kAcceptorLevels[] = {Level::S0, Level::T1, Level::S1};

void require_same_basis(const CompositeBasis& a, const CompositeBasis& b) {
  if (!(a == b)) {
    throw Error(Errc::DimensionMismatch, "operators built on cutoffs n_max=" + std::to_string(a.n_max()) +
                                             " and n_max=" + std::to_string(b.n_max()));
  }
}

}  // namespace

CompositeBasis::CompositeBasis(int n_max) : n_max_(n_max) {
  if (n_max < 1) throw Error(Errc::InvalidCutoff, "n_max must be >= 1, got " + std::to_string(n_max));
}

int CompositeBasis::index(int photons, Level donor, Level acceptor) const {
  if (photons < 0 || photons > n_max_) {
    throw Error(Errc::DimensionMismatch, "photon number " + std::to_string(photons) + " outside [0, n_max]");
  }
  return photons * kMolecularDim + donor_slot(donor) * 3 + acceptor_slot(acceptor);
}

BasisLabel CompositeBasis::label(int index) const {
  if (index < 0 || index >= dim()) throw Error(Errc::DimensionMismatch, "basis index out of range");
  const int molecular = index % kMolecularDim;
  return {index / kMolecularDim, kDonorLevels[molecular / 3], kAcceptorLevels[molecular % 3]};
}

CompositeBasis build_basis(int n_max) { return CompositeBasis(n_max); }

Operator::Operator(const CompositeBasis& basis, Matrix entries) : basis_(basis), m_(std::move(entries)) {
  if (m_.rows() != basis_.dim() || m_.cols() != basis_.dim()) {
    throw Error(Errc::DimensionMismatch, "operator is " + std::to_string(m_.rows()) + "x" +
                                             std::to_string(m_.cols()) + ", basis dim is " +
                                             std::to_string(basis_.dim()));
  }
}

Operator Operator::zero(const CompositeBasis& basis) { return {basis, Matrix::Zero(basis.dim(), basis.dim())}; }

Operator Operator::identity(const CompositeBasis& basis) {
  return {basis, Matrix::Identity(basis.dim(), basis.dim())};
}

Operator& Operator::operator+=(const Operator& rhs) {
  require_same_basis(basis_, rhs.basis_);
  m_ += rhs.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& rhs) {
  require_same_basis(basis_, rhs.basis_);
  m_ -= rhs.m_;
  return *this;
}

Operator operator*(const Operator& lhs, const Operator& rhs) {
  require_same_basis(lhs.basis_, rhs.basis_);
  return {lhs.basis_, lhs.m_ * rhs.m_};
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

Operator photon_annihilation(const CompositeBasis& basis) {
  Matrix m = Matrix::Zero(basis.dim(), basis.dim());
  for (int n = 1; n <= basis.n_max(); ++n) {
    for (int mol = 0; mol < CompositeBasis::kMolecularDim; ++mol) {
      m((n - 1) * CompositeBasis::kMolecularDim + mol, n * CompositeBasis::kMolecularDim + mol) = std::sqrt(double(n));
    }
  }
  return {basis, std::move(m)};
}

Operator transition(const CompositeBasis& basis, Site site, Level from, Level to) {
  // Validate the labels up front so an illegal donor T1 fails even when
  // the loop below would never touch it.
  if (site == Site::Donor) {
    donor_slot(from);
    donor_slot(to);
  }
  Matrix m = Matrix::Zero(basis.dim(), basis.dim());
  for (int n = 0; n <= basis.n_max(); ++n) {
    if (site == Site::Donor) {
      for (Level a : kAcceptorLevels) m(basis.index(n, to, a), basis.index(n, from, a)) = 1.0;
    } else {
      for (Level d : kDonorLevels) m(basis.index(n, d, to), basis.index(n, d, from)) = 1.0;
    }
  }
  return {basis, std::move(m)};
}

Operator projector(const CompositeBasis& basis, Site site, Level level) {
  return transition(basis, site, level, level);
}

Operator excitation_number(const CompositeBasis& basis) {
  Matrix m = Matrix::Zero(basis.dim(), basis.dim());
  for (int i = 0; i < basis.dim(); ++i) {
    const BasisLabel l = basis.label(i);
    m(i, i) = l.photons + (l.donor == Level::S1 ? 1 : 0) + (l.acceptor == Level::S0 ? 0 : 1);
  }
  return {basis, std::move(m)};
}

DensityMatrix::DensityMatrix(const CompositeBasis& basis, Matrix entries, const StateTolerances& tol)
    : basis_(basis), m_(std::move(entries)) {
  if (m_.rows() != basis_.dim() || m_.cols() != basis_.dim()) {
    throw Error(Errc::DimensionMismatch, "density matrix does not match basis dimension");
  }
  const double asym = (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
  if (!(asym <= tol.hermiticity)) {
    throw Error(Errc::InvalidState, "density matrix not Hermitian (max asymmetry " + std::to_string(asym) + ")");
  }
  const double trace_err = std::abs(m_.trace() - Complex(1.0));
  if (!(trace_err <= tol.trace)) {
    throw Error(Errc::InvalidState, "density matrix trace deviates from 1 by " + std::to_string(trace_err));
  }
  const double lowest = min_eigenvalue();
  if (!(lowest >= -tol.positivity)) {
    throw Error(Errc::InvalidState, "density matrix has eigenvalue " + std::to_string(lowest));
  }
}

DensityMatrix DensityMatrix::pure(const CompositeBasis& basis, int index) {
  Matrix m = Matrix::Zero(basis.dim(), basis.dim());
  basis.label(index);
  m(index, index) = 1.0;
  return {basis, std::move(m)};
}

Complex DensityMatrix::expectation(const Operator& op) const {
  if (!(op.basis() == basis_)) throw Error(Errc::DimensionMismatch, "operator and state on different cutoffs");
  return (m_ * op.matrix()).trace();
}

double DensityMatrix::min_eigenvalue() const {
  const Matrix herm = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace qbsim
