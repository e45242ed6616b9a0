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

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace qbsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

enum class Site { Donor, Acceptor };

/// Molecular levels. The donor only uses S0 and S1; the acceptor uses all three.
enum class Level { S0, T1, S1 };

const char* to_string(Level level);

struct BasisLabel {
  int photons = 0;
  Level donor = Level::S0;
  Level acceptor = Level::S0;

  friend bool operator==(const BasisLabel&, const BasisLabel&) = default;
};

/// Truncated product space |n, d, a> with n in [0, n_max], d in {S0, S1},
/// a in {S0, T1, S1}. Flat index is n*6 + d*3 + a; index 0 is the ground
/// state |0, S0, S0>.
class CompositeBasis {
 public:
  static constexpr int kMolecularDim = 6;

  explicit CompositeBasis(int n_max);

  int n_max() const noexcept { return n_max_; }
  int dim() const noexcept { return (n_max_ + 1) * kMolecularDim; }

  int index(int photons, Level donor, Level acceptor) const;
  int index(const BasisLabel& label) const { return index(label.photons, label.donor, label.acceptor); }
  BasisLabel label(int index) const;

  static constexpr int ground_index() noexcept { return 0; }

  friend bool operator==(const CompositeBasis&, const CompositeBasis&) = default;

 private:
  int n_max_;
};

CompositeBasis build_basis(int n_max);

/// Dense operator bound to the cutoff it was built on. Arithmetic between
/// operators from different cutoffs throws instead of resizing.
class Operator {
 public:
  Operator(const CompositeBasis& basis, Matrix entries);

  static Operator zero(const CompositeBasis& basis);
  static Operator identity(const CompositeBasis& basis);

  const CompositeBasis& basis() const noexcept { return basis_; }
  int dim() const noexcept { return basis_.dim(); }
  const Matrix& matrix() const noexcept { return m_; }

  Operator adjoint() const { return {basis_, m_.adjoint()}; }

  Operator& operator+=(const Operator& rhs);
  Operator& operator-=(const Operator& rhs);
  Operator& operator*=(Complex s) {
    m_ *= s;
    return *this;
  }

  friend Operator operator+(Operator lhs, const Operator& rhs) { return lhs += rhs; }
  friend Operator operator-(Operator lhs, const Operator& rhs) { return lhs -= rhs; }
  friend Operator operator*(const Operator& lhs, const Operator& rhs);
  friend Operator operator*(Operator op, Complex s) { return op *= s; }
  friend Operator operator*(Complex s, Operator op) { return op *= s; }

  Complex operator()(int row, int col) const { return m_(row, col); }

 private:
  CompositeBasis basis_;
  Matrix m_;
};

Operator commutator(const Operator& a, const Operator& b);

/// a (x) 1_D (x) 1_A.
Operator photon_annihilation(const CompositeBasis& basis);

/// 1_C (x) |to><from| on one site (x) identity on the other.
Operator transition(const CompositeBasis& basis, Site site, Level from, Level to);

/// |level><level| on one site.
Operator projector(const CompositeBasis& basis, Site site, Level level);

/// a^dag a + |S1><S1|_D + |S1><S1|_A + |T1><T1|_A.
Operator excitation_number(const CompositeBasis& basis);

struct StateTolerances {
  double hermiticity = 1e-10;
  double trace = 1e-9;
  double positivity = 1e-9;
};

/// Validated density matrix on a CompositeBasis.
class DensityMatrix {
 public:
  /// Throws Errc::InvalidState when the matrix is not Hermitian, not unit
  /// trace, or has an eigenvalue below -tol.positivity.
  DensityMatrix(const CompositeBasis& basis, Matrix entries, const StateTolerances& tol = {});

  static DensityMatrix pure(const CompositeBasis& basis, int index);
  static DensityMatrix ground(const CompositeBasis& basis) { return pure(basis, 0); }

  const CompositeBasis& basis() const noexcept { return basis_; }
  int dim() const noexcept { return basis_.dim(); }
  const Matrix& matrix() const noexcept { return m_; }

  Complex expectation(const Operator& op) const;
  double population(int index) const { return m_(index, index).real(); }
  double min_eigenvalue() const;

 private:
  CompositeBasis basis_;
  Matrix m_;
};

}  // namespace qbsim
