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

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qbsim/model.hpp"
#include "qbsim/observables.hpp"

namespace qbsim {

struct Bounds {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct MinimizeOptions {
  int max_iter = 4000;
  double x_tol = 1e-10;   ///< simplex diameter (inf-norm from the best vertex)
  double f_tol = 1e-16;   ///< objective spread across the simplex
  int restarts = 3;       ///< fresh simplices around the incumbent
  std::vector<double> initial_step;  ///< per-parameter; default 5% of |x0| (or 1e-3)
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Nelder-Mead with reflection, expansion, contraction and shrink; every
/// trial point is projected onto the bounds. Throws NonFiniteObjective
/// naming the offending point.
MinimizeResult minimize(const Objective& f, const Eigen::VectorXd& x0, std::span<const Bounds> bounds,
                        const MinimizeOptions& opts = {});

struct NamedValue {
  std::string name;
  double value = 0.0;
  double stderr_proxy = 0.0;
};

struct FitResult {
  std::vector<NamedValue> params;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  bool identifiable = true;
  std::vector<std::string> warnings;
  std::vector<NamedValue> residuals;  ///< per-feature sums of squares (J_T fit)
  DeviceParams device;                ///< init with the fitted values substituted

  double value(const std::string& name) const;
};

struct DispersionRecord {
  double theta_deg = 0.0;
  std::optional<BranchLabel> branch;  ///< LP, MP or UP; empty means untagged
  double energy_ev = 0.0;
  double weight = 1.0;
};

struct DispersionData {
  std::vector<DispersionRecord> records;
};

/// LP/MP/UP of the J_T = 0 three-oscillator model at each angle.
DispersionData synthesize_dispersion(const DeviceParams& device, std::span<const double> thetas_deg);

struct DispersionFitOptions {
  std::vector<std::string> free{"omega_c0", "j_d", "j_a"};
  bool free_exciton_energies = false;  ///< permits omega_d / omega_a in `free`
  MinimizeOptions minimizer;
};

/// Least squares over tagged branches of the 3x3 J_T = 0 block. Untagged
/// records are matched greedily by energy and a warning is attached.
FitResult fit_coupled_oscillator(const DispersionData& data, const DeviceParams& init,
                                 const DispersionFitOptions& opts = {});

struct FeatureWeights {
  double fluorescence = 1.0;
  double sharpness = 1.0;
  double phosphorescence = 1.0;
};

struct TripletFitOptions {
  double j_t_lo = 1e-4;  ///< eV
  double j_t_hi = 2e-2;  ///< eV
  FeatureWeights weights;
  std::size_t reference = 0;
  int prescan = 50;
  int n_max = 2;
  MinimizeOptions minimizer;
};

/// Scalar J_T fit of relative emission features. The search runs in
/// log10(J_T): a log-spaced pre-scan seeds a one-dimensional simplex.
FitResult fit_triplet_coupling(const FeatureTable& measured, std::span<const DeviceParams> devices,
                               const RateParams& rates, const TripletFitOptions& opts = {});

/// sqrt(diag(s^2 (J^T J)^-1)) from a central-difference Jacobian of the
/// residual vector, s^2 = SSR / (m - n). NaN when m <= n.
std::vector<double> stderr_proxy(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
                                 const Eigen::VectorXd& x, std::span<const double> steps);

}  // namespace qbsim
