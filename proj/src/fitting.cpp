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

#include "qbsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "qbsim/error.hpp"
#include "qbsim/polaritons.hpp"
#include "qbsim/protocols.hpp"

namespace qbsim {

namespace {

std::string point_text(const Eigen::VectorXd& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) s += fmt::format("{}{:.17g}", i ? ", " : "", x[i]);
  return s + ")";
}

class Evaluator {
 public:
  Evaluator(const Objective& f, std::span<const Bounds> bounds) : f_(f), bounds_(bounds) {}

  Eigen::VectorXd project(Eigen::VectorXd x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], bounds_[i].lo, bounds_[i].hi);
    return x;
  }

  double operator()(const Eigen::VectorXd& x) const {
    const double v = f_(x);
    if (!std::isfinite(v)) {
      throw Error(Errc::NonFiniteObjective, fmt::format("objective is {} at {}", v, point_text(x)));
    }
    return v;
  }

 private:
  const Objective& f_;
  std::span<const Bounds> bounds_;
};

struct Simplex {
  std::vector<Eigen::VectorXd> v;
  std::vector<double> f;

  void sort() {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
    std::vector<Eigen::VectorXd> v2;
    std::vector<double> f2;
    for (std::size_t i : idx) {
      v2.push_back(v[i]);
      f2.push_back(f[i]);
    }
    v = std::move(v2);
    f = std::move(f2);
  }
};

// One Nelder-Mead descent; returns the iteration count and whether a
// tolerance was met.
std::pair<int, bool> descend(Simplex& s, const Evaluator& eval, const MinimizeOptions& opts, int budget) {
  const std::size_t n = s.v.size() - 1;
  int iter = 0;
  for (;; ++iter) {
    s.sort();
    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) diameter = std::max(diameter, (s.v[i] - s.v[0]).cwiseAbs().maxCoeff());
    if (diameter < opts.x_tol || s.f[n] - s.f[0] < opts.f_tol) return {iter, true};
    if (iter >= budget) return {iter, false};

    Eigen::VectorXd c = Eigen::VectorXd::Zero(s.v[0].size());
    for (std::size_t i = 0; i < n; ++i) c += s.v[i];
    c /= static_cast<double>(n);

    const Eigen::VectorXd xr = eval.project(c + (c - s.v[n]));
    const double fr = eval(xr);
    if (fr < s.f[0]) {
      const Eigen::VectorXd xe = eval.project(c + 2.0 * (xr - c));
      const double fe = eval(xe);
      if (fe < fr) {
        s.v[n] = xe;
        s.f[n] = fe;
      } else {
        s.v[n] = xr;
        s.f[n] = fr;
      }
      continue;
    }
    if (fr < s.f[n - 1]) {
      s.v[n] = xr;
      s.f[n] = fr;
      continue;
    }
    const bool outside = fr < s.f[n];
    const Eigen::VectorXd xc = eval.project(outside ? Eigen::VectorXd(c + 0.5 * (xr - c)) : Eigen::VectorXd(c + 0.5 * (s.v[n] - c)));
    const double fc = eval(xc);
    if (outside ? fc <= fr : fc < s.f[n]) {
      s.v[n] = xc;
      s.f[n] = fc;
      continue;
    }
    for (std::size_t i = 1; i <= n; ++i) {
      s.v[i] = eval.project(s.v[0] + 0.5 * (s.v[i] - s.v[0]));
      s.f[i] = eval(s.v[i]);
    }
  }
}

Simplex initial_simplex(const Eigen::VectorXd& x0, double f0, std::span<const Bounds> bounds,
                        const std::vector<double>& steps, const Evaluator& eval) {
  Simplex s;
  s.v.push_back(x0);
  s.f.push_back(f0);
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    double h = steps[i];
    Eigen::VectorXd x = x0;
    if (x0[i] + h > bounds[i].hi) h = -h;
    x[i] = x0[i] + h;
    x = eval.project(x);
    s.v.push_back(x);
    s.f.push_back(eval(x));
  }
  return s;
}

struct ParamSlot {
  const char* name;
  double DeviceParams::*member;
  Bounds bounds;
  double step;
};

const ParamSlot kDispersionSlots[] = {
    {"omega_c0", &DeviceParams::omega_c0, {0.1, 10.0}, 0.01},
    {"n_eff", &DeviceParams::n_eff, {1.0, 5.0}, 0.05},
    {"j_d", &DeviceParams::j_d, {0.0, 2.0}, 0.01},
    {"j_a", &DeviceParams::j_a, {0.0, 2.0}, 0.01},
    {"omega_d", &DeviceParams::omega_d, {0.1, 10.0}, 0.01},
    {"omega_a", &DeviceParams::omega_a, {0.1, 10.0}, 0.01},
};

const ParamSlot& slot(const std::string& name, bool exciton_energies) {
  for (const auto& s : kDispersionSlots) {
    if (name == s.name) {
      if ((name == "omega_d" || name == "omega_a") && !exciton_energies) {
        throw Error(Errc::DomainError, name + " is frozen unless exciton energies are freed explicitly");
      }
      return s;
    }
  }
  throw Error(Errc::DomainError, "unknown dispersion parameter '" + name + "'");
}

std::array<double, 3> singlet_energies(const DeviceParams& d, double theta) {
  const Eigen::Matrix3d h = single_excitation_hamiltonian(d, theta).topLeftCorner<3, 3>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(h, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()[0], es.eigenvalues()[1], es.eigenvalues()[2]};
}

int branch_slot(BranchLabel b) {
  switch (b) {
    case BranchLabel::LP: return 0;
    case BranchLabel::MP: return 1;
    case BranchLabel::UP: return 2;
    default: throw Error(Errc::DomainError, "dispersion records carry LP, MP or UP tags only");
  }
}

// Model energy paired with each record.
std::vector<double> matched_model(const DispersionData& data, const DeviceParams& d) {
  std::vector<double> out(data.records.size());
  std::vector<double> angles;
  for (const auto& r : data.records) {
    if (std::find(angles.begin(), angles.end(), r.theta_deg) == angles.end()) angles.push_back(r.theta_deg);
  }
  for (double theta : angles) {
    const auto e = singlet_energies(d, theta);
    std::vector<std::size_t> untagged;
    for (std::size_t k = 0; k < data.records.size(); ++k) {
      const auto& r = data.records[k];
      if (r.theta_deg != theta) continue;
      if (r.branch) {
        out[k] = e[branch_slot(*r.branch)];
      } else {
        untagged.push_back(k);
      }
    }
    std::array<bool, 3> used{};
    while (!untagged.empty()) {
      if (std::all_of(used.begin(), used.end(), [](bool u) { return u; })) used.fill(false);
      std::size_t best_rec = 0;
      int best_branch = -1;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t u = 0; u < untagged.size(); ++u) {
        for (int b = 0; b < 3; ++b) {
          const double dist = std::abs(e[b] - data.records[untagged[u]].energy_ev);
          if (!used[b] && dist < best) {
            best = dist;
            best_rec = u;
            best_branch = b;
          }
        }
      }
      out[untagged[best_rec]] = e[best_branch];
      used[best_branch] = true;
      untagged.erase(untagged.begin() + static_cast<long>(best_rec));
    }
  }
  return out;
}

}  // namespace

MinimizeResult minimize(const Objective& f, const Eigen::VectorXd& x0, std::span<const Bounds> bounds,
                        const MinimizeOptions& opts) {
  const Eigen::Index n = x0.size();
  if (static_cast<Eigen::Index>(bounds.size()) != n) {
    throw Error(Errc::DimensionMismatch, fmt::format("{} bounds for {} parameters", bounds.size(), n));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(bounds[i].lo <= bounds[i].hi)) throw Error(Errc::DomainError, fmt::format("bounds {} are empty", i));
    if (!(x0[i] >= bounds[i].lo && x0[i] <= bounds[i].hi)) {
      throw Error(Errc::DomainError, fmt::format("x0[{}] = {} outside [{}, {}]", i, x0[i], bounds[i].lo, bounds[i].hi));
    }
  }
  if (!opts.initial_step.empty() && static_cast<Eigen::Index>(opts.initial_step.size()) != n) {
    throw Error(Errc::DimensionMismatch, "initial_step length differs from x0");
  }
  const Evaluator eval(f, bounds);
  MinimizeResult res;
  res.x = x0;
  res.objective = eval(x0);
  if (n == 0) {
    res.converged = true;
    return res;
  }
  std::vector<double> steps(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    steps[i] = opts.initial_step.empty() ? (x0[i] != 0.0 ? 0.05 * std::abs(x0[i]) : 1e-3) : opts.initial_step[i];
    if (bounds[i].hi - bounds[i].lo > 0.0) steps[i] = std::min(steps[i], bounds[i].hi - bounds[i].lo);
  }

  for (int run = 0; run <= opts.restarts; ++run) {
    Simplex s = initial_simplex(res.x, res.objective, bounds, steps, eval);
    const auto [iters, ok] = descend(s, eval, opts, opts.max_iter - res.iterations);
    res.iterations += iters;
    res.converged = ok;
    const bool improved = s.f[0] < res.objective - std::max(opts.f_tol, 1e-15 * std::abs(res.objective));
    if (s.f[0] < res.objective) {
      res.objective = s.f[0];
      res.x = s.v[0];
    }
    if (!improved || !ok || res.iterations >= opts.max_iter) break;
  }
  return res;
}

double FitResult::value(const std::string& name) const {
  for (const auto& p : params) {
    if (p.name == name) return p.value;
  }
  throw Error(Errc::DomainError, "fit result has no parameter '" + name + "'");
}

std::vector<double> stderr_proxy(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residuals,
                                 const Eigen::VectorXd& x, std::span<const double> steps) {
  const Eigen::VectorXd r0 = residuals(x);
  const Eigen::Index m = r0.size();
  const Eigen::Index n = x.size();
  if (m <= n) return std::vector<double>(n, std::numeric_limits<double>::quiet_NaN());
  Eigen::MatrixXd jac(m, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += steps[i];
    xm[i] -= steps[i];
    jac.col(i) = (residuals(xp) - residuals(xm)) / (2.0 * steps[i]);
  }
  const double s2 = r0.squaredNorm() / static_cast<double>(m - n);
  const Eigen::MatrixXd cov = s2 * Eigen::MatrixXd(jac.transpose() * jac).completeOrthogonalDecomposition().pseudoInverse();
  std::vector<double> out(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = std::sqrt(std::max(0.0, cov(i, i)));
  return out;
}

DispersionData synthesize_dispersion(const DeviceParams& device, std::span<const double> thetas_deg) {
  DispersionData data;
  for (double theta : thetas_deg) {
    const auto e = singlet_energies(device, theta);
    data.records.push_back({theta, BranchLabel::LP, e[0], 1.0});
    data.records.push_back({theta, BranchLabel::MP, e[1], 1.0});
    data.records.push_back({theta, BranchLabel::UP, e[2], 1.0});
  }
  return data;
}

FitResult fit_coupled_oscillator(const DispersionData& data, const DeviceParams& init,
                                 const DispersionFitOptions& opts) {
  std::vector<const ParamSlot*> slots;
  for (const auto& name : opts.free) {
    const ParamSlot* s = &slot(name, opts.free_exciton_energies);
    if (std::find(slots.begin(), slots.end(), s) != slots.end()) {
      throw Error(Errc::DomainError, "parameter '" + name + "' listed twice");
    }
    slots.push_back(s);
  }
  std::set<double> angles;
  bool untagged = false;
  for (const auto& r : data.records) {
    if (!(r.energy_ev > 0.0) || !std::isfinite(r.energy_ev) || !std::isfinite(r.theta_deg)) {
      throw Error(Errc::DomainError, fmt::format("record at {} deg has invalid energy {}", r.theta_deg, r.energy_ev));
    }
    if (!(r.weight > 0.0) || !std::isfinite(r.weight)) throw Error(Errc::DomainError, "record weights must be positive");
    if (r.branch) branch_slot(*r.branch);
    untagged = untagged || !r.branch;
    angles.insert(r.theta_deg);
  }
  if (data.records.size() < slots.size()) {
    throw Error(Errc::Underdetermined,
                fmt::format("{} data points for {} free parameters", data.records.size(), slots.size()));
  }
  if (angles.size() < 3) {
    throw Error(Errc::Underdetermined, fmt::format("{} distinct angles, need at least 3", angles.size()));
  }

  auto device_at = [&](const Eigen::VectorXd& x) {
    DeviceParams d = init;
    d.j_t = 0.0;
    for (std::size_t i = 0; i < slots.size(); ++i) d.*(slots[i]->member) = x[static_cast<Eigen::Index>(i)];
    return d;
  };
  auto residuals = [&](const Eigen::VectorXd& x) {
    const auto model = matched_model(data, device_at(x));
    Eigen::VectorXd r(static_cast<Eigen::Index>(model.size()));
    for (std::size_t k = 0; k < model.size(); ++k) {
      r[static_cast<Eigen::Index>(k)] = std::sqrt(data.records[k].weight) * (model[k] - data.records[k].energy_ev);
    }
    return r;
  };

  const Eigen::Index n = static_cast<Eigen::Index>(slots.size());
  Eigen::VectorXd x0(n);
  std::vector<Bounds> bounds;
  MinimizeOptions mopts = opts.minimizer;
  if (mopts.initial_step.empty()) {
    for (const auto* s : slots) mopts.initial_step.push_back(s->step);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    x0[i] = init.*(slots[i]->member);
    bounds.push_back(slots[i]->bounds);
  }
  const MinimizeResult m =
      minimize([&](const Eigen::VectorXd& x) { return residuals(x).squaredNorm(); }, x0, bounds, mopts);

  FitResult res;
  res.objective = m.objective;
  res.iterations = m.iterations;
  res.converged = m.converged;
  res.device = device_at(m.x);
  if (untagged) res.warnings.push_back("untagged records were matched to branches greedily by energy");
  const std::vector<double> h(n, 1e-6);
  const auto se = stderr_proxy(residuals, m.x, h);
  for (Eigen::Index i = 0; i < n; ++i) res.params.push_back({slots[i]->name, m.x[i], se[i]});
  return res;
}

FitResult fit_triplet_coupling(const FeatureTable& measured, std::span<const DeviceParams> devices,
                               const RateParams& rates, const TripletFitOptions& opts) {
  if (!(opts.j_t_lo > 0.0 && opts.j_t_hi > opts.j_t_lo) || !std::isfinite(opts.j_t_hi)) {
    throw Error(Errc::DomainError,
                fmt::format("J_T bounds [{}, {}] are degenerate; need 0 < lo < hi", opts.j_t_lo, opts.j_t_hi));
  }
  if (measured.size() != devices.size()) {
    throw Error(Errc::DimensionMismatch, fmt::format("{} feature rows for {} devices", measured.size(), devices.size()));
  }
  if (measured.size() < 3) throw Error(Errc::InsufficientData, "J_T fit needs features at 3 or more detunings");
  bool neg = false, pos = false;
  double closest = std::numeric_limits<double>::infinity();
  bool flat = true;
  for (const auto& f : measured) {
    for (double v : {f.rel_fluorescence_intensity, f.rel_sharpness, f.rel_phosphorescence_rate}) {
      if (!(v > 0.0) || !std::isfinite(v)) throw Error(Errc::DomainError, "relative features must be positive");
      flat = flat && std::abs(v - 1.0) < 1e-9;
    }
    neg = neg || f.delta_e < 0.0;
    pos = pos || f.delta_e > 0.0;
    closest = std::min(closest, std::abs(f.delta_e));
  }
  if (!(neg && pos) && closest > 0.02) {
    throw Error(Errc::InsufficientData, "detunings neither change sign nor approach zero");
  }
  if (opts.prescan < 2) throw Error(Errc::DomainError, "pre-scan needs at least 2 points");

  const auto& w = opts.weights;
  auto residuals_at = [&](double j_t) {
    const FeatureTable model = sweep_detuning_features(devices, rates, j_t, opts.reference, opts.n_max);
    Eigen::VectorXd r(3 * static_cast<Eigen::Index>(model.size()));
    for (std::size_t k = 0; k < model.size(); ++k) {
      const auto i = static_cast<Eigen::Index>(3 * k);
      r[i] = std::sqrt(w.fluorescence) * (model[k].rel_fluorescence_intensity - measured[k].rel_fluorescence_intensity);
      r[i + 1] = std::sqrt(w.sharpness) * (model[k].rel_sharpness - measured[k].rel_sharpness);
      r[i + 2] = std::sqrt(w.phosphorescence) * (model[k].rel_phosphorescence_rate - measured[k].rel_phosphorescence_rate);
    }
    return r;
  };
  auto objective = [&](const Eigen::VectorXd& u) { return residuals_at(std::pow(10.0, u[0])).squaredNorm(); };

  const double ulo = std::log10(opts.j_t_lo);
  const double uhi = std::log10(opts.j_t_hi);
  const auto grid = linspace(ulo, uhi, opts.prescan);
  std::vector<double> scan(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) scan[k] = objective(Eigen::VectorXd::Constant(1, grid[k]));
  const std::size_t best = static_cast<std::size_t>(std::min_element(scan.begin(), scan.end()) - scan.begin());

  MinimizeOptions mopts = opts.minimizer;
  mopts.initial_step = {grid[1] - grid[0]};
  const Bounds b{ulo, uhi};
  const MinimizeResult m = minimize(objective, Eigen::VectorXd::Constant(1, grid[best]), std::span(&b, 1), mopts);

  FitResult res;
  res.objective = m.objective;
  res.iterations = m.iterations + opts.prescan;
  res.converged = m.converged;
  const double j_t = std::pow(10.0, m.x[0]);
  res.device = devices[opts.reference];
  res.device.j_t = j_t;

  const std::array<double, 1> h{1e-3 * j_t};
  const auto se = stderr_proxy([&](const Eigen::VectorXd& v) { return residuals_at(v[0]); },
                               Eigen::VectorXd::Constant(1, j_t), h);
  res.params.push_back({"j_t", j_t, se[0]});

  const Eigen::VectorXd r = residuals_at(j_t);
  double sf = 0.0, ss = 0.0, sp = 0.0;
  for (Eigen::Index i = 0; i < r.size(); i += 3) {
    sf += r[i] * r[i];
    ss += r[i + 1] * r[i + 1];
    sp += r[i + 2] * r[i + 2];
  }
  res.residuals = {{"rel_fluor", sf, 0.0}, {"rel_sharp", ss, 0.0}, {"rel_phos_rate", sp, 0.0}};

  if (flat) {
    res.identifiable = false;
    res.warnings.push_back("measured features are flat; J_T is not identifiable");
  }
  const double edge = 1e-3 * (uhi - ulo);
  if (m.x[0] - ulo < edge || uhi - m.x[0] < edge) {
    res.identifiable = false;
    res.warnings.push_back(fmt::format("optimum J_T = {:.6g} eV sits on a search bound", j_t));
  }
  return res;
}

}  // namespace qbsim
