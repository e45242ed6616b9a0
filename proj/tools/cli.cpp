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

#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <omp.h>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "qbsim/config.hpp"
#include "qbsim/error.hpp"
#include "qbsim/io.hpp"
#include "qbsim/version.hpp"

namespace qbsim::cli {

namespace {

namespace fs = std::filesystem;

struct Common {
  std::string config;
  std::string preset;
  std::string rates;
  std::optional<double> theta;
  std::optional<int> n_max;
  std::string out;
  int jobs = 0;
  std::optional<int> precision;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "JSON run configuration");
  cmd->add_option("--preset", c.preset, "device preset (mechanism1, mechanism2, cavity1..cavity5)");
  cmd->add_option("--rates", c.rates, "rate preset (rates-default)");
  cmd->add_option("--n-max", c.n_max, "photon cutoff");
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--jobs", c.jobs, "worker threads (QBSIM_JOBS if unset)");
  cmd->add_option("--precision", c.precision, "significant digits in CSV output (9-17)");
  cmd->add_option("--seed", c.seed, "seed for noise injection");
}

RunConfig resolve(const Common& c, bool need_device = true) {
  RunConfig cfg = c.config.empty() ? default_config() : parse_config(c.config);
  if (!c.preset.empty()) {
    const auto p = device_preset(c.preset);
    if (!p) throw Error(Errc::Config, fmt::format("unknown device preset '{}'", c.preset));
    cfg.device = *p;
    cfg.device_preset = c.preset;
  }
  if (!c.rates.empty()) {
    const auto r = rate_preset(c.rates);
    if (!r) throw Error(Errc::Config, fmt::format("unknown rate preset '{}'", c.rates));
    cfg.rates = *r;
  }
  if (c.theta) cfg.theta_deg = *c.theta;
  if (c.n_max) cfg.n_max = *c.n_max;
  if (!c.out.empty()) cfg.output.directory = c.out;
  if (c.precision) {
    if (*c.precision < 9 || *c.precision > 17) throw Error(Errc::Config, "--precision must lie in [9, 17]");
    cfg.output.precision = *c.precision;
  }
  if (need_device && cfg.device_preset.empty() && cfg.device.omega_c0 == 0.0) {
    throw Error(Errc::Config, "no device given: pass --preset or a device section in --config");
  }
  try {
    if (need_device) validate(cfg.device);
    validate(cfg.rates);
    CompositeBasis check(cfg.n_max);
    (void)check;
  } catch (const Error& e) {
    throw Error(Errc::Config, e.detail());
  }
  if (need_device && !rwa_valid(cfg.device)) {
    std::cerr << "warning: couplings exceed 0.2 of the smallest bare energy; the rotating-wave model may be inaccurate\n";
  }
  return cfg;
}

void set_threads(int jobs) {
  if (jobs <= 0) {
    if (const char* env = std::getenv("QBSIM_JOBS")) {
      try {
        jobs = std::stoi(env);
      } catch (const std::exception&) {
        throw Error(Errc::Config, fmt::format("QBSIM_JOBS='{}' is not an integer", env));
      }
    }
  }
  if (jobs > 0) omp_set_num_threads(jobs);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Writer {
 public:
  Writer(std::string dir, std::string command, const std::vector<std::string>& args)
      : dir_(std::move(dir)), command_(std::move(command)), args_(args) {}

  template <class F>
  void csv(const std::string& name, F&& body) {
    std::ostringstream ss;
    body(ss);
    fs::create_directories(dir_);
    const fs::path path = fs::path(dir_) / name;
    {
      std::ofstream out(path, std::ios::binary);
      if (!out) throw Error(Errc::Config, fmt::format("cannot write '{}'", path.string()));
      out << ss.str();
    }
    nlohmann::ordered_json meta;
    meta["tool"] = "qbsim";
    meta["version"] = kVersion;
    meta["command"] = command_;
    meta["args"] = args_;
    meta["threads"] = omp_get_max_threads();
    meta["generated_utc"] = utc_now();
    for (const auto& [k, v] : extra_) meta[k] = v;
    std::ofstream side(path.string() + ".meta.json", std::ios::binary);
    side << meta.dump(2) << '\n';
    std::cout << path.string() << '\n';
  }

  void note(const std::string& key, nlohmann::ordered_json value) { extra_[key] = std::move(value); }

 private:
  std::string dir_;
  std::string command_;
  std::vector<std::string> args_;
  std::map<std::string, nlohmann::ordered_json> extra_;
};

nlohmann::ordered_json device_json(const DeviceParams& d) {
  return {{"omega_c0", d.omega_c0}, {"n_eff", d.n_eff}, {"omega_d", d.omega_d}, {"omega_a", d.omega_a},
          {"omega_t", d.omega_t},   {"j_d", d.j_d},     {"j_a", d.j_a},         {"j_t", d.j_t}};
}

nlohmann::ordered_json rates_json(const RateParams& r) {
  return {{"gamma_p", r.gamma_p}, {"gamma_c", r.gamma_c},   {"gamma_d", r.gamma_d},
          {"gamma_a", r.gamma_a}, {"gamma_ic", r.gamma_ic}, {"gamma_isc", r.gamma_isc}};
}

Scenario scenario_from(const RunConfig& cfg, std::optional<double> charge_ns, std::optional<double> relax_ns,
                       bool open_on_relax) {
  Scenario s;
  if (!cfg.phases.empty() && !charge_ns && !relax_ns && !open_on_relax) {
    s.device = cfg.device;
    s.rates = cfg.rates;
    s.phases = cfg.phases;
    s.description = "phases from configuration";
  } else {
    s = charge_relax_scenario(cfg.device, cfg.rates, charge_ns.value_or(100.0), relax_ns.value_or(1e8), open_on_relax);
  }
  s.theta = cfg.theta_deg;
  s.n_max = cfg.n_max;
  s.hamiltonian = cfg.hamiltonian;
  return s;
}

std::vector<DeviceParams> preset_devices(const std::vector<std::string>& names) {
  std::vector<DeviceParams> out;
  for (const auto& n : names) {
    const auto d = device_preset(n);
    if (!d) throw Error(Errc::Config, fmt::format("unknown device preset '{}'", n));
    out.push_back(*d);
  }
  return out;
}

int exit_code(Errc code) {
  switch (code) {
    case Errc::Config:
    case Errc::DomainError:
    case Errc::InvalidCutoff:
    case Errc::InvalidLevel:
    case Errc::InvalidRate:
    case Errc::Underdetermined:
    case Errc::InsufficientData:
    case Errc::IncompleteScenario:
      return kConfigError;
    default:
      return kNumericalError;
  }
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"qbsim: triplet-storage Dicke quantum battery simulator", "qbsim"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Common common;
  std::optional<double> charge_ns, relax_ns;
  bool open_cavity_relax = false;
  std::optional<double> sweep_from, sweep_to, probe_ns;
  std::optional<int> sweep_steps;
  std::vector<double> thetas;
  double tol = 0.01;
  std::string data_path;
  std::vector<std::string> free_params;
  bool free_exciton = false;
  double noise = 0.0;
  std::optional<double> planted_jt, jt_lo, jt_hi;

  auto* sim = app.add_subcommand("simulate", "charge/relax dynamics -> trajectory.csv");
  add_common(sim, common);
  sim->add_option("--theta", common.theta, "angle, degrees");
  sim->add_option("--charge-ns", charge_ns, "pump-on duration (default 100)");
  sim->add_option("--relax-ns", relax_ns, "pump-off duration (default 1e8)");
  sim->add_flag("--open-cavity", open_cavity_relax, "switch the couplings off for the relaxation");

  auto* sweep = app.add_subcommand("sweep", "cavity-energy sweep -> sweep.csv");
  add_common(sweep, common);
  sweep->add_option("--theta", common.theta, "angle, degrees");
  sweep->add_option("--from", sweep_from, "lowest omega_c0, eV");
  sweep->add_option("--to", sweep_to, "highest omega_c0, eV");
  sweep->add_option("--steps", sweep_steps, "grid points");
  sweep->add_option("--probe-ns", probe_ns, "probe time, ns (default 10)");
  sweep->add_option("--charge-ns", charge_ns, "pump-on duration of the template (default 100)");
  sweep->add_option("--relax-ns", relax_ns, "pump-off duration of the template (default 1e8)");

  auto* pol = app.add_subcommand("polaritons", "single-excitation branches -> branches.csv");
  add_common(pol, common);
  pol->add_option("--theta", thetas, "angles, degrees (repeatable; default 0)");
  pol->add_option("--tol", tol, "resonance tolerance for the regime report, eV");

  auto* fitd = app.add_subcommand("fit-dispersion", "coupled-oscillator fit -> fit.csv");
  add_common(fitd, common);
  fitd->add_option("--data", data_path, "dispersion CSV (theta_deg,branch,energy_ev,weight)");
  fitd->add_option("--free", free_params, "free parameters (omega_c0, n_eff, j_d, j_a)");
  fitd->add_flag("--free-exciton-energies", free_exciton, "also allow omega_d and omega_a");
  fitd->add_option("--synthetic-noise", noise, "without --data: synthesize from the preset with this Gaussian sigma, eV");

  auto* fitj = app.add_subcommand("fit-jt", "triplet-cavity coupling fit -> fit.csv");
  add_common(fitj, common);
  fitj->add_option("--data", data_path, "feature CSV (delta_e_ev,rel_fluor,rel_sharp,rel_phos_rate)");
  fitj->add_option("--planted-jt", planted_jt, "without --data: synthesize features at this J_T, eV");
  fitj->add_option("--jt-lo", jt_lo, "lower J_T bound, eV");
  fitj->add_option("--jt-hi", jt_hi, "upper J_T bound, eV");

  auto* figs = app.add_subcommand("figures-data", "tidy CSVs for the plotting scripts");
  add_common(figs, common);

  std::vector<std::string> argv_tail(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::vector<std::string> reversed(argv_tail.rbegin(), argv_tail.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    set_threads(common.jobs);
    if (*sim) {
      const RunConfig cfg = resolve(common);
      const Scenario s = scenario_from(cfg, charge_ns, relax_ns, open_cavity_relax);
      const Trajectory traj = run_scenario(s);
      Writer w(cfg.output.directory, "simulate", argv_tail);
      w.note("device", device_json(s.device));
      w.note("rates", rates_json(s.rates));
      w.note("scenario", s.description);
      const CutoffCheck cut = check_cutoff(s, traj);
      w.note("cutoff_check", {{"n_max", cut.n_max}, {"max_change", cut.max_change}, {"converged", cut.converged}});
      if (!cut.converged) {
        std::cerr << fmt::format("warning: populations move by {:.3g} at n_max = {}; results not converged in the cutoff\n",
                                 cut.max_change, s.n_max + 1);
      }
      const CompositeBasis basis(s.n_max);
      try {
        const EnergyFigures fig = charging_metrics(traj, s.device, basis);
        w.note("charging_power_ev_per_ns", fig.charging_power);
        w.note("stored_density_ev", fig.stored_density);
        w.note("self_discharge_time_ns", fig.self_discharge_time);
      } catch (const Error& e) {
        if (e.code() != Errc::IncompleteScenario && e.code() != Errc::InsufficientData) throw;
      }
      w.csv("trajectory.csv", [&](std::ostream& o) { write_trajectory_csv(o, traj, cfg.output.precision); });
      return kOk;
    }
    if (*sweep) {
      const RunConfig cfg = resolve(common);
      SweepConfig sc = cfg.sweep.value_or(SweepConfig{"omega_c0", 1.6, 2.1, 100, 10.0});
      if (sweep_from) sc.from = *sweep_from;
      if (sweep_to) sc.to = *sweep_to;
      if (sweep_steps) sc.steps = *sweep_steps;
      if (probe_ns) sc.probe_time_ns = *probe_ns;
      if (sc.steps < 1) throw Error(Errc::Config, "--steps must be at least 1");
      const Scenario s = scenario_from(cfg, charge_ns, relax_ns, false);
      const SweepResult r = sweep_cavity_energy(s, linspace(sc.from, sc.to, sc.steps), sc.probe_time_ns);
      Writer w(cfg.output.directory, "sweep", argv_tail);
      w.note("device", device_json(s.device));
      w.note("rates", rates_json(s.rates));
      w.note("probe_time_ns", sc.probe_time_ns);
      w.note("argmax_omega0_ev", r.omega_at_max());
      w.csv("sweep.csv", [&](std::ostream& o) { write_sweep_csv(o, r, cfg.output.precision); });
      return kOk;
    }
    if (*pol) {
      const RunConfig cfg = resolve(common);
      if (thetas.empty()) thetas.push_back(cfg.theta_deg);
      std::vector<BranchRow> rows;
      for (double t : thetas) rows.push_back({t, polariton_branches(cfg.device, t)});
      const DetuningReport det = detuning(cfg.device, thetas.front());
      const RegimeReport reg = classify_regime(cfg.device, cfg.rates, thetas.front(), tol);
      Writer w(cfg.output.directory, "polaritons", argv_tail);
      w.note("device", device_json(cfg.device));
      w.note("delta_e_ev", det.delta_e);
      w.note("regime", to_string(reg.verdict));
      std::cerr << fmt::format("delta_e = {:.6f} eV, regime = {}\n", det.delta_e, to_string(reg.verdict));
      w.csv("branches.csv", [&](std::ostream& o) { write_branches_csv(o, rows, cfg.output.precision); });
      return kOk;
    }
    if (*fitd) {
      const RunConfig cfg = resolve(common);
      DispersionData data;
      const std::string path = data_path.empty() ? cfg.fit.data : data_path;
      if (!path.empty()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(Errc::Config, fmt::format("cannot open '{}'", path));
        data = read_dispersion_csv(in);
      } else {
        const std::vector<double> angles{0, 10, 20, 30, 40, 50, 60};
        data = synthesize_dispersion(cfg.device, angles);
        std::mt19937_64 rng(common.seed);
        std::normal_distribution<double> gauss(0.0, noise);
        if (noise > 0.0) {
          for (auto& r : data.records) r.energy_ev += gauss(rng);
        }
      }
      DispersionFitOptions opts;
      opts.free = free_params.empty() ? cfg.fit.free : free_params;
      opts.free_exciton_energies = free_exciton || cfg.fit.free_exciton_energies;
      const FitResult fit = fit_coupled_oscillator(data, cfg.device, opts);
      for (const auto& msg : fit.warnings) std::cerr << "warning: " << msg << '\n';
      Writer w(cfg.output.directory, "fit-dispersion", argv_tail);
      w.note("converged", fit.converged);
      w.note("iterations", fit.iterations);
      w.note("seed", common.seed);
      w.csv("fit.csv", [&](std::ostream& o) { write_fit_csv(o, fit, cfg.output.precision); });
      return kOk;
    }
    if (*fitj) {
      const RunConfig cfg = resolve(common, false);
      const std::vector<DeviceParams> devices = preset_devices(cfg.fit.devices);
      FeatureTable features;
      const std::string path = data_path.empty() ? cfg.fit.data : data_path;
      if (!path.empty()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error(Errc::Config, fmt::format("cannot open '{}'", path));
        features = read_feature_csv(in);
      } else if (planted_jt) {
        features = sweep_detuning_features(devices, cfg.rates, *planted_jt, cfg.fit.reference, cfg.n_max);
      } else {
        throw Error(Errc::Config, "fit-jt needs --data or --planted-jt");
      }
      TripletFitOptions opts;
      opts.j_t_lo = jt_lo.value_or(cfg.fit.j_t_lo);
      opts.j_t_hi = jt_hi.value_or(cfg.fit.j_t_hi);
      opts.weights = cfg.fit.weights;
      opts.reference = cfg.fit.reference;
      opts.n_max = cfg.n_max;
      const FitResult fit = fit_triplet_coupling(features, devices, cfg.rates, opts);
      for (const auto& msg : fit.warnings) std::cerr << "warning: " << msg << '\n';
      Writer w(cfg.output.directory, "fit-jt", argv_tail);
      w.note("converged", fit.converged);
      w.note("identifiable", fit.identifiable);
      nlohmann::ordered_json res;
      for (const auto& r : fit.residuals) res[r.name] = r.value;
      w.note("feature_residuals", res);
      w.csv("fit.csv", [&](std::ostream& o) { write_fit_csv(o, fit, cfg.output.precision); });
      return kOk;
    }
    if (*figs) {
      const RunConfig cfg = resolve(common, false);
      const int prec = cfg.output.precision;
      Writer w(cfg.output.directory, "figures-data", argv_tail);
      for (const char* name : {"mechanism1", "mechanism2"}) {
        const DeviceParams d = *device_preset(name);
        for (bool open : {false, true}) {
          Scenario s = charge_relax_scenario(d, cfg.rates, 100.0, 1e8, open);
          s.n_max = cfg.n_max;
          const Trajectory traj = run_scenario(s);
          w.csv(fmt::format("dynamics_{}_{}.csv", name, open ? "open" : "closed"),
                [&](std::ostream& o) { write_trajectory_csv(o, traj, prec); });
        }
        Scenario tmpl = charge_relax_scenario(d, cfg.rates, 100.0, 1e8, false);
        tmpl.n_max = cfg.n_max;
        const auto grid = std::string(name) == "mechanism1" ? linspace(2.1, 2.4, 100) : linspace(1.6, 2.1, 100);
        const SweepResult r = sweep_cavity_energy(tmpl, grid, 10.0);
        w.csv(fmt::format("sweep_{}.csv", name), [&](std::ostream& o) { write_sweep_csv(o, r, prec); });
      }
      std::vector<std::string> cavities;
      for (int k = 1; k <= 5; ++k) cavities.push_back(fmt::format("cavity{}", k));
      for (const auto& name : cavities) {
        std::vector<BranchRow> rows;
        const DeviceParams d = *device_preset(name);
        for (int t = 0; t <= 60; t += 2) rows.push_back({static_cast<double>(t), polariton_branches(d, t)});
        w.csv(fmt::format("branches_{}.csv", name), [&](std::ostream& o) { write_branches_csv(o, rows, prec); });
      }
      const FeatureTable table = sweep_detuning_features(preset_devices(cavities), cfg.rates, 5e-3, 0, cfg.n_max);
      w.note("j_t_ev", 5e-3);
      w.csv("features.csv", [&](std::ostream& o) { write_feature_csv(o, table, prec); });
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "qbsim: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "qbsim: " << e.what() << '\n';
    return kNumericalError;
  }
  return kConfigError;
}

}  // namespace qbsim::cli
