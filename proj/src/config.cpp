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

#include "qbsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qbsim/error.hpp"

namespace qbsim {

namespace {

using nlohmann::json;

struct DevicePresetRow {
  const char* name;
  DeviceParams params;
};

// omega_c0, n_eff, omega_d, omega_a, omega_t, j_d, j_a, j_t
const DevicePresetRow kDevicePresets[] = {
    {"mechanism1", {2.217, kDefaultRefractiveIndex, 2.34, 2.55, 1.75, 0.25, 1e-4, 0.0}},
    {"mechanism2", {1.840, kDefaultRefractiveIndex, 2.34, 2.36, 1.75, 0.25, 1e-4, 1e-4}},
    {"cavity1", {2.12, kDefaultRefractiveIndex, 2.34, 2.36, 1.75, 0.23, 0.07, 0.0}},
    {"cavity2", {1.97, kDefaultRefractiveIndex, 2.34, 2.36, 1.75, 0.23, 0.10, 0.0}},
    {"cavity3", {1.89, kDefaultRefractiveIndex, 2.34, 2.36, 1.75, 0.23, 0.07, 0.0}},
    {"cavity4", {1.88, kDefaultRefractiveIndex, 2.34, 2.36, 1.75, 0.25, 0.08, 0.0}},
    {"cavity5", {1.79, kDefaultRefractiveIndex, 2.34, 2.36, 1.75, 0.27, 0.13, 0.0}},
};

[[noreturn]] void fail(const std::string& what) { throw Error(Errc::Config, what); }

void check_keys(const json& obj, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(fmt::format("{}: expected an object", path));
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!ok.count(it.key())) fail(fmt::format("{}: unknown key '{}'", path, it.key()));
  }
}

double number(const json& obj, const char* key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number()) fail(fmt::format("{}.{}: expected a number", path, key));
  return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(fmt::format("{}.{}: expected an integer", path, key));
  return v.get<int>();
}

bool boolean(const json& obj, const char* key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_boolean()) fail(fmt::format("{}.{}: expected true or false", path, key));
  return v.get<bool>();
}

std::string text(const json& obj, const char* key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_string()) fail(fmt::format("{}.{}: expected a string", path, key));
  return v.get<std::string>();
}

template <class T>
void maybe(const json& obj, const char* key, T& out, T (*get)(const json&, const char*, const std::string&),
           const std::string& path) {
  if (obj.contains(key)) out = get(obj, key, path);
}

void read_device(const json& j, RunConfig& cfg) {
  const std::string path = "device";
  check_keys(j, path, {"preset", "omega_c0", "n_eff", "omega_d", "omega_a", "omega_t", "j_d", "j_a", "j_t"});
  if (j.contains("preset")) {
    cfg.device_preset = text(j, "preset", path);
    const auto p = device_preset(cfg.device_preset);
    if (!p) fail(fmt::format("device.preset: unknown preset '{}'", cfg.device_preset));
    cfg.device = *p;
  }
  DeviceParams& d = cfg.device;
  maybe(j, "omega_c0", d.omega_c0, number, path);
  maybe(j, "n_eff", d.n_eff, number, path);
  maybe(j, "omega_d", d.omega_d, number, path);
  maybe(j, "omega_a", d.omega_a, number, path);
  maybe(j, "omega_t", d.omega_t, number, path);
  maybe(j, "j_d", d.j_d, number, path);
  maybe(j, "j_a", d.j_a, number, path);
  maybe(j, "j_t", d.j_t, number, path);
}

void read_rates(const json& j, RunConfig& cfg) {
  const std::string path = "rates";
  check_keys(j, path, {"preset", "gamma_p", "gamma_c", "gamma_d", "gamma_a", "gamma_ic", "gamma_isc"});
  if (j.contains("preset")) {
    const std::string name = text(j, "preset", path);
    const auto p = rate_preset(name);
    if (!p) fail(fmt::format("rates.preset: unknown preset '{}'", name));
    cfg.rates = *p;
  }
  RateParams& r = cfg.rates;
  maybe(j, "gamma_p", r.gamma_p, number, path);
  maybe(j, "gamma_c", r.gamma_c, number, path);
  maybe(j, "gamma_d", r.gamma_d, number, path);
  maybe(j, "gamma_a", r.gamma_a, number, path);
  maybe(j, "gamma_ic", r.gamma_ic, number, path);
  maybe(j, "gamma_isc", r.gamma_isc, number, path);
}

void read_geometry(const json& j, RunConfig& cfg) {
  const std::string path = "geometry";
  check_keys(j, path, {"theta_deg", "n_max", "hamiltonian"});
  maybe(j, "theta_deg", cfg.theta_deg, number, path);
  maybe(j, "n_max", cfg.n_max, integer, path);
  if (j.contains("hamiltonian")) {
    const std::string h = text(j, "hamiltonian", path);
    if (h == "jc") {
      cfg.hamiltonian = HamiltonianKind::JaynesCummings;
    } else if (h == "rabi") {
      cfg.hamiltonian = HamiltonianKind::Rabi;
    } else {
      fail("geometry.hamiltonian: expected \"jc\" or \"rabi\"");
    }
  }
}

void read_scenario(const json& j, RunConfig& cfg) {
  check_keys(j, "scenario", {"phases"});
  if (!j.contains("phases")) return;
  const json& phases = j.at("phases");
  if (!phases.is_array() || phases.empty()) fail("scenario.phases: expected a non-empty array");
  for (std::size_t i = 0; i < phases.size(); ++i) {
    const std::string path = fmt::format("scenario.phases[{}]", i);
    const json& p = phases[i];
    check_keys(p, path, {"duration_ns", "pump", "cavity", "sampling", "points", "first_ns"});
    if (!p.contains("duration_ns")) fail(path + ": missing duration_ns");
    Phase ph;
    ph.duration = number(p, "duration_ns", path);
    maybe(p, "pump", ph.pump, boolean, path);
    if (p.contains("cavity")) {
      const std::string c = text(p, "cavity", path);
      if (c != "open" && c != "closed") fail(path + ".cavity: expected \"open\" or \"closed\"");
      ph.cavity_open = c == "open";
    }
    if (p.contains("sampling")) {
      const std::string s = text(p, "sampling", path);
      if (s != "log" && s != "linear") fail(path + ".sampling: expected \"log\" or \"linear\"");
      ph.sampling = s == "log" ? Sampling::Log : Sampling::Linear;
    }
    maybe(p, "points", ph.points, integer, path);
    maybe(p, "first_ns", ph.first, number, path);
    if (!(ph.duration > 0.0)) fail(path + ".duration_ns: must be positive");
    if (ph.points < 1) fail(path + ".points: must be at least 1");
    if (!(ph.first > 0.0)) fail(path + ".first_ns: must be positive");
    cfg.phases.push_back(ph);
  }
}

void read_sweep(const json& j, RunConfig& cfg) {
  const std::string path = "sweep";
  check_keys(j, path, {"parameter", "from", "to", "steps", "probe_time_ns"});
  SweepConfig s;
  maybe(j, "parameter", s.parameter, text, path);
  if (s.parameter != "omega_c0") fail("sweep.parameter: only \"omega_c0\" is supported");
  for (const char* k : {"from", "to", "steps"}) {
    if (!j.contains(k)) fail(fmt::format("sweep: missing {}", k));
  }
  s.from = number(j, "from", path);
  s.to = number(j, "to", path);
  s.steps = integer(j, "steps", path);
  maybe(j, "probe_time_ns", s.probe_time_ns, number, path);
  if (s.steps < 1) fail("sweep.steps: must be at least 1");
  if (s.steps > 1 && !(s.from != s.to)) fail("sweep: from and to must differ");
  if (!(s.probe_time_ns > 0.0)) fail("sweep.probe_time_ns: must be positive");
  cfg.sweep = s;
}

void read_fit(const json& j, RunConfig& cfg) {
  const std::string path = "fit";
  check_keys(j, path, {"data", "free", "free_exciton_energies", "bounds", "weights", "devices", "reference"});
  FitConfig& f = cfg.fit;
  maybe(j, "data", f.data, text, path);
  maybe(j, "free_exciton_energies", f.free_exciton_energies, boolean, path);
  if (j.contains("free")) {
    const json& a = j.at("free");
    if (!a.is_array()) fail("fit.free: expected an array of names");
    f.free.clear();
    for (const auto& v : a) {
      if (!v.is_string()) fail("fit.free: expected an array of names");
      f.free.push_back(v.get<std::string>());
    }
  }
  if (j.contains("bounds")) {
    const json& b = j.at("bounds");
    check_keys(b, "fit.bounds", {"j_t"});
    if (b.contains("j_t")) {
      const json& jt = b.at("j_t");
      if (!jt.is_array() || jt.size() != 2 || !jt[0].is_number() || !jt[1].is_number()) {
        fail("fit.bounds.j_t: expected [lo, hi]");
      }
      f.j_t_lo = jt[0].get<double>();
      f.j_t_hi = jt[1].get<double>();
    }
  }
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    check_keys(w, "fit.weights", {"fluorescence", "sharpness", "phosphorescence"});
    maybe(w, "fluorescence", f.weights.fluorescence, number, "fit.weights");
    maybe(w, "sharpness", f.weights.sharpness, number, "fit.weights");
    maybe(w, "phosphorescence", f.weights.phosphorescence, number, "fit.weights");
  }
  if (j.contains("devices")) {
    const json& a = j.at("devices");
    if (!a.is_array()) fail("fit.devices: expected an array of preset names");
    f.devices.clear();
    for (const auto& v : a) {
      if (!v.is_string() || !device_preset(v.get<std::string>())) fail("fit.devices: unknown preset name");
      f.devices.push_back(v.get<std::string>());
    }
  }
  if (j.contains("reference")) {
    const int r = integer(j, "reference", path);
    if (r < 0) fail("fit.reference: must be >= 0");
    f.reference = static_cast<std::size_t>(r);
  }
  if (f.reference >= f.devices.size()) fail("fit.reference: index past the device list");
}

void read_output(const json& j, RunConfig& cfg) {
  check_keys(j, "output", {"directory", "precision"});
  maybe(j, "directory", cfg.output.directory, text, "output");
  maybe(j, "precision", cfg.output.precision, integer, "output");
  if (cfg.output.precision < 9 || cfg.output.precision > 17) fail("output.precision: must lie in [9, 17]");
}

std::pair<std::size_t, std::size_t> line_col(std::string_view s, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < std::min(byte, s.size()); ++i) {
    if (s[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

}  // namespace

std::optional<DeviceParams> device_preset(std::string_view name) {
  for (const auto& row : kDevicePresets) {
    if (name == row.name) return row.params;
  }
  return std::nullopt;
}

std::vector<std::string> device_preset_names() {
  std::vector<std::string> out;
  for (const auto& row : kDevicePresets) out.emplace_back(row.name);
  return out;
}

std::optional<RateParams> rate_preset(std::string_view name) {
  if (name == "rates-default") {
    RateParams r;
    r.gamma_isc = 0.48;
    r.gamma_d = 1.0;
    r.gamma_a = 1.0;
    r.gamma_c = 50.0;
    r.gamma_ic = 1e-4;
    r.gamma_p = 10.0;
    return r;
  }
  return std::nullopt;
}

RunConfig default_config() {
  RunConfig cfg;
  cfg.rates = *rate_preset("rates-default");
  return cfg;
}

RunConfig parse_config_text(std::string_view text_in, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text_in.begin(), text_in.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_col(text_in, e.byte == 0 ? 0 : e.byte - 1);
    fail(fmt::format("{}:{}:{}: malformed JSON ({})", source, line, col, e.what()));
  }
  RunConfig cfg = default_config();
  try {
    check_keys(doc, "<root>", {"device", "rates", "geometry", "scenario", "sweep", "fit", "output"});
    if (doc.contains("device")) read_device(doc.at("device"), cfg);
    if (doc.contains("rates")) read_rates(doc.at("rates"), cfg);
    if (doc.contains("geometry")) read_geometry(doc.at("geometry"), cfg);
    if (doc.contains("scenario")) read_scenario(doc.at("scenario"), cfg);
    if (doc.contains("sweep")) read_sweep(doc.at("sweep"), cfg);
    if (doc.contains("fit")) read_fit(doc.at("fit"), cfg);
    if (doc.contains("output")) read_output(doc.at("output"), cfg);
  } catch (const Error& e) {
    fail(fmt::format("{}: {}", source, e.code() == Errc::Config ? e.detail() : std::string(e.what())));
  } catch (const json::exception& e) {
    fail(fmt::format("{}: {}", source, e.what()));
  }
  try {
    if (cfg.device.omega_c0 != 0.0 || !cfg.device_preset.empty()) validate(cfg.device);
    validate(cfg.rates);
    CompositeBasis check(cfg.n_max);
    (void)check;
  } catch (const Error& e) {
    fail(fmt::format("{}: {}", source, e.what()));
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(fmt::format("cannot open config '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.string());
}

}  // namespace qbsim
