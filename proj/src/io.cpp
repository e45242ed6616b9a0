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

#include "qbsim/io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "qbsim/error.hpp"

namespace qbsim {

namespace {

int checked_precision(int precision) {
  if (precision < 9 || precision > 17) {
    throw Error(Errc::Config, fmt::format("precision {} outside [9, 17]", precision));
  }
  return precision;
}

std::string num(double v, int precision) { return fmt::format("{:.{}g}", v, precision); }

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

void expect_header(const CsvTable& t, const std::vector<std::string>& want) {
  if (t.header != want) {
    std::string joined;
    for (const auto& w : want) joined += (joined.empty() ? "" : ",") + w;
    throw Error(Errc::Config, "expected CSV header '" + joined + "'");
  }
}

std::optional<BranchLabel> parse_tag(const std::string& s, std::size_t line) {
  if (s.empty()) return std::nullopt;
  if (s == "LP") return BranchLabel::LP;
  if (s == "MP") return BranchLabel::MP;
  if (s == "UP") return BranchLabel::UP;
  throw Error(Errc::Config, fmt::format("line {}: unknown branch tag '{}'", line, s));
}

}  // namespace

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw Error(Errc::Config, "missing column '" + name + "'");
}

double parse_double(const std::string& field, const std::string& context) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw Error(Errc::Config, fmt::format("{}: '{}' is not a number", context, field));
  }
  return v;
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (t.header.empty()) {
      if (line.empty()) throw Error(Errc::Config, "line 1: empty header");
      t.header = split(line);
      continue;
    }
    if (line.empty()) continue;
    auto fields = split(line);
    if (fields.size() != t.header.size()) {
      throw Error(Errc::Config,
                  fmt::format("line {}: {} fields, header has {}", lineno, fields.size(), t.header.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw Error(Errc::Config, "CSV input is empty");
  return t;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, int precision) {
  const int p = checked_precision(precision);
  out << "t_ns,p_ground,mean_photons,p_d_s1,p_a_s1,p_a_t1,phase\n";
  const auto pops = populations(traj);
  for (std::size_t k = 0; k < pops.size(); ++k) {
    const auto& r = pops[k];
    out << num(r.t, p) << ',' << num(r.p_ground, p) << ',' << num(r.mean_photons, p) << ',' << num(r.p_donor_s1, p)
        << ',' << num(r.p_acceptor_s1, p) << ',' << num(r.p_acceptor_t1, p) << ',' << traj.phase[k] << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep, int precision) {
  const int p = checked_precision(precision);
  out << "omega0_ev,p_t1_probe,e_up,e_mp,e_lp,e_ttilde\n";
  for (const auto& pt : sweep.points) {
    out << num(pt.omega_c0, p) << ',' << num(pt.p_t1, p);
    for (double e : pt.energies) out << ',' << num(e, p);
    out << '\n';
  }
}

void write_branches_csv(std::ostream& out, const std::vector<BranchRow>& rows, int precision) {
  const int p = checked_precision(precision);
  out << "theta_deg,branch,energy_ev,w_cavity,w_d,w_a,w_t\n";
  for (const auto& row : rows) {
    for (const auto& b : row.branches) {
      out << num(row.theta_deg, p) << ',' << to_string(b.label) << ',' << num(b.energy, p);
      for (double w : b.character) out << ',' << num(w, p);
      out << '\n';
    }
  }
}

void write_fit_csv(std::ostream& out, const FitResult& fit, int precision) {
  const int p = checked_precision(precision);
  out << "param,value,stderr_proxy\n";
  for (const auto& v : fit.params) out << v.name << ',' << num(v.value, p) << ',' << num(v.stderr_proxy, p) << '\n';
  out << "objective," << num(fit.objective, p) << ",nan\n";
}

void write_dispersion_csv(std::ostream& out, const DispersionData& data, int precision) {
  const int p = checked_precision(precision);
  out << "theta_deg,branch,energy_ev,weight\n";
  for (const auto& r : data.records) {
    out << num(r.theta_deg, p) << ',' << (r.branch ? to_string(*r.branch) : "") << ',' << num(r.energy_ev, p) << ','
        << num(r.weight, p) << '\n';
  }
}

DispersionData read_dispersion_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  expect_header(t, {"theta_deg", "branch", "energy_ev", "weight"});
  DispersionData data;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& f = t.rows[k];
    const std::string ctx = fmt::format("row {}", k + 1);
    DispersionRecord r;
    r.theta_deg = parse_double(f[0], ctx + " theta_deg");
    r.branch = parse_tag(f[1], k + 2);
    r.energy_ev = parse_double(f[2], ctx + " energy_ev");
    r.weight = f[3].empty() ? 1.0 : parse_double(f[3], ctx + " weight");
    data.records.push_back(r);
  }
  return data;
}

void write_feature_csv(std::ostream& out, const FeatureTable& table, int precision) {
  const int p = checked_precision(precision);
  out << "delta_e_ev,rel_fluor,rel_sharp,rel_phos_rate\n";
  for (const auto& r : table) {
    out << num(r.delta_e, p) << ',' << num(r.rel_fluorescence_intensity, p) << ',' << num(r.rel_sharpness, p) << ','
        << num(r.rel_phosphorescence_rate, p) << '\n';
  }
}

FeatureTable read_feature_csv(std::istream& in) {
  const CsvTable t = read_csv(in);
  expect_header(t, {"delta_e_ev", "rel_fluor", "rel_sharp", "rel_phos_rate"});
  FeatureTable table;
  for (std::size_t k = 0; k < t.rows.size(); ++k) {
    const auto& f = t.rows[k];
    const std::string ctx = fmt::format("row {}", k + 1);
    table.push_back({parse_double(f[0], ctx), parse_double(f[1], ctx), parse_double(f[2], ctx),
                     parse_double(f[3], ctx)});
  }
  return table;
}

}  // namespace qbsim
