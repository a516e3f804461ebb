// Copyright 2026 The Adiabatic PMP Authors
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

#include "adiabatic/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "adiabatic/energy_flow.hpp"
#include "adiabatic/errors.hpp"
#include "adiabatic/momentum_map.hpp"
#include "adiabatic/reduction.hpp"
#include "adiabatic/shooting.hpp"
#include "adiabatic/stirap_cost.hpp"
#include "adiabatic/tripod.hpp"

namespace adiabatic::scenario {

namespace fs = std::filesystem;

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"simulate", "extremal",     "stirap", "tripod",
                                              "momentum-map", "reduce", "search"};
  return names;
}

namespace {

int line_of(const YAML::Node& n) {
  const YAML::Mark m = n.Mark();
  return m.is_null() ? 0 : m.line + 1;
}

// One mapping of the scenario. Every key read is recorded, with its
// effective value, in echo; finish() rejects the keys nobody asked for.
class Section {
 public:
  Section(YAML::Node node, std::string path, int line) : node_(std::move(node)), path_(std::move(path)), line_(line) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      throw ConfigError(line_of(node_), path_ + " must be a mapping");
    }
    echo = YAML::Node(YAML::NodeType::Map);
  }

  bool has(const std::string& key) const { return present() && node_[key]; }

  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    const int line = has(key) ? line_of(node_[key]) : line_;
    throw ConfigError(line, qualified(key) + ": " + msg);
  }

  double real(const std::string& key, std::optional<double> def = std::nullopt) {
    used_.insert(key);
    double v = 0.0;
    if (!has(key)) {
      if (!def) fail(key, "required");
      v = *def;
    } else {
      v = scalar_real(node_[key], key);
    }
    echo[key] = v;
    return v;
  }

  std::optional<double> optional_real(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    const double v = scalar_real(node_[key], key);
    echo[key] = v;
    return v;
  }

  double positive(const std::string& key, std::optional<double> def = std::nullopt) {
    const double v = real(key, def);
    if (!(v > 0.0)) fail(key, "must be positive");
    return v;
  }

  std::size_t count(const std::string& key, std::size_t def, std::size_t min = 1) {
    used_.insert(key);
    long v = static_cast<long>(def);
    if (has(key)) {
      try {
        v = node_[key].as<long>();
      } catch (const YAML::Exception&) {
        fail(key, "expected an integer");
      }
    }
    if (v < static_cast<long>(min)) fail(key, "must be at least " + std::to_string(min));
    echo[key] = v;
    return static_cast<std::size_t>(v);
  }

  bool flag(const std::string& key, bool def) {
    used_.insert(key);
    bool v = def;
    if (has(key)) {
      try {
        v = node_[key].as<bool>();
      } catch (const YAML::Exception&) {
        fail(key, "expected true or false");
      }
    }
    echo[key] = v;
    return v;
  }

  std::string word(const std::string& key, const std::string& def, const std::vector<std::string>& allowed) {
    used_.insert(key);
    std::string v = def;
    if (has(key)) {
      try {
        v = node_[key].as<std::string>();
      } catch (const YAML::Exception&) {
        fail(key, "expected a word");
      }
    }
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(key, "'" + v + "' is not one of " + list);
    }
    echo[key] = v;
    return v;
  }

  std::vector<double> reals(const std::string& key, std::optional<std::vector<double>> def, std::size_t expected) {
    used_.insert(key);
    std::vector<double> v;
    if (!has(key)) {
      if (!def) fail(key, "required");
      v = *def;
    } else {
      const YAML::Node seq = node_[key];
      if (!seq.IsSequence()) fail(key, "expected a list of numbers");
      for (const auto& item : seq) v.push_back(scalar_real(item, key));
    }
    if (expected > 0 && v.size() != expected) fail(key, "expected " + std::to_string(expected) + " numbers");
    YAML::Node e(YAML::NodeType::Sequence);
    e.SetStyle(YAML::EmitterStyle::Flow);
    for (double x : v) e.push_back(x);
    echo[key] = e;
    return v;
  }

  /// [lo, hi] or a single number for a collapsed interval.
  Interval interval(const std::string& key, std::optional<Interval> def) {
    used_.insert(key);
    Interval iv;
    if (!has(key)) {
      if (!def) fail(key, "required");
      iv = *def;
    } else {
      const YAML::Node n = node_[key];
      if (n.IsSequence()) {
        if (n.size() != 2) fail(key, "expected [lo, hi]");
        iv = {scalar_real(n[0], key), scalar_real(n[1], key)};
      } else {
        const double v = scalar_real(n, key);
        iv = {v, v};
      }
    }
    if (!(iv.hi >= iv.lo)) fail(key, "interval needs lo <= hi");
    YAML::Node e(YAML::NodeType::Sequence);
    e.SetStyle(YAML::EmitterStyle::Flow);
    e.push_back(iv.lo);
    e.push_back(iv.hi);
    echo[key] = e;
    return iv;
  }

  Section child(const std::string& key) {
    used_.insert(key);
    Section s(has(key) ? node_[key] : YAML::Node(), qualified(key), has(key) ? line_of(node_[key]) : line_);
    return s;
  }

  /// Stores a finished child's echo.
  void adopt(const std::string& key, const Section& c) { echo[key] = c.echo; }

  std::vector<Section> list(const std::string& key) {
    used_.insert(key);
    std::vector<Section> out;
    if (!has(key)) return out;
    const YAML::Node seq = node_[key];
    if (!seq.IsSequence()) fail(key, "expected a list");
    std::size_t i = 0;
    for (const auto& item : seq) {
      out.emplace_back(item, qualified(key) + "[" + std::to_string(i++) + "]", line_of(item));
    }
    return out;
  }

  void adopt_list(const std::string& key, const std::vector<Section>& items) {
    if (items.empty()) return;
    YAML::Node seq(YAML::NodeType::Sequence);
    for (const auto& s : items) seq.push_back(s.echo);
    echo[key] = seq;
  }

  void finish() const {
    if (!present()) return;
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      if (!used_.count(key)) {
        throw ConfigError(line_of(it->first), "unknown key '" + qualified(key) + "'");
      }
    }
  }

  YAML::Node echo;

 private:
  bool present() const { return node_ && node_.IsMap(); }

  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double scalar_real(const YAML::Node& n, const std::string& key) const {
    double v = 0.0;
    try {
      v = n.as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError(line_of(n), qualified(key) + ": expected a number");
    }
    if (!std::isfinite(v)) throw ConfigError(line_of(n), qualified(key) + ": must be finite");
    return v;
  }

  YAML::Node node_;
  std::string path_;
  int line_;
  std::set<std::string> used_;
};

struct Context {
  DissipationRate k{1.0};
  IntegratorConfig cfg;
  fs::path out;
  YAML::Node results{YAML::NodeType::Map};
  std::vector<std::string> files;
};

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_output(Context& ctx, const std::string& name) {
  const fs::path p = ctx.out / name;
  std::ofstream f(p);
  if (!f) throw Error("cannot write " + p.string());
  ctx.files.push_back(name);
  return f;
}

void write_table(Context& ctx, const std::string& name, const std::vector<std::string>& header,
                 const std::function<bool(std::vector<double>&)>& next_row) {
  std::ofstream f = open_output(ctx, name);
  for (std::size_t i = 0; i < header.size(); ++i) f << (i ? "\t" : "") << header[i];
  f << '\n';
  std::vector<double> row;
  while (next_row(row)) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "\t" : "") << number(row[i]);
    f << '\n';
  }
}

void write_trajectory(Context& ctx, const std::string& name, const Trajectory& traj) {
  std::vector<std::string> header{"t"};
  header.insert(header.end(), traj.state_names.begin(), traj.state_names.end());
  header.insert(header.end(), traj.aux_names.begin(), traj.aux_names.end());
  std::size_t i = 0;
  write_table(ctx, name, header, [&](std::vector<double>& row) {
    if (i >= traj.size()) return false;
    const Sample& s = traj.samples[i++];
    row.assign(1, s.t);
    row.insert(row.end(), s.y.begin(), s.y.end());
    row.insert(row.end(), s.aux.begin(), s.aux.end());
    return true;
  });
}

YAML::Node flow_list(std::initializer_list<double> v) {
  YAML::Node n(YAML::NodeType::Sequence);
  n.SetStyle(YAML::EmitterStyle::Flow);
  for (double x : v) n.push_back(x);
  return n;
}

template <class Container>
YAML::Node flow_list(const Container& v) {
  YAML::Node n(YAML::NodeType::Sequence);
  n.SetStyle(YAML::EmitterStyle::Flow);
  for (double x : v) n.push_back(x);
  return n;
}

void put_metrics(YAML::Node& r, const MetricsReport& m) {
  r["C"] = m.C;
  r["Freq"] = m.Freq;
  r["Amp"] = m.Amp;
  r["fidelity"] = m.fidelity;
  if (!m.drifts.empty()) {
    YAML::Node d(YAML::NodeType::Map);
    for (const auto& [name, value] : m.drifts) d[name] = value;
    r["drifts"] = d;
  }
}

// simulate: raw controlled dynamics under prescribed pulses.
void run_simulate(Section& s, Context& ctx) {
  const std::string system = s.word("system", "three-level", {"three-level", "tripod"});
  const bool tripod = system == "tripod";
  const double T = s.positive("T");
  const std::vector<double> x0 =
      s.reals("initial", tripod ? std::vector<double>{1, 0, 0, 0} : std::vector<double>{1, 0, 0}, tripod ? 4 : 3);
  const bool complex_check = s.flag("complex_check", !tripod);
  if (tripod && complex_check) s.fail("complex_check", "only available for the three-level system");

  struct Pulse {
    int channel;
    bool gaussian;
    double amplitude, center, width;
  };
  std::vector<Pulse> pulses;
  auto items = s.list("pulses");
  for (auto& p : items) {
    Pulse q{};
    const std::string ch = p.word("control", "u1", tripod ? std::vector<std::string>{"u1", "u2", "u3"}
                                                          : std::vector<std::string>{"u1", "u2"});
    q.channel = ch[1] - '1';
    q.gaussian = p.word("shape", "constant", {"constant", "gaussian"}) == "gaussian";
    q.amplitude = p.real("amplitude");
    if (q.gaussian) {
      q.center = p.real("center");
      q.width = p.positive("width");
    }
    p.finish();
    pulses.push_back(q);
  }
  s.adopt_list("pulses", items);
  s.finish();

  auto controls = [pulses](double t) {
    std::array<double, 3> u{0, 0, 0};
    for (const auto& p : pulses) {
      const double z = p.gaussian ? (t - p.center) / p.width : 0.0;
      u[p.channel] += p.amplitude * (p.gaussian ? std::exp(-0.5 * z * z) : 1.0);
    }
    return u;
  };

  const DissipationRate k = ctx.k;
  const std::size_t n = x0.size();
  Trajectory traj;
  if (tripod) {
    VectorField rhs = [k, controls](double t, std::span<const double> y, std::span<double> dy) {
      const auto u = controls(t);
      const RealState4 d = tripod_real_rhs({y[0], y[1], y[2], y[3]}, {u[0], u[1], u[2]}, k);
      dy[0] = d.x1;
      dy[1] = d.x2;
      dy[2] = d.x3;
      dy[3] = d.x4;
    };
    traj = integrate(rhs, StateVector(x0.begin(), x0.end()), 0.0, T, ctx.cfg);
    traj.state_names = {"x1", "x2", "x3", "x4"};
    traj.aux_names = {"u1", "u2", "u3"};
  } else {
    // Amplitudes start as c = (x1, -i x2, x3) and follow -iH c.
    StateVector y0(complex_check ? 9 : 3, 0.0);
    std::copy(x0.begin(), x0.end(), y0.begin());
    if (complex_check) {
      y0[3] = x0[0];
      y0[6] = -x0[1];
      y0[7] = x0[2];
    }
    VectorField rhs = [k, controls, complex_check](double t, std::span<const double> y, std::span<double> dy) {
      const auto u = controls(t);
      const RealState3 d = reduced_rhs({y[0], y[1], y[2]}, {u[0], u[1]}, k);
      dy[0] = d.x1;
      dy[1] = d.x2;
      dy[2] = d.x3;
      if (complex_check) {
        const ComplexState3 c{Complex(y[3], y[4]), Complex(y[5], y[6]), Complex(y[7], y[8])};
        const ComplexState3 dc = schrodinger_rhs(c, {u[0], u[1]}, k);
        dy[3] = dc.c1.real();
        dy[4] = dc.c1.imag();
        dy[5] = dc.c2.real();
        dy[6] = dc.c2.imag();
        dy[7] = dc.c3.real();
        dy[8] = dc.c3.imag();
      }
    };
    traj = integrate(rhs, y0, 0.0, T, ctx.cfg);
    traj.state_names = {"x1", "x2", "x3"};
    if (complex_check) {
      for (const char* nm : {"re_c1", "im_c1", "re_c2", "im_c2", "re_c3", "im_c3"}) traj.state_names.emplace_back(nm);
    }
    traj.aux_names = {"u1", "u2"};
  }

  double deviation = 0.0;
  for (auto& smp : traj.samples) {
    const auto u = controls(smp.t);
    smp.aux.assign(u.begin(), u.begin() + (tripod ? 3 : 2));
    if (complex_check) {
      const ComplexState3 c{Complex(smp.y[3], smp.y[4]), Complex(smp.y[5], smp.y[6]), Complex(smp.y[7], smp.y[8])};
      const RealState3 a = reduced_part(complex_to_real(c));
      deviation = std::max({deviation, std::abs(a.x1 - smp.y[0]), std::abs(a.x2 - smp.y[1]), std::abs(a.x3 - smp.y[2])});
    }
  }
  write_trajectory(ctx, "trajectory.tsv", traj);

  std::vector<double> xf(traj.back().y.begin(), traj.back().y.begin() + static_cast<long>(n));
  std::vector<double> pops;
  double norm2 = 0.0;
  for (double v : xf) {
    pops.push_back(v * v);
    norm2 += v * v;
  }
  auto& r = ctx.results;
  r["final_state"] = flow_list(xf);
  r["final_populations"] = flow_list(pops);
  r["norm2"] = norm2;
  if (complex_check) r["complex_deviation"] = deviation;
}

// extremal: energy-cost flow from a chart point.
void run_extremal(Section& s, Context& ctx) {
  const double T = s.positive("T");
  ExtremalPoint init;
  init.rho = s.real("rho", 0.0);
  init.theta = s.real("theta", std::acos(0.0));
  init.phi = s.real("phi", 0.0);
  init.p_rho = s.real("p_rho");
  init.p_phi = s.real("p_phi");
  const bool by_momentum = s.has("p_theta");
  if (by_momentum && s.has("H")) s.fail("H", "give either p_theta or H, not both");
  std::string sign = "plus";
  double H = 0.0;
  if (by_momentum) {
    init.p_theta = s.real("p_theta");
  } else {
    H = s.real("H");
    if (H < 0.0) s.fail("H", "must be >= 0 for the p_theta(0) = sign sqrt(2H) start");
    sign = s.word("p_theta_sign", "best", {"plus", "minus", "best"});
  }
  const bool track = s.flag("track_wavefunction", false);
  s.finish();

  PropagationOptions opts;
  opts.track_wavefunction = track;

  auto run_with = [&](double p_theta) {
    ExtremalPoint e = init;
    e.p_theta = p_theta;
    return propagate_extremal(e, ctx.k, T, ctx.cfg, opts);
  };
  ExtremalRun run;
  if (by_momentum) {
    run = run_with(init.p_theta);
  } else {
    // p_theta^2 / 2 is the momentum part of H at fixed chart point.
    const double a = std::sqrt(2.0 * H);
    if (sign == "plus") {
      run = run_with(a);
    } else if (sign == "minus") {
      run = run_with(-a);
    } else {
      ExtremalRun plus = run_with(a);
      ExtremalRun minus = run_with(-a);
      const bool take_minus = minus.final_fidelity > plus.final_fidelity;
      run = take_minus ? std::move(minus) : std::move(plus);
      sign = take_minus ? "minus" : "plus";
    }
  }
  write_trajectory(ctx, "trajectory.tsv", run.trajectory);

  MetricsReport m = metrics(run.trajectory);
  m.fidelity = run.final_fidelity;
  m.drifts = {{"hamiltonian", run.drift.hamiltonian}, {"p_phi", run.drift.p_phi}, {"p_rho", run.drift.p_rho}};
  auto& r = ctx.results;
  r["fidelity"] = run.final_fidelity;
  r["cost"] = run.cost;
  r["H"] = run.energy;
  r["p_theta"] = run.trajectory.front().y[4];
  if (!by_momentum) r["p_theta_sign"] = sign;
  YAML::Node mt(YAML::NodeType::Map);
  put_metrics(mt, m);
  r["metrics"] = mt;
  const ExtremalPoint last = ExtremalPoint::from_array(run.trajectory.back().y.data());
  const RealState3 x = last.cartesian();
  r["final_state"] = flow_list({x.x1, x.x2, x.x3});
  if (track) r["complex_deviation"] = chart_deviation(run.trajectory);
}

// stirap: minimizing branch of the cost int theta_dot^2.
void run_stirap(Section& s, Context& ctx) {
  double theta0 = 0.0;
  if (s.has("theta0")) {
    if (s.has("epsilon")) s.fail("epsilon", "give either theta0 or epsilon");
    theta0 = s.real("theta0");
  } else {
    theta0 = 0.5 * std::numbers::pi - s.real("epsilon", 0.02);
  }
  const double phi0 = s.real("phi0", 0.0);
  const double p_phi = s.real("p_phi");
  const double p_rho = s.real("p_rho");
  StirapOptions opts;
  opts.horizon = s.optional_real("T");
  if (opts.horizon && !(*opts.horizon > 0.0)) s.fail("T", "must be positive");
  s.finish();

  const StirapRun run = propagate_stirap(theta0, phi0, p_rho, p_phi, ctx.k, ctx.cfg, opts);
  write_trajectory(ctx, "trajectory.tsv", run.trajectory);
  auto& r = ctx.results;
  r["horizon"] = run.horizon;
  r["computed_horizon"] = run.computed_horizon;
  r["v2"] = run.v2;
  r["margin"] = run.margin;
  r["margin_band"] = to_string(run.band);
  r["fidelity"] = run.final_fidelity;
  r["relative_transfer"] = run.relative_transfer;
  r["final_populations"] = flow_list(run.final_populations);
  r["cost"] = run.cost;
  r["max_abs_p_theta"] = run.max_abs_p_theta;
  r["max_theta_deviation"] = run.max_theta_deviation;
  r["hamiltonian_expected"] = run.hamiltonian_expected;
  r["max_hamiltonian_error"] = run.max_hamiltonian_error;
  r["ratio_residual"] = run.ratio_residual;
  r["cross_residual"] = run.cross_residual;
  r["pump_peak_time"] = run.pump_peak_time;
  r["stokes_peak_time"] = run.stokes_peak_time;
  r["counterintuitive"] = run.counterintuitive;
}

// tripod: stirap branch of the four-level system.
void run_tripod(Section& s, Context& ctx) {
  TripodStirapParams p;
  p.k = ctx.k.value();
  p.init.theta1 = s.real("theta1", 0.01);
  if (s.has("theta2")) {
    if (s.has("epsilon")) s.fail("epsilon", "give either theta2 or epsilon");
    p.init.theta2 = s.real("theta2");
  } else {
    p.init.theta2 = 0.5 * std::numbers::pi - s.real("epsilon", 0.02);
  }
  p.init.theta3 = s.real("theta3", 0.0);
  p.init.p_rho = s.real("p_rho");
  p.init.p_theta1 = s.real("p_theta1");
  p.init.p_theta3 = s.real("p_theta3");
  p.w1 = s.real("w1", 1.0);
  p.horizon = s.optional_real("T");
  if (p.horizon && !(*p.horizon > 0.0)) s.fail("T", "must be positive");
  if (const auto w1_end = s.optional_real("w1_end")) {
    if (!p.horizon) s.fail("w1_end", "a ramped w1 needs an explicit T");
    const double w0 = p.w1, w1e = *w1_end, T = *p.horizon;
    p.w1_profile = [w0, w1e, T](double t) { return w0 + (w1e - w0) * t / T; };
  }
  const auto target = s.optional_real("tune_theta3");
  Interval bracket{1e-3, 0.05};
  if (target) {
    if (p.horizon || p.w1_profile) s.fail("tune_theta3", "tuning uses the computed horizon at constant w1");
    bracket = s.interval("tune_bracket", bracket);
  }
  s.finish();
  if (target) p.init.theta1 = tune_tripod_theta1(p, *target, bracket.lo, bracket.hi, ctx.cfg);

  const TripodStirapRun run = propagate_tripod_stirap(p, ctx.cfg);
  write_trajectory(ctx, "trajectory.tsv", run.trajectory);
  auto& r = ctx.results;
  r["theta1_initial"] = p.init.theta1;
  r["horizon"] = run.horizon;
  r["final_populations"] = flow_list(run.final_populations);
  r["theta3_final"] = run.trajectory.back().y[3];
  r["max_population2"] = run.max_population2;
  r["max_abs_p_theta2"] = run.max_abs_p_theta2;
  r["max_theta2_deviation"] = run.max_theta2_deviation;
  r["max_norm_identity_error"] = run.max_norm_identity_error;
  r["cost"] = run.cost;
  r["pump_peak_time"] = run.pump_peak_time;
  r["stokes_peak_time"] = run.stokes_peak_time;
  r["counterintuitive"] = run.counterintuitive;
}

// momentum-map: sampled image of (H, p_phi) and its boundary.
void run_momentum_map(Section& s, Context& ctx) {
  const double p_rho = s.positive("p_rho", 1.0);
  const std::size_t budget = s.count("budget", 20000);
  const std::size_t boundary_points = s.count("boundary_points", 200);
  Section b = s.child("box");
  const SamplingBox def;
  const Interval th = b.interval("theta", Interval{def.theta_lo, def.theta_hi});
  const Interval pt = b.interval("p_theta", Interval{def.p_theta_lo, def.p_theta_hi});
  const Interval pp = b.interval("p_phi", Interval{def.p_phi_lo, def.p_phi_hi});
  b.finish();
  s.adopt("box", b);
  if (th.lo <= 0.0 || th.hi >= std::numbers::pi) b.fail("theta", "must lie inside (0, pi)");
  const SamplingBox box{th.lo, th.hi, pt.lo, pt.hi, pp.lo, pp.hi};
  s.finish();

  const double k = ctx.k.value();
  const MomentumMapDiagram d = build_diagram(p_rho, k, budget, boundary_points, box);
  std::size_t i = 0;
  write_table(ctx, "image.tsv", {"theta", "p_theta", "p_phi", "H"}, [&](std::vector<double>& row) {
    if (i >= d.image.size()) return false;
    const auto& q = d.image[i++];
    row = {q.theta, q.p_theta, q.p_phi, q.H};
    return true;
  });
  double worst_sv = 0.0;
  i = 0;
  write_table(ctx, "boundary.tsv", {"theta", "p_theta", "p_phi", "H", "min_singular_value"},
              [&](std::vector<double>& row) {
                if (i >= d.boundary.points.size()) return false;
                const auto& q = d.boundary.points[i++];
                const double sv =
                    normalized_min_singular_value(gradient_matrix(q.theta, q.p_theta, q.p_phi, p_rho, k));
                worst_sv = std::max(worst_sv, sv);
                row = {q.theta, q.p_theta, q.p_phi, q.H, sv};
                return true;
              });
  const DiagramTopology t = diagram_topology(d);
  auto& r = ctx.results;
  r["image_samples"] = d.image.size();
  r["boundary_samples"] = d.boundary.points.size();
  r["boundary_skipped"] = d.boundary.skipped_thetas.size();
  r["boundary_max_singular_value"] = worst_sv;
  r["singular_line_end"] = std::sqrt(k * (2.0 * p_rho + k));
  YAML::Node topo(YAML::NodeType::Map);
  topo["boundary_below_singular_line"] = t.boundary_below_singular_line;
  topo["boundary_mirror_symmetric"] = t.boundary_mirror_symmetric;
  topo["boundary_monotone_arcs"] = t.boundary_monotone_arcs;
  topo["boundary_meets_singular_line_at_ends"] = t.boundary_meets_singular_line_at_ends;
  topo["image_above_lower_boundary"] = t.image_above_lower_boundary;
  topo["singular_line_inside_image"] = t.singular_line_inside_image;
  r["topology"] = topo;
}

// reduce: constrained section and, optionally, an orbit in invariants.
void run_reduce(Section& s, Context& ctx) {
  const double H = s.real("H", 0.0);
  const double p_phi = s.real("p_phi", 0.1);
  const double p_rho = s.real("p_rho", 1.0);
  Section g = s.child("grid");
  SectionGrid grid;
  grid.n1 = g.count("n1", grid.n1, 2);
  grid.n2 = g.count("n2", grid.n2, 2);
  const Interval a = g.interval("pi1", Interval{grid.pi1_lo, grid.pi1_hi});
  const Interval b = g.interval("pi2", Interval{grid.pi2_lo, grid.pi2_hi});
  g.finish();
  s.adopt("grid", g);
  if (a.lo <= -1.0 || a.hi >= 1.0) g.fail("pi1", "must lie inside (-1, 1)");
  grid.pi1_lo = a.lo;
  grid.pi1_hi = a.hi;
  grid.pi2_lo = b.lo;
  grid.pi2_hi = b.hi;

  struct OrbitSpec {
    double theta0, T;
    bool lower;
  };
  std::optional<OrbitSpec> orbit;
  if (s.has("orbit")) {
    Section o = s.child("orbit");
    OrbitSpec spec{};
    spec.theta0 = o.real("theta0");
    spec.lower = o.word("root", "upper", {"lower", "upper"}) == "lower";
    spec.T = o.positive("T", 40.0);
    o.finish();
    s.adopt("orbit", o);
    if (H != 0.0) o.fail("theta0", "orbits are started on the H = 0 fibre only");
    orbit = spec;
  }
  s.finish();

  const BitorusSection sec = bitorus_section(H, p_phi, p_rho, ctx.k.value(), grid);
  std::size_t i = 0;
  write_table(ctx, "section.tsv", {"pi1", "pi2", "pi4"}, [&](std::vector<double>& row) {
    if (i >= sec.points.size()) return false;
    const auto& q = sec.points[i++];
    row = {q.pi1, q.pi2, q.pi4};
    return true;
  });
  auto& r = ctx.results;
  r["section_points"] = sec.points.size();
  r["empty"] = sec.empty();
  r["origin_residual"] = sec.origin_residual;
  r["annulus_components"] = sec.annulus_components;
  r["pinch_at_origin"] = sec.pinch_at_origin;

  if (orbit) {
    const double T = orbit->T;
    const auto roots = zero_energy_momenta(orbit->theta0, p_phi, p_rho, ctx.k);
    ExtremalPoint e;
    e.theta = orbit->theta0;
    e.p_theta = orbit->lower ? roots.first : roots.second;
    e.p_phi = p_phi;
    e.p_rho = p_rho;
    const ExtremalRun run = propagate_extremal(e, ctx.k, T, ctx.cfg);
    double late_min = std::numeric_limits<double>::infinity();
    double worst_relation = 0.0, worst_pi3 = 0.0;
    i = 0;
    write_table(ctx, "orbit.tsv", {"t", "pi1", "pi2", "pi3", "pi4", "pi5", "pi6", "relation", "circle_distance"},
                [&](std::vector<double>& row) {
                  if (i >= run.trajectory.size()) return false;
                  const Sample& smp = run.trajectory.samples[i++];
                  const CartesianPhasePoint c = to_cartesian(ExtremalPoint::from_array(smp.y.data()));
                  const ReductionPoint rp = invariants_of(c);
                  const double dist = singular_circle_distance(c);
                  if (smp.t >= 0.5 * T) late_min = std::min(late_min, dist);
                  worst_relation = std::max(worst_relation, std::abs(rp.relation_residual()));
                  worst_pi3 = std::max(worst_pi3, std::abs(rp.pi3 - p_phi));
                  row = {smp.t, rp.pi1, rp.pi2, rp.pi3, rp.pi4, rp.pi5, rp.pi6, rp.relation_residual(), dist};
                  return true;
                });
    YAML::Node orb(YAML::NodeType::Map);
    orb["p_theta"] = e.p_theta;
    orb["late_min_circle_distance"] = late_min;
    orb["max_relation_residual"] = worst_relation;
    orb["max_pi3_drift"] = worst_pi3;
    r["orbit"] = orb;
  }
}

// search: grid plus simplex over initial costates.
void run_search(Section& s, Context& ctx) {
  ShootingProblem p;
  p.k = ctx.k.value();
  p.integrator = ctx.cfg;
  p.system = s.word("system", "three-level", {"three-level", "tripod"}) == "tripod" ? SystemKind::kTripod
                                                                                   : SystemKind::kThreeLevel;
  p.cost = s.word("cost", "energy", {"energy", "stirap"}) == "stirap" ? CostKind::kStirap : CostKind::kEnergy;
  const bool tripod = p.system == SystemKind::kTripod;
  const std::size_t dim = tripod ? 4 : 3;
  p.horizon = p.cost == CostKind::kEnergy ? s.real("T") : s.real("T", 0.0);
  std::vector<double> start_def(dim, 0.0), target_def(dim, 0.0);
  start_def[0] = 1.0;
  target_def[2] = 1.0;
  p.start = s.reals("start", start_def, dim);
  p.target = s.reals("target", target_def, dim);
  p.regularization = s.real("regularization", 0.02);
  p.theta1_regularization = s.real("theta1_regularization", 0.01);
  p.w1 = s.real("w1", 1.0);
  Section b = s.child("box");
  for (const auto& name : costate_names(p.system, p.cost)) p.box.push_back(b.interval(name, std::nullopt));
  b.finish();
  s.adopt("box", b);
  SearchOptions so;
  so.grid_points = s.count("grid_points", so.grid_points);
  so.starts = s.count("starts", so.starts);
  so.simplex_evaluations = s.count("simplex_evaluations", so.simplex_evaluations, 0);
  s.finish();

  const SearchResult res = search(p, so);
  write_trajectory(ctx, "trajectory.tsv", res.best.trajectory);
  auto& r = ctx.results;
  YAML::Node q(YAML::NodeType::Map);
  const auto names = costate_names(p.system, p.cost);
  for (std::size_t i = 0; i < names.size(); ++i) q[names[i]] = res.costates[i];
  r["costates"] = q;
  r["distance"] = res.best.distance;
  r["horizon"] = res.best.horizon;
  r["final_state"] = flow_list(res.best.final_state);
  YAML::Node mt(YAML::NodeType::Map);
  put_metrics(mt, res.best.report);
  r["metrics"] = mt;
  r["grid_evaluations"] = res.grid_evaluations;
  r["grid_failures"] = res.grid_failures;
  r["simplex_evaluations"] = res.simplex_evaluations;
  r["improved_by_simplex"] = res.improved_by_simplex;
  r["budget_exhausted"] = res.budget_exhausted;
}

using Runner = void (*)(Section&, Context&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> m{
      {"simulate", run_simulate}, {"extremal", run_extremal},         {"stirap", run_stirap},
      {"tripod", run_tripod},     {"momentum-map", run_momentum_map}, {"reduce", run_reduce},
      {"search", run_search}};
  return m;
}

void emit(std::ostream& os, const YAML::Node& n) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << n;
  os << e.c_str() << '\n';
}

int execute(const Invocation& inv, const YAML::Node& root, std::ostream& out) {
  const auto& table = runners();
  const auto it = table.find(inv.subcommand);
  if (it == table.end()) {
    throw ConfigError(0, "unknown subcommand '" + inv.subcommand + "'");
  }
  if (!root || root.IsNull()) {
    throw ConfigError(1, "empty configuration; expected a '" + inv.subcommand + "' section");
  }
  if (!root.IsMap()) {
    throw ConfigError(line_of(root), "configuration must be a mapping");
  }
  for (auto kv = root.begin(); kv != root.end(); ++kv) {
    const std::string key = kv->first.as<std::string>();
    if (key != "k" && key != "integrator" && key != inv.subcommand) {
      if (table.count(key)) {
        throw ConfigError(line_of(kv->first), "section '" + key + "' does not belong to subcommand '" +
                                                  inv.subcommand + "'");
      }
      throw ConfigError(line_of(kv->first), "unknown key '" + key + "'");
    }
  }
  if (!root[inv.subcommand]) {
    throw ConfigError(1, "missing '" + inv.subcommand + "' section");
  }

  Section top(root, "", 1);
  Context ctx;
  const double k = top.real("k", 1.0);
  if (k < 0.0) top.fail("k", "dissipation rate must be >= 0");
  ctx.k = DissipationRate(k);

  Section integ = top.child("integrator");
  IntegratorConfig def;
  ctx.cfg.rel_tol = inv.tol ? *inv.tol : integ.real("rel_tol", def.rel_tol);
  ctx.cfg.abs_tol = inv.tol ? 1e-2 * *inv.tol : integ.real("abs_tol", def.abs_tol);
  if (inv.tol) {
    // The echo records the tolerances actually used.
    integ.real("rel_tol", ctx.cfg.rel_tol);
    integ.real("abs_tol", ctx.cfg.abs_tol);
    integ.echo["rel_tol"] = ctx.cfg.rel_tol;
    integ.echo["abs_tol"] = ctx.cfg.abs_tol;
  }
  ctx.cfg.max_step = integ.positive("max_step", def.max_step);
  ctx.cfg.sample_interval = integ.positive("sample_interval", def.sample_interval);
  integ.finish();
  top.adopt("integrator", integ);
  try {
    ctx.cfg.validate();
  } catch (const DomainError& e) {
    integ.fail("rel_tol", e.what());
  }

  Section sec = top.child(inv.subcommand);
  if (!root[inv.subcommand].IsMap()) {
    throw ConfigError(line_of(root[inv.subcommand]), "'" + inv.subcommand + "' must be a mapping");
  }

  ctx.out = inv.out_dir;
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec) throw Error("cannot create output directory " + ctx.out.string() + ": " + ec.message());

  // Each runner reads and checks its whole section before computing.
  it->second(sec, ctx);
  top.adopt(inv.subcommand, sec);

  {
    std::ofstream f(ctx.out / "config.yaml");
    emit(f, top.echo);
  }
  YAML::Node summary(YAML::NodeType::Map);
  summary["subcommand"] = inv.subcommand;
  summary["seedless"] = inv.seedless;
  summary["results"] = ctx.results;
  YAML::Node files(YAML::NodeType::Sequence);
  for (const auto& f : ctx.files) files.push_back(f);
  files.push_back("config.yaml");
  summary["files"] = files;
  summary["config"] = top.echo;
  {
    std::ofstream f(ctx.out / "summary.yaml");
    emit(f, summary);
  }
  out << inv.subcommand << ": wrote " << (ctx.out / "summary.yaml").string() << '\n';
  return kExitOk;
}

int guarded(const Invocation& inv, const std::function<YAML::Node()>& load, std::ostream& out, std::ostream& err) {
  try {
    return execute(inv, load(), out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const YAML::ParserException& e) {
    err << "config error: line " << e.mark.line + 1 << ": " << e.msg << '\n';
    return kExitConfig;
  } catch (const YAML::BadFile& e) {
    err << "config error: cannot read " << inv.config_path << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace

int run(const Invocation& inv, std::ostream& out, std::ostream& err) {
  return guarded(inv, [&] { return YAML::LoadFile(inv.config_path); }, out, err);
}

int run_text(const Invocation& inv, const std::string& yaml, std::ostream& out, std::ostream& err) {
  return guarded(inv, [&] { return YAML::Load(yaml); }, out, err);
}

}  // namespace adiabatic::scenario
