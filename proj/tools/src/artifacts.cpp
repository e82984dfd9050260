// Copyright 2026 The nvsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nvsim_cli/artifacts.hpp"

#include <algorithm>

#include "nvsim/engine.hpp"
#include "nvsim/errors.hpp"
#include "nvsim/io.hpp"
#include "nvsim/version.hpp"

namespace nvsim::cli {
namespace {

const std::vector<std::string> kRequestKeys = {
    "protocol",      "order",          "group",       "seed",        "tau_us",
    "transition",    "rabi_MHz",       "detuning_MHz", "duration_scale", "samples_per_period",
    "t_pi_ns",       "signal_MHz",     "signal_b2_T", "signal_phase"};

bool is_request_key(std::string_view k) {
  return std::find(kRequestKeys.begin(), kRequestKeys.end(), k) != kRequestKeys.end();
}

template <typename Fn>
auto at_line(const Config& cfg, std::string_view key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    if (e.line() != 0) throw;
    throw ConfigError(std::string(key) + ": " + e.what(), cfg.line(key));
  } catch (const Error& e) {
    throw ConfigError(std::string(key) + ": " + e.what(), cfg.line(key));
  }
}

}  // namespace

std::vector<std::string> request_keys() { return kRequestKeys; }

SimulationRequest request_from_config(const Config& cfg) {
  SimulationRequest r;
  r.system = system_from_config(cfg.filtered([](std::string_view k) { return !is_request_key(k); }));
  const Config c = cfg.filtered(is_request_key);
  r.protocol.protocol =
      at_line(c, "protocol", [&] { return parse_protocol(c.get_string("protocol", "xy8")); });
  r.protocol.order = static_cast<int>(c.get_int("order", 1));
  r.protocol.group = static_cast<int>(c.get_int("group", 2));
  r.protocol.seed = c.get_uint64("seed", 0);
  if (!c.has("tau_us")) throw ConfigError("missing key 'tau_us'");
  r.tau_us = at_line(c, "tau_us", [&] {
    const std::string& v = c.get_string("tau_us");
    return v.find(':') != std::string::npos ? parse_grid(v) : c.get_doubles("tau_us");
  });
  r.transition = at_line(c, "transition",
                         [&] { return parse_transition(c.get_string("transition", "plus_one")); });
  r.rabi_mhz = c.get_double("rabi_MHz", 40.0);
  r.detuning_mhz = c.get_double("detuning_MHz", 0.0);
  r.duration_scale = c.get_double("duration_scale", 1.0);
  r.samples_per_period = static_cast<int>(c.get_int("samples_per_period", 64));
  if (c.has("t_pi_ns")) r.t_pi_ns = c.get_double("t_pi_ns");
  if (c.has("signal_MHz")) {
    r.signal_frequency_mhz = c.get_double("signal_MHz");
    r.signal_b2_tesla = c.get_double("signal_b2_T", 0.0);
    r.signal_phase = c.get_double("signal_phase", 0.0);
  }
  if (!(r.rabi_mhz > 0.0)) throw ConfigError("rabi_MHz must be positive", c.line("rabi_MHz"));
  if (r.protocol.order < 1) throw ConfigError("order must be >= 1", c.line("order"));
  return r;
}

SimulationArtifacts simulate(const SimulationRequest& req, int workers) {
  req.system.validate();
  if (req.tau_us.size() < 8) throw GridError("need at least 8 sweep points");
  for (std::size_t i = 1; i < req.tau_us.size(); ++i) {
    if (!(req.tau_us[i] > req.tau_us[i - 1])) throw GridError("sweep values must increase");
  }
  DriveSpec drive = resonant_drive(req.system, req.transition, req.rabi_mhz);
  drive.detuning_mhz = req.detuning_mhz;
  drive.duration_scale = req.duration_scale;
  PropagationSettings settings;
  settings.samples_per_drive_period = req.samples_per_period;
  settings.validate();
  std::optional<SignalSpec> signal;
  if (req.signal_frequency_mhz) {
    SignalSpec s;
    s.frequency_mhz = *req.signal_frequency_mhz;
    s.b2_tesla = Eigen::Vector3d(0.0, 0.0, req.signal_b2_tesla);
    s.phase = req.signal_phase;
    s.validate();
    signal = s;
  }
  ProtocolParams proto = req.protocol;
  const double t_pi_ns = req.t_pi_ns ? *req.t_pi_ns : calibrate_pi(req.system, drive, settings);
  proto.t_pi_us = t_pi_ns * 1e-3;
  const Engine engine(req.system, drive, signal, settings);

  SimulationArtifacts out;
  out.trace = run_sweep(engine, proto, req.tau_us, workers);
  const bool rabi = proto.protocol == Protocol::kRabi;
  out.csv = trace_to_csv(out.trace, rabi ? "t_us" : "tau_us", "p");
  auto meta = out.trace.metadata;
  meta["engine_version"] = std::string(kEngineVersion);
  meta["transition"] = to_string(req.transition);
  meta["rabi_MHz"] = format_double(req.rabi_mhz);
  meta["drive_MHz"] = format_double(drive.frequency_mhz);
  meta["detuning_MHz"] = format_double(req.detuning_mhz);
  meta["duration_scale"] = format_double(req.duration_scale);
  meta["samples_per_period"] = std::to_string(req.samples_per_period);
  meta["t_pi_ns"] = format_double(t_pi_ns);
  meta["points"] = std::to_string(out.trace.x.size());
  if (signal) {
    meta["signal_MHz"] = format_double(signal->frequency_mhz);
    meta["signal_b2_T"] = format_double(req.signal_b2_tesla);
    meta["signal_phase"] = format_double(signal->phase);
  }
  const Config sys = Config::parse(system_to_config(req.system));
  for (const auto& k : sys.keys()) meta["system." + k] = sys.get_string(k);
  out.metadata = metadata_to_text(meta);
  return out;
}

std::string compare_table(const std::vector<Match>& matches) {
  std::string s = "rank,id,r,slope,intercept,isotope,b0_T,theta_deg,order,transition,family\n";
  int rank = 1;
  for (const auto& m : matches) {
    const RecordParams& p = m.record.params;
    s += std::to_string(rank++) + "," + m.record.id + "," + format_double(m.report.r) + "," +
         format_double(m.report.slope) + "," + format_double(m.report.intercept) + "," +
         to_string(p.isotope) + "," + format_double(p.b0_tesla) + "," +
         format_double(p.theta_deg) + "," + std::to_string(p.order) + "," +
         to_string(p.transition) + "," + p.family + "\n";
  }
  return s;
}

std::string index_table(const std::vector<IndexEntry>& entries) {
  std::string s = "id\tisotope\tb0_T\ttheta_deg\torder\ttransition\tprotocol\tfamily\trabi_MHz\tt_pi_ns\n";
  for (const auto& e : entries) {
    s += e.id + "\t" + to_string(e.isotope) + "\t" + format_double(e.b0_tesla) + "\t" +
         format_double(e.theta_deg) + "\t" + std::to_string(e.order) + "\t" +
         to_string(e.transition) + "\t" + to_string(e.protocol) + "\t" + e.family + "\t" +
         format_double(e.rabi_mhz) + "\t" + format_double(e.t_pi_ns) + "\n";
  }
  return s;
}

}  // namespace nvsim::cli
