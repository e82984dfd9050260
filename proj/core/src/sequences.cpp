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

#include "nvsim/sequences.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "nvsim/config.hpp"
#include "nvsim/errors.hpp"
#include "nvsim/rng.hpp"

namespace nvsim {
namespace {

constexpr double kPi = std::numbers::pi;

void add_free(std::vector<Segment>& out, double duration) {
  if (duration < -1e-12) {
    throw GeometryError("pulse spacing too short for the pulse durations (free interval " +
                        format_double(duration) + " us)");
  }
  if (duration > 1e-12) out.push_back({SegmentKind::kFree, duration, 0.0, 0});
}

void add_pulse(std::vector<Segment>& out, double duration, double phase) {
  out.push_back({SegmentKind::kPulse, duration, phase, 0});
}

void check_common(double tau_us, const DriveSpec& drive, double t_pi_us) {
  drive.validate();
  if (!(t_pi_us > 0.0)) throw GeometryError("t_pi must be > 0");
  if (!(tau_us > 0.0) || !std::isfinite(tau_us)) throw GeometryError("tau must be > 0");
}

}  // namespace

double SequenceTimeline::total_duration() const {
  double t = 0.0;
  for (const auto& s : segments) t += s.duration_us;
  return t;
}

std::size_t SequenceTimeline::pulse_count() const {
  std::size_t n = 0;
  for (const auto& s : segments) n += s.kind == SegmentKind::kPulse;
  return n;
}

std::vector<double> xy8_phase_table(std::span<const double> block_phases) {
  std::vector<double> out;
  out.reserve(8 * block_phases.size());
  for (double offset : block_phases) {
    for (double p : kXy8Pattern) out.push_back(p + offset);
  }
  return out;
}

SequenceTimeline rabi_timeline(double duration_us, const DriveSpec& drive) {
  drive.validate();
  if (duration_us < 0.0) throw GeometryError("pulse duration must be >= 0");
  SequenceTimeline tl;
  tl.metadata.protocol = "rabi";
  tl.metadata.tau_us = duration_us;
  if (duration_us > 0.0) add_pulse(tl.segments, duration_us, 0.0);
  return tl;
}

SequenceTimeline hahn_timeline(double tau_us, const DriveSpec& drive, double t_pi_us) {
  check_common(tau_us, drive, t_pi_us);
  const double d = drive.duration_scale * t_pi_us;
  const double d2 = 0.5 * d;
  SequenceTimeline tl;
  tl.metadata = {"hahn", tau_us, 1, std::nullopt, std::nullopt, t_pi_us, drive.duration_scale, {}};
  add_pulse(tl.segments, d2, 0.0);
  add_free(tl.segments, tau_us - 0.5 * d2 - 0.5 * d);
  add_pulse(tl.segments, d, 0.0);
  add_free(tl.segments, tau_us - 0.5 * d - 0.5 * d2);
  // Odd number of pi pulses: closing pi/2 along +x restores |0>.
  add_pulse(tl.segments, d2, 0.0);
  return tl;
}

SequenceTimeline xy8_timeline_with_phases(int order, double tau_us, const DriveSpec& drive,
                                          double t_pi_us, std::span<const double> block_phases,
                                          std::string protocol) {
  check_common(tau_us, drive, t_pi_us);
  if (order < 1) throw GeometryError("order M must be >= 1");
  if (static_cast<int>(block_phases.size()) != order) {
    throw GeometryError("need one phase offset per XY8 block");
  }
  const double d = drive.duration_scale * t_pi_us;
  const double d2 = 0.5 * d;
  SequenceTimeline tl;
  tl.metadata.protocol = std::move(protocol);
  tl.metadata.tau_us = tau_us;
  tl.metadata.order = order;
  tl.metadata.t_pi_us = t_pi_us;
  tl.metadata.duration_scale = drive.duration_scale;
  tl.metadata.block_phases.assign(block_phases.begin(), block_phases.end());
  const std::vector<double> phases = xy8_phase_table(block_phases);
  tl.segments.reserve(2 * phases.size() + 3);
  add_pulse(tl.segments, d2, 0.0);
  add_free(tl.segments, 0.5 * tau_us - 0.5 * d2 - 0.5 * d);
  for (std::size_t k = 0; k < phases.size(); ++k) {
    if (k > 0) add_free(tl.segments, tau_us - d);
    add_pulse(tl.segments, d, phases[k]);
  }
  add_free(tl.segments, 0.5 * tau_us - 0.5 * d - 0.5 * d2);
  // Even number of pi pulses: closing pi/2 along -x restores |0>.
  add_pulse(tl.segments, d2, kPi);
  return tl;
}

SequenceTimeline xy8_timeline(int order, double tau_us, const DriveSpec& drive, double t_pi_us) {
  const std::vector<double> zeros(order > 0 ? order : 0, 0.0);
  return xy8_timeline_with_phases(order, tau_us, drive, t_pi_us, zeros, "xy8");
}

std::vector<double> random_block_phases(int order, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<double> out(order > 0 ? order : 0);
  for (double& p : out) p = 2.0 * kPi * rng.uniform();
  return out;
}

std::vector<double> correlated_block_phases(int order, int group, std::uint64_t seed) {
  if (group != 2 && group != 3) throw GeometryError("correlation group g must be 2 or 3");
  if (order < 1 || order % group != 0) {
    throw GeometryError("order M must be a positive multiple of g");
  }
  SplitMix64 rng(seed);
  std::vector<double> out;
  out.reserve(order);
  for (int m = 0; m < order; m += group) {
    const double first = 2.0 * kPi * rng.uniform();
    for (int j = 0; j < group; ++j) out.push_back(first + 2.0 * kPi * j / group);
  }
  return out;
}

SequenceTimeline rxy8_timeline(int order, double tau_us, const DriveSpec& drive, double t_pi_us,
                               std::uint64_t seed) {
  SequenceTimeline tl = xy8_timeline_with_phases(order, tau_us, drive, t_pi_us,
                                                 random_block_phases(order, seed), "rxy8");
  tl.metadata.seed = seed;
  return tl;
}

SequenceTimeline rxy8_correlated_timeline(int order, double tau_us, const DriveSpec& drive,
                                          double t_pi_us, int group, std::uint64_t seed) {
  SequenceTimeline tl =
      xy8_timeline_with_phases(order, tau_us, drive, t_pi_us,
                               correlated_block_phases(order, group, seed), "rxy8_correlated");
  tl.metadata.seed = seed;
  tl.metadata.group = group;
  return tl;
}

double hahn_duration(double tau_us, double t_pi_us, double scale) {
  return 0.5 * scale * t_pi_us + 2.0 * tau_us;
}

double xy8_duration(int order, double tau_us, double t_pi_us, double scale) {
  return 0.5 * scale * t_pi_us + 8.0 * order * tau_us;
}

std::string timeline_to_text(const SequenceTimeline& tl) {
  const TimelineMetadata& m = tl.metadata;
  std::ostringstream os;
  os << "# protocol " << m.protocol << "\n";
  os << "# tau_us " << format_double(m.tau_us) << "\n";
  os << "# order " << m.order << "\n";
  if (m.group) os << "# group " << *m.group << "\n";
  if (m.seed) os << "# seed " << *m.seed << "\n";
  os << "# t_pi_us " << format_double(m.t_pi_us) << "\n";
  os << "# duration_scale " << format_double(m.duration_scale) << "\n";
  if (!m.block_phases.empty()) {
    os << "# block_phases";
    for (double p : m.block_phases) os << ' ' << format_double(p);
    os << "\n";
  }
  for (const auto& s : tl.segments) {
    os << (s.kind == SegmentKind::kPulse ? "pulse" : "free") << ' ' << format_double(s.duration_us)
       << ' ' << format_double(s.phase) << " drive" << s.drive_ref << "\n";
  }
  return os.str();
}

SequenceTimeline timeline_from_text(std::string_view text) {
  SequenceTimeline tl;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    try {
      if (line[0] == '#') {
        std::string hash, key;
        ls >> hash >> key;
        std::string value;
        std::vector<std::string> values;
        while (ls >> value) values.push_back(value);
        if (values.empty()) throw ConfigError("missing value");
        auto& m = tl.metadata;
        if (key == "protocol") m.protocol = values[0];
        else if (key == "tau_us") m.tau_us = parse_double(values[0]);
        else if (key == "order") m.order = std::stoi(values[0]);
        else if (key == "group") m.group = std::stoi(values[0]);
        else if (key == "seed") m.seed = std::stoull(values[0]);
        else if (key == "t_pi_us") m.t_pi_us = parse_double(values[0]);
        else if (key == "duration_scale") m.duration_scale = parse_double(values[0]);
        else if (key == "block_phases") {
          for (const auto& v : values) m.block_phases.push_back(parse_double(v));
        } else {
          throw ConfigError("unknown header '" + key + "'");
        }
        continue;
      }
      std::string kind, dur, phase, ref;
      if (!(ls >> kind >> dur >> phase >> ref) || ref.rfind("drive", 0) != 0) {
        throw ConfigError("expected 'kind duration phase driveN'");
      }
      Segment s;
      if (kind == "pulse") s.kind = SegmentKind::kPulse;
      else if (kind == "free") s.kind = SegmentKind::kFree;
      else throw ConfigError("unknown segment kind '" + kind + "'");
      s.duration_us = parse_double(dur);
      s.phase = parse_double(phase);
      s.drive_ref = std::stoi(ref.substr(5));
      tl.segments.push_back(s);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), line_no);
    } catch (const std::logic_error&) {
      throw ConfigError("malformed number", line_no);
    }
  }
  return tl;
}

}  // namespace nvsim
