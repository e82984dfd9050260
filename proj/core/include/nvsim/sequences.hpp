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

#ifndef NVSIM_SEQUENCES_HPP_
#define NVSIM_SEQUENCES_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nvsim/hamiltonian.hpp"

namespace nvsim {

enum class SegmentKind { kFree, kPulse };

struct Segment {
  SegmentKind kind = SegmentKind::kFree;
  double duration_us = 0.0;
  double phase = 0.0;  // added to the drive phase
  int drive_ref = 0;

  bool operator==(const Segment&) const = default;
};

struct TimelineMetadata {
  std::string protocol;
  double tau_us = 0.0;
  int order = 0;
  std::optional<int> group;
  std::optional<std::uint64_t> seed;
  double t_pi_us = 0.0;
  double duration_scale = 1.0;
  std::vector<double> block_phases;

  bool operator==(const TimelineMetadata&) const = default;
};

struct SequenceTimeline {
  std::vector<Segment> segments;
  TimelineMetadata metadata;

  double total_duration() const;
  std::size_t pulse_count() const;
  bool operator==(const SequenceTimeline&) const = default;
};

// Base XY8 block: X Y X Y Y X Y X.
inline constexpr double kXy8Pattern[8] = {0.0, 1.5707963267948966, 0.0, 1.5707963267948966,
                                          1.5707963267948966, 0.0, 1.5707963267948966, 0.0};

// Per-pulse phases for M blocks with per-block offsets.
std::vector<double> xy8_phase_table(std::span<const double> block_phases);

// One continuous pulse; durations are not scaled.
SequenceTimeline rabi_timeline(double duration_us, const DriveSpec& drive);

// Spacings are measured between pulse centres; tau/2 separates the pi/2
// centre from the first pi centre in the XY8 family.
SequenceTimeline hahn_timeline(double tau_us, const DriveSpec& drive, double t_pi_us);
SequenceTimeline xy8_timeline(int order, double tau_us, const DriveSpec& drive, double t_pi_us);
SequenceTimeline xy8_timeline_with_phases(int order, double tau_us, const DriveSpec& drive,
                                          double t_pi_us, std::span<const double> block_phases,
                                          std::string protocol = "xy8");
SequenceTimeline rxy8_timeline(int order, double tau_us, const DriveSpec& drive, double t_pi_us,
                               std::uint64_t seed);
SequenceTimeline rxy8_correlated_timeline(int order, double tau_us, const DriveSpec& drive,
                                          double t_pi_us, int group, std::uint64_t seed);

std::vector<double> random_block_phases(int order, std::uint64_t seed);
std::vector<double> correlated_block_phases(int order, int group, std::uint64_t seed);

double hahn_duration(double tau_us, double t_pi_us, double scale);
double xy8_duration(int order, double tau_us, double t_pi_us, double scale);

// One segment per line: kind, duration_us, phase, drive reference.
std::string timeline_to_text(const SequenceTimeline& tl);
SequenceTimeline timeline_from_text(std::string_view text);

}  // namespace nvsim

#endif  // NVSIM_SEQUENCES_HPP_
