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

#ifndef NVSIM_ANALYSIS_HPP_
#define NVSIM_ANALYSIS_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nvsim/engine.hpp"

namespace nvsim {

enum class TraceKind { kSimulated, kExperimental };

struct SweepTrace {
  std::vector<double> x;
  std::vector<double> p;
  TraceKind kind = TraceKind::kSimulated;
  std::map<std::string, std::string> metadata;

  // Equal lengths >= 8, x strictly increasing.
  void validate() const;
};

enum class Protocol { kRabi, kHahn, kXy8, kRxy8, kRxy8Correlated };

std::string to_string(Protocol p);
Protocol parse_protocol(std::string_view text);

struct ProtocolParams {
  Protocol protocol = Protocol::kXy8;
  int order = 1;
  int group = 2;
  std::uint64_t seed = 0;
  double t_pi_us = 0.0;
};

// Timeline for sweep coordinate x: tau for echo protocols, pulse duration for Rabi.
SequenceTimeline compile(const ProtocolParams& params, double x, const DriveSpec& drive);

// p(x) for every grid point; failures are rethrown as SweepPointError.
SweepTrace run_sweep(const Engine& engine, const ProtocolParams& params,
                     std::span<const double> x, int workers = 0);

// Evenly spaced grid parsed from "start:stop:n".
std::vector<double> linear_grid(double start, double stop, int n);
std::vector<double> parse_grid(std::string_view spec);

struct SpectralPeak {
  double frequency = 0.0;  // MHz
  double magnitude = 0.0;
};

struct Spectrum {
  std::vector<double> frequency;
  std::vector<double> magnitude;
  std::vector<SpectralPeak> peaks;  // strongest first
  double bin_width = 0.0;
  std::string window;
};

struct FftOptions {
  bool hann_window = true;
  double noise_multiple = 5.0;    // peaks exceed this many times the median
  double relative_floor = 0.03;   // and this fraction of the largest bin
};

Spectrum fft_spectrum(const SweepTrace& trace, const FftOptions& options = {});

struct EnvelopeFit {
  double tau_c = 0.0;
  double tau_c_sigma = 0.0;
  double amplitude = 0.0;
  double offset = 0.0;
};

// A exp[-(t/tau_c)^4] + C on the upper envelope of the trace.
EnvelopeFit fit_envelope(const SweepTrace& trace);

struct EseemFit {
  double w_slow = 0.0;  // MHz
  double w_fast = 0.0;  // MHz
  double depth = 0.0;
  double baseline = 0.0;
  double residual = 0.0;  // RMS
};

// 1 - k sin^2(pi a t) sin^2(pi b t) + c, seeded from spectral peaks.
EseemFit extract_eseem(const SweepTrace& trace);

double pearson(std::span<const double> a, std::span<const double> b);

struct CorrelationReport {
  double slope = 0.0;
  double intercept = 0.0;
  double r = 0.0;
};

// Linear interpolation of (x, y) at xq; xq must lie inside [x.front(), x.back()].
std::vector<double> resample(std::span<const double> x, std::span<const double> y,
                             std::span<const double> xq);

// counts ~ slope * p + intercept, with the simulation resampled onto the
// experimental grid when they differ.
CorrelationReport fit_linear_map(const SweepTrace& experimental, const SweepTrace& simulated);

}  // namespace nvsim

#endif  // NVSIM_ANALYSIS_HPP_
