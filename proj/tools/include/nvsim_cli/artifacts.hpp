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

#ifndef NVSIM_CLI_ARTIFACTS_HPP_
#define NVSIM_CLI_ARTIFACTS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "nvsim/analysis.hpp"
#include "nvsim/config.hpp"
#include "nvsim/dataset.hpp"
#include "nvsim/hamiltonian.hpp"
#include "nvsim/system.hpp"

namespace nvsim::cli {

// Everything that determines a simulated trace. Built from a system config
// plus flags (CLI) or from a JSON body (HTTP).
struct SimulationRequest {
  SpinSystem system;
  Transition transition = Transition::kPlusOne;
  ProtocolParams protocol;
  std::vector<double> tau_us;
  double rabi_mhz = 40.0;
  double detuning_mhz = 0.0;
  double duration_scale = 1.0;
  int samples_per_period = 64;
  std::optional<double> t_pi_ns;
  std::optional<double> signal_frequency_mhz;
  double signal_b2_tesla = 0.0;
  double signal_phase = 0.0;
};

// Keys accepted in a request document besides the system keys.
std::vector<std::string> request_keys();

// Request from a flat key/value document; system keys follow system configs.
SimulationRequest request_from_config(const Config& cfg);

struct SimulationArtifacts {
  SweepTrace trace;
  std::string csv;
  std::string metadata;
};

SimulationArtifacts simulate(const SimulationRequest& request, int workers = 0);

// Ranked best-match table as CSV text.
std::string compare_table(const std::vector<Match>& matches);

// Tab-separated listing of index entries, header first.
std::string index_table(const std::vector<IndexEntry>& entries);

}  // namespace nvsim::cli

#endif  // NVSIM_CLI_ARTIFACTS_HPP_
