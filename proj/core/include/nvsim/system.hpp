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

#ifndef NVSIM_SYSTEM_HPP_
#define NVSIM_SYSTEM_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nvsim/config.hpp"
#include "nvsim/spin.hpp"

namespace nvsim {

enum class NitrogenIsotope { kNone, kN14, kN15 };
enum class Transition { kPlusOne, kMinusOne };

std::string to_string(NitrogenIsotope iso);
std::string to_string(Transition t);
NitrogenIsotope parse_isotope(std::string_view text);
Transition parse_transition(std::string_view text);
int transition_ms(Transition t);

namespace constants {
inline constexpr double kZeroFieldSplitting = 2870.0;  // MHz
inline constexpr double kGammaElectron = -28025.0;     // MHz/T
inline constexpr double kGammaN15 = -4.316;            // MHz/T
inline constexpr double kGammaN14 = 3.077;             // MHz/T
inline constexpr double kAPerpN14 = -2.70;             // MHz
inline constexpr double kAParN14 = -2.14;              // MHz
inline constexpr double kAPerpN15 = 3.65;              // MHz
inline constexpr double kAParN15 = 3.03;               // MHz
inline constexpr double kQuadrupoleN14 = -5.01;        // MHz
inline constexpr double kGammaC13 = 10.705;            // MHz/T
inline constexpr double kGammaH1 = 42.57;              // MHz/T
}  // namespace constants

struct SpinConstants {
  double d = constants::kZeroFieldSplitting;
  double gamma_e = constants::kGammaElectron;
  double gamma_n = 0.0;
  double a_perp = 0.0;
  double a_par = 0.0;
  double quadrupole = 0.0;

  static SpinConstants defaults(NitrogenIsotope iso);
};

struct TargetSpin {
  double gamma = constants::kGammaC13;  // MHz/T
  Eigen::Matrix3d hyperfine = Eigen::Matrix3d::Zero();  // MHz, symmetric
};

// Electron (slot 0), then nitrogen if present, then the target spin.
struct SpinSystem {
  NitrogenIsotope nitrogen = NitrogenIsotope::kNone;
  std::optional<TargetSpin> target;
  double b0_tesla = 0.0;
  double theta_deg = 0.0;
  double azimuth_deg = 0.0;
  SpinConstants constants;

  static SpinSystem make(NitrogenIsotope iso, double b0_tesla, double theta_deg);

  std::vector<int> dims() const;
  int dim() const;
  int nitrogen_slot() const;  // -1 when absent
  int target_slot() const;    // -1 when absent
  Eigen::Vector3d b0_vector() const;
  void validate() const;
};

SpinSystem system_from_config(const Config& cfg);
std::string system_to_config(const SpinSystem& sys);

// Six independent components (xx, xy, xz, yy, yz, zz) and back.
Eigen::Matrix3d hyperfine_from_components(const std::vector<double>& c);
std::vector<double> hyperfine_components(const Eigen::Matrix3d& a);

DensityMatrix initial_state(const SpinSystem& sys);

}  // namespace nvsim

#endif  // NVSIM_SYSTEM_HPP_
