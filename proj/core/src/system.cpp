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

#include "nvsim/system.hpp"

#include <cmath>
#include <numbers>

#include "nvsim/errors.hpp"

namespace nvsim {

std::string to_string(NitrogenIsotope iso) {
  switch (iso) {
    case NitrogenIsotope::kN14: return "n14";
    case NitrogenIsotope::kN15: return "n15";
    case NitrogenIsotope::kNone: break;
  }
  return "none";
}

std::string to_string(Transition t) { return t == Transition::kPlusOne ? "plus_one" : "minus_one"; }

NitrogenIsotope parse_isotope(std::string_view text) {
  if (text == "n14" || text == "14N" || text == "N14") return NitrogenIsotope::kN14;
  if (text == "n15" || text == "15N" || text == "N15") return NitrogenIsotope::kN15;
  if (text == "none") return NitrogenIsotope::kNone;
  throw ConfigError("unknown nitrogen isotope '" + std::string(text) + "'");
}

Transition parse_transition(std::string_view text) {
  if (text == "plus_one" || text == "+1" || text == "p1") return Transition::kPlusOne;
  if (text == "minus_one" || text == "-1" || text == "m1") return Transition::kMinusOne;
  throw ConfigError("unknown transition '" + std::string(text) + "'");
}

int transition_ms(Transition t) { return t == Transition::kPlusOne ? 1 : -1; }

SpinConstants SpinConstants::defaults(NitrogenIsotope iso) {
  SpinConstants c;
  if (iso == NitrogenIsotope::kN14) {
    c.gamma_n = constants::kGammaN14;
    c.a_perp = constants::kAPerpN14;
    c.a_par = constants::kAParN14;
    c.quadrupole = constants::kQuadrupoleN14;
  } else if (iso == NitrogenIsotope::kN15) {
    c.gamma_n = constants::kGammaN15;
    c.a_perp = constants::kAPerpN15;
    c.a_par = constants::kAParN15;
  }
  return c;
}

SpinSystem SpinSystem::make(NitrogenIsotope iso, double b0_tesla, double theta_deg) {
  SpinSystem s;
  s.nitrogen = iso;
  s.b0_tesla = b0_tesla;
  s.theta_deg = theta_deg;
  s.constants = SpinConstants::defaults(iso);
  return s;
}

std::vector<int> SpinSystem::dims() const {
  std::vector<int> d{3};
  if (nitrogen == NitrogenIsotope::kN14) d.push_back(3);
  if (nitrogen == NitrogenIsotope::kN15) d.push_back(2);
  if (target) d.push_back(2);
  return d;
}

int SpinSystem::dim() const {
  const auto d = dims();
  return total_dim(d);
}

int SpinSystem::nitrogen_slot() const { return nitrogen == NitrogenIsotope::kNone ? -1 : 1; }

int SpinSystem::target_slot() const {
  if (!target) return -1;
  return nitrogen == NitrogenIsotope::kNone ? 1 : 2;
}

Eigen::Vector3d SpinSystem::b0_vector() const {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double th = theta_deg * kDeg;
  const double az = azimuth_deg * kDeg;
  return b0_tesla * Eigen::Vector3d(std::sin(th) * std::cos(az), std::sin(th) * std::sin(az),
                                    std::cos(th));
}

void SpinSystem::validate() const {
  if (!std::isfinite(b0_tesla) || b0_tesla < 0.0) throw ConfigError("b0 must be >= 0");
  if (!(theta_deg >= 0.0 && theta_deg <= 180.0)) {
    throw ConfigError("polar angle must lie in [0, 180] degrees");
  }
  if (!std::isfinite(azimuth_deg)) throw ConfigError("azimuth must be finite");
  if (target) {
    const Eigen::Matrix3d& a = target->hyperfine;
    if (!a.allFinite() || (a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw ConfigError("hyperfine matrix must be finite and symmetric");
    }
  }
}

Eigen::Matrix3d hyperfine_from_components(const std::vector<double>& c) {
  if (c.size() != 6) throw ConfigError("hyperfine needs six components xx xy xz yy yz zz");
  Eigen::Matrix3d a;
  a << c[0], c[1], c[2], c[1], c[3], c[4], c[2], c[4], c[5];
  return a;
}

std::vector<double> hyperfine_components(const Eigen::Matrix3d& a) {
  return {a(0, 0), a(0, 1), a(0, 2), a(1, 1), a(1, 2), a(2, 2)};
}

SpinSystem system_from_config(const Config& cfg) {
  cfg.require_known({"nitrogen", "b0_T", "theta_deg", "azimuth_deg", "target",
                     "target_gamma_MHz_per_T", "target_hyperfine_MHz", "D_MHz",
                     "gamma_e_MHz_per_T", "gamma_n_MHz_per_T", "a_perp_MHz", "a_par_MHz",
                     "Q_MHz"});
  SpinSystem s;
  try {
    s.nitrogen = parse_isotope(cfg.get_string("nitrogen", "none"));
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), cfg.line("nitrogen"));
  }
  s.constants = SpinConstants::defaults(s.nitrogen);
  s.b0_tesla = cfg.get_double("b0_T");
  s.theta_deg = cfg.get_double("theta_deg", 0.0);
  s.azimuth_deg = cfg.get_double("azimuth_deg", 0.0);
  s.constants.d = cfg.get_double("D_MHz", s.constants.d);
  s.constants.gamma_e = cfg.get_double("gamma_e_MHz_per_T", s.constants.gamma_e);
  s.constants.gamma_n = cfg.get_double("gamma_n_MHz_per_T", s.constants.gamma_n);
  s.constants.a_perp = cfg.get_double("a_perp_MHz", s.constants.a_perp);
  s.constants.a_par = cfg.get_double("a_par_MHz", s.constants.a_par);
  s.constants.quadrupole = cfg.get_double("Q_MHz", s.constants.quadrupole);
  const std::string target = cfg.get_string("target", "none");
  if (target == "c13") {
    TargetSpin t;
    t.gamma = cfg.get_double("target_gamma_MHz_per_T", constants::kGammaC13);
    if (cfg.has("target_hyperfine_MHz")) {
      try {
        t.hyperfine = hyperfine_from_components(cfg.get_doubles("target_hyperfine_MHz"));
      } catch (const ConfigError& e) {
        throw ConfigError(e.what(), cfg.line("target_hyperfine_MHz"));
      }
    }
    s.target = t;
  } else if (target != "none") {
    throw ConfigError("unknown target '" + target + "'", cfg.line("target"));
  }
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(e.what(), cfg.line("b0_T"));
  }
  return s;
}

std::string system_to_config(const SpinSystem& s) {
  std::string out;
  auto put = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  put("nitrogen", to_string(s.nitrogen));
  put("b0_T", format_double(s.b0_tesla));
  put("theta_deg", format_double(s.theta_deg));
  put("azimuth_deg", format_double(s.azimuth_deg));
  put("D_MHz", format_double(s.constants.d));
  put("gamma_e_MHz_per_T", format_double(s.constants.gamma_e));
  put("gamma_n_MHz_per_T", format_double(s.constants.gamma_n));
  put("a_perp_MHz", format_double(s.constants.a_perp));
  put("a_par_MHz", format_double(s.constants.a_par));
  put("Q_MHz", format_double(s.constants.quadrupole));
  if (s.target) {
    put("target", "c13");
    put("target_gamma_MHz_per_T", format_double(s.target->gamma));
    std::string comps;
    for (double c : hyperfine_components(s.target->hyperfine)) {
      if (!comps.empty()) comps += ' ';
      comps += format_double(c);
    }
    put("target_hyperfine_MHz", comps);
  } else {
    put("target", "none");
  }
  return out;
}

DensityMatrix initial_state(const SpinSystem& sys) {
  const auto d = sys.dims();
  return initial_state(std::span<const int>(d));
}

}  // namespace nvsim
