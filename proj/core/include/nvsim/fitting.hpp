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

#ifndef NVSIM_FITTING_HPP_
#define NVSIM_FITTING_HPP_

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nvsim/hamiltonian.hpp"
#include "nvsim/system.hpp"

namespace nvsim {

// One Hahn-echo ESEEM observation. w_slow is the m_s = 0 frequency, w_fast
// the frequency of the manifold addressed by `transition`.
struct EseemMeasurement {
  double b0_tesla = 0.0;
  double theta_deg = 0.0;
  Transition transition = Transition::kMinusOne;
  double w_slow = 0.0;
  double w_fast = 0.0;
  double weight = 1.0;
};

struct EseemMeasurementSet {
  std::vector<EseemMeasurement> entries;
  // Larmor frequency of the m_s = +-1 manifolds at zero field, if measured.
  std::optional<double> zero_field_larmor;

  void validate() const;
  // At least 3 entries over at least 2 distinct fields.
  bool identifiable() const;
};

// CSV columns: b0_T, theta_deg, transition, w_slow_MHz, w_fast_MHz, weight.
EseemMeasurementSet parse_measurements_csv(std::string_view text);
EseemMeasurementSet read_measurements_csv(const std::filesystem::path& path);
std::string measurements_to_csv(const EseemMeasurementSet& set);

// Predicted frequencies for `a` under the measurement conditions.
EseemMeasurementSet synthesize_measurements(const Eigen::Matrix3d& a,
                                            const std::vector<EseemMeasurement>& conditions,
                                            NitrogenIsotope nitrogen);

// (xx, xy, xz, yy, yz, zz) in MHz.
using HyperfineComponents = std::array<double, 6>;
Eigen::Matrix3d to_matrix(const HyperfineComponents& c);
HyperfineComponents to_components(const Eigen::Matrix3d& a);
// Image under y -> -y: xy and yz change sign.
HyperfineComponents mirror_image(const HyperfineComponents& c);

// Weighted squared error of the predicted Larmor frequencies. Precomputes
// one static Hamiltonian per distinct field so evaluation is cheap.
class HyperfineObjective {
 public:
  HyperfineObjective(const EseemMeasurementSet& set, NitrogenIsotope nitrogen);
  double operator()(const HyperfineComponents& c) const;
  // Weighted frequency residuals in MHz; operator() is their squared norm.
  Eigen::VectorXd residuals(const HyperfineComponents& c) const;
  std::size_t residual_count() const { return residual_count_; }

 private:
  struct Field {
    Operator base;
    std::vector<EseemMeasurement> entries;
  };
  std::vector<int> dims_;
  int slot_ = 1;
  std::array<Operator, 6> couplings_;
  std::vector<Field> fields_;
  std::size_t residual_count_ = 0;
};

double objective(const Eigen::Matrix3d& a, const EseemMeasurementSet& set,
                 NitrogenIsotope nitrogen = NitrogenIsotope::kN14);

// Spherical shell on the z-row norm.
struct ZeroFieldConstraint {
  double radius = 0.0;
  double slack = 0.0;
  bool admits(double azx, double azy, double azz) const;
};
ZeroFieldConstraint zero_field_seed(double w_zero_field, double coarse_step = 0.5);

struct HyperfineSearchSpec {
  double coarse_range = 4.0;
  double coarse_step = 0.5;
  double fine_step = 0.01;
  double fine_halfwidth = 0.5;
  std::size_t top_k = 10;
  bool prune = true;
  int shard_index = 0;
  int shard_count = 1;
  int max_fine_rounds = 24;
  NitrogenIsotope nitrogen = NitrogenIsotope::kN14;
  int workers = 0;

  void validate() const;
};

struct Candidate {
  HyperfineComponents components{};
  double objective = 0.0;
};

struct SearchResult {
  Eigen::Matrix3d hyperfine = Eigen::Matrix3d::Zero();
  double objective = 0.0;
  std::vector<Candidate> runners_up;  // best first, excluding the argmin
  Candidate mirror;
  bool mirror_degenerate = false;
  bool identifiability_warning = false;
  std::string warning;
  std::size_t coarse_evaluations = 0;
  std::size_t fine_evaluations = 0;
  std::size_t pruned = 0;
};

// Strict order: objective, then Frobenius norm, then components.
bool candidate_less(const Candidate& a, const Candidate& b);

// Exhaustive coarse scan of this shard, then a fine scan around its argmin.
SearchResult grid_search(const EseemMeasurementSet& set, const HyperfineSearchSpec& spec);
// Deterministic merge of per-shard results.
SearchResult merge_results(const std::vector<SearchResult>& shards, std::size_t top_k = 10);

std::string search_report(const SearchResult& result);

}  // namespace nvsim

#endif  // NVSIM_FITTING_HPP_
