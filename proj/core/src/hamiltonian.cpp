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

#include "nvsim/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "nvsim/errors.hpp"

namespace nvsim {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Embedded {
  Operator x, y, z;
};

Embedded embedded_spin(double s, int slot, std::span<const int> dims) {
  const SpinOperatorSet ops = spin_operators(s);
  return {embed(ops.sx, slot, dims), embed(ops.sy, slot, dims), embed(ops.sz, slot, dims)};
}

double spin_of_dim(int d) { return 0.5 * (d - 1); }

Operator dot(const Eigen::Vector3d& v, const Embedded& s) {
  return v.x() * s.x + v.y() * s.y + v.z() * s.z;
}

}  // namespace

void DriveSpec::validate() const {
  if (!b1_tesla.allFinite()) throw ConfigError("drive field must be finite");
  if (!(duration_scale > 0.0)) throw ConfigError("pulse duration scale must be > 0");
  if (!std::isfinite(frequency_mhz) || !std::isfinite(phase) || !std::isfinite(detuning_mhz)) {
    throw ConfigError("drive frequency and phase must be finite");
  }
}

void SignalSpec::validate() const {
  if (!b2_tesla.allFinite()) throw ConfigError("signal field must be finite");
  if (!(frequency_mhz > 0.0)) throw ConfigError("signal frequency must be > 0");
}

Operator build_internal(const SpinSystem& sys) {
  sys.validate();
  const std::vector<int> dims = sys.dims();
  const SpinConstants& c = sys.constants;
  const Embedded s = embedded_spin(1.0, 0, dims);
  const int n = total_dim(dims);
  const Eigen::Vector3d b0 = sys.b0_vector();
  Operator h = c.d * (s.z * s.z - (2.0 / 3.0) * Operator::Identity(n, n));
  h -= c.gamma_e * dot(b0, s);
  if (sys.nitrogen != NitrogenIsotope::kNone) {
    const int slot = sys.nitrogen_slot();
    const Embedded in = embedded_spin(spin_of_dim(dims[slot]), slot, dims);
    h += c.a_perp * (s.x * in.x + s.y * in.y) + c.a_par * (s.z * in.z);
    h -= c.gamma_n * dot(b0, in);
    if (sys.nitrogen == NitrogenIsotope::kN14) h += c.quadrupole * (in.z * in.z);
  }
  return 0.5 * (h + h.adjoint());
}

Operator build_sensing_static(const SpinSystem& sys) {
  if (!sys.target) throw ConfigError("system has no target spin");
  sys.validate();
  const std::vector<int> dims = sys.dims();
  const Embedded s = embedded_spin(1.0, 0, dims);
  const Embedded ic = embedded_spin(0.5, sys.target_slot(), dims);
  const std::array<const Operator*, 3> sv{&s.x, &s.y, &s.z};
  const std::array<const Operator*, 3> iv{&ic.x, &ic.y, &ic.z};
  const Eigen::Matrix3d& a = sys.target->hyperfine;
  const int n = total_dim(dims);
  Operator h = Operator::Zero(n, n);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      if (a(i, j) != 0.0) h += a(i, j) * ((*sv[i]) * (*iv[j]));
    }
  }
  h -= sys.target->gamma * dot(sys.b0_vector(), ic);
  return 0.5 * (h + h.adjoint());
}

Operator build_static(const SpinSystem& sys) {
  Operator h = build_internal(sys);
  if (sys.target) h += build_sensing_static(sys);
  return h;
}

Operator electron_field_coupling(const SpinSystem& sys, const Eigen::Vector3d& b) {
  const std::vector<int> dims = sys.dims();
  return sys.constants.gamma_e * dot(b, embedded_spin(1.0, 0, dims));
}

double drive_envelope(const DriveSpec& spec, double t_us) {
  return std::sin(kTwoPi * spec.carrier_mhz() * t_us + spec.phase);
}

double signal_envelope(const SignalSpec& spec, double t_us) {
  return std::sin(kTwoPi * spec.frequency_mhz * t_us + spec.phase);
}

Operator drive_hamiltonian(const SpinSystem& sys, const DriveSpec& spec, double t_us) {
  return drive_envelope(spec, t_us) * electron_field_coupling(sys, spec.b1_tesla);
}

Operator signal_hamiltonian(const SpinSystem& sys, const SignalSpec& spec, double t_us) {
  return signal_envelope(spec, t_us) * electron_field_coupling(sys, spec.b2_tesla);
}

DriveSpec resonant_drive(const SpinSystem& sys, Transition t, double rabi_mhz) {
  DriveSpec d;
  d.b1_tesla = Eigen::Vector3d(rabi_mhz / std::abs(sys.constants.gamma_e), 0.0, 0.0);
  d.frequency_mhz = transition_frequency(sys, t);
  return d;
}

StaticSpectrum::StaticSpectrum(const Operator& h, std::span<const int> dims)
    : dims_(dims.begin(), dims.end()) {
  const int n = total_dim(dims);
  if (h.rows() != n || h.cols() != n) throw DimensionError("Hamiltonian does not match dims");
  if (dims.empty() || dims[0] != 3) throw DimensionError("slot 0 must be the spin-1 electron");
  Eigen::SelfAdjointEigenSolver<Operator> es(h);
  if (es.info() != Eigen::Success) throw DegeneracyError("eigensolver failed");
  Operator v = es.eigenvectors();
  const Eigen::VectorXd& e = es.eigenvalues();

  // Per basis index: electron m_s and nuclear basis indices.
  const std::size_t slots = dims.size();
  std::vector<std::vector<int>> digits(n, std::vector<int>(slots));
  for (int i = 0; i < n; ++i) {
    int rem = i;
    for (std::size_t k = slots; k-- > 0;) {
      digits[i][k] = rem % dims[k];
      rem /= dims[k];
    }
  }

  // Resolve exact degeneracies with a diagonal label operator.
  Eigen::VectorXd label(n);
  for (int i = 0; i < n; ++i) {
    double l = 1000.0 * (1 - digits[i][0]);
    double w = 10.0;
    for (std::size_t k = 1; k < slots; ++k, w /= 10.0) l += w * (0.5 * (dims[k] - 1) - digits[i][k]);
    label(i) = l;
  }
  const double scale = 1.0 + e.cwiseAbs().maxCoeff();
  energies_.assign(e.data(), e.data() + n);
  for (int start = 0; start < n;) {
    int stop = start + 1;
    while (stop < n && e(stop) - e(stop - 1) < 1e-10 * scale) ++stop;
    if (stop - start > 1) {
      const int m = stop - start;
      const Operator block = v.middleCols(start, m);
      const Operator projected = block.adjoint() * label.asDiagonal() * block;
      Eigen::SelfAdjointEigenSolver<Operator> ls(0.5 * (projected + projected.adjoint()));
      v.middleCols(start, m) = block * ls.eigenvectors();
      for (int j = start; j < stop; ++j) {
        energies_[j] = (v.col(j).adjoint() * h * v.col(j))(0, 0).real();
      }
    }
    start = stop;
  }

  ms_.resize(n);
  plus_share_.assign(n, 0.0);
  nuclear_index_.assign(n, std::vector<int>(slots > 1 ? slots - 1 : 0));
  std::vector<std::array<double, 3>> overlaps(n);
  bool ambiguous = false;
  std::vector<int> sector;  // states outside m_s = 0
  for (int j = 0; j < n; ++j) {
    std::array<double, 3> w{0.0, 0.0, 0.0};
    std::vector<std::vector<double>> nw(slots);
    for (std::size_t k = 1; k < slots; ++k) nw[k].assign(dims[k], 0.0);
    for (int i = 0; i < n; ++i) {
      const double p = std::norm(v(i, j));
      w[digits[i][0]] += p;
      for (std::size_t k = 1; k < slots; ++k) nw[k][digits[i][k]] += p;
    }
    overlaps[j] = w;
    if (std::max(w[1], w[0] + w[2]) < 0.5) ambiguous = true;
    ms_[j] = 0;
    if (w[0] + w[2] > w[1]) sector.push_back(j);
    for (std::size_t k = 1; k < slots; ++k) {
      nuclear_index_[j][k - 1] =
          static_cast<int>(std::max_element(nw[k].begin(), nw[k].end()) - nw[k].begin());
    }
  }
  // Balanced split of the m_s = +-1 sector; near zero field its states can mix.
  std::stable_sort(sector.begin(), sector.end(), [&](int a, int b) {
    return overlaps[a][0] - overlaps[a][2] > overlaps[b][0] - overlaps[b][2];
  });
  for (std::size_t r = 0; r < sector.size(); ++r) {
    const int j = sector[r];
    ms_[j] = r < sector.size() / 2 ? 1 : -1;
    const double f = overlaps[j][0] / (overlaps[j][0] + overlaps[j][2]);
    plus_share_[j] = f > 0.99 ? 1.0 : f < 0.01 ? 0.0 : f;
  }
  std::array<int, 3> counts{0, 0, 0};
  for (int j = 0; j < n; ++j) ++counts[1 - ms_[j]];
  if (ambiguous || counts[0] != n / 3 || counts[1] != n / 3 || counts[2] != n / 3) {
    std::ostringstream os;
    os << "cannot assign eigenstates to electron manifolds; overlap table"
          " (state: energy |+1| |0| |-1|):";
    for (int j = 0; j < n; ++j) {
      os << "\n  " << j << ": " << energies_[j] << " " << overlaps[j][0] << " "
         << overlaps[j][1] << " " << overlaps[j][2];
    }
    throw DegeneracyError(os.str());
  }
}

double StaticSpectrum::centroid(int ms) const {
  double sum = 0.0;
  double weight = 0.0;
  for (std::size_t j = 0; j < energies_.size(); ++j) {
    double share = 0.0;
    if (ms == 0) {
      share = ms_[j] == 0 ? 1.0 : 0.0;
    } else if (ms_[j] != 0) {
      share = ms == 1 ? plus_share_[j] : 1.0 - plus_share_[j];
    }
    sum += share * energies_[j];
    weight += share;
  }
  return sum / weight;
}

double StaticSpectrum::nuclear_gap(int ms, int slot) const {
  if (slot < 1 || slot >= static_cast<int>(dims_.size())) {
    throw DimensionError("nuclear slot out of range");
  }
  const int d = dims_[slot];
  std::map<std::vector<int>, std::vector<double>> groups;
  for (std::size_t j = 0; j < energies_.size(); ++j) {
    if (ms_[j] != ms) continue;
    std::vector<int> key = nuclear_index_[j];
    key.erase(key.begin() + (slot - 1));
    groups[key].push_back(energies_[j]);
  }
  double sum = 0.0;
  for (auto& [key, levels] : groups) {
    if (static_cast<int>(levels.size()) != d) {
      throw DegeneracyError("spectator nuclear configuration holds " +
                            std::to_string(levels.size()) + " levels, expected " +
                            std::to_string(d));
    }
    std::sort(levels.begin(), levels.end());
    double gap = levels[1] - levels[0];
    for (int k = 2; k < d; ++k) gap = std::min(gap, levels[k] - levels[k - 1]);
    sum += gap;
  }
  return sum / static_cast<double>(groups.size());
}

double transition_frequency(const SpinSystem& sys, Transition target) {
  const std::vector<int> dims = sys.dims();
  const StaticSpectrum spec(build_static(sys), dims);
  return std::abs(spec.centroid(transition_ms(target)) - spec.centroid(0));
}

double effective_larmor(const SpinSystem& sys, int ms, Nucleus which) {
  if (ms < -1 || ms > 1) throw ConfigError("m_s must be -1, 0 or +1");
  int slot = -1;
  switch (which) {
    case Nucleus::kAuto: slot = sys.target ? sys.target_slot() : sys.nitrogen_slot(); break;
    case Nucleus::kNitrogen: slot = sys.nitrogen_slot(); break;
    case Nucleus::kTarget: slot = sys.target_slot(); break;
  }
  if (slot < 0) throw ConfigError("system has no nucleus of interest");
  const std::vector<int> dims = sys.dims();
  return StaticSpectrum(build_static(sys), dims).nuclear_gap(ms, slot);
}

double zero_field_larmor(const Eigen::Matrix3d& a) { return a.row(2).norm(); }

}  // namespace nvsim
