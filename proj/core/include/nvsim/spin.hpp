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

#ifndef NVSIM_SPIN_HPP_
#define NVSIM_SPIN_HPP_

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace nvsim {

using Complex = std::complex<double>;
// Dense complex square matrix on a (composite) spin Hilbert space.
using Operator = Eigen::MatrixXcd;

// Cartesian spin operators in the |m = s ... -s> basis.
struct SpinOperatorSet {
  double s = 0.0;
  Operator sx;
  Operator sy;
  Operator sz;

  int dim() const { return static_cast<int>(sz.rows()); }
};

// Throws InvalidSpinError unless 2s is a non-negative integer and s <= 3.
SpinOperatorSet spin_operators(double s);

// Places `op` on subsystem `slot`, identity elsewhere.
Operator embed(const Operator& op, std::size_t slot, std::span<const int> dims);

int total_dim(std::span<const int> dims);

bool is_hermitian(const Operator& op, double tol = 1e-12);
double max_abs_diff(const Operator& a, const Operator& b);

// Validated density matrix: unit trace, Hermitian, positive semidefinite.
class DensityMatrix {
 public:
  struct Tolerance {
    double trace = 1e-10;
    double hermitian = 1e-10;
    double eigenvalue = 1e-9;
  };

  explicit DensityMatrix(Operator rho) : DensityMatrix(std::move(rho), Tolerance{}) {}
  DensityMatrix(Operator rho, const Tolerance& tol);

  // Skips validation; only for states produced by trusted propagation code.
  static DensityMatrix trusted(Operator rho);

  const Operator& matrix() const { return rho_; }
  int dim() const { return static_cast<int>(rho_.rows()); }
  double trace() const { return rho_.trace().real(); }
  double purity() const;
  Eigen::VectorXd eigenvalues() const;

 private:
  struct TrustedTag {};
  DensityMatrix(Operator rho, TrustedTag) : rho_(std::move(rho)) {}
  Operator rho_;
};

// |m_s = 0><0| on slot 0 (spin 1) tensored with maximally mixed states on
// the remaining slots.
DensityMatrix initial_state(std::span<const int> dims);

}  // namespace nvsim

#endif  // NVSIM_SPIN_HPP_
