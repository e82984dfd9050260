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

#include "nvsim/spin.hpp"

#include <cmath>
#include <string>

#include "nvsim/errors.hpp"

namespace nvsim {

SpinOperatorSet spin_operators(double s) {
  const double two_s = 2.0 * s;
  if (!std::isfinite(s) || s < 0.0 || std::abs(two_s - std::round(two_s)) > 1e-12 ||
      s > 3.0) {
    throw InvalidSpinError("spin quantum number must be a half-integer in [0, 3], got " +
                           std::to_string(s));
  }
  const int dim = static_cast<int>(std::lround(two_s)) + 1;
  SpinOperatorSet out;
  out.s = s;
  out.sz = Operator::Zero(dim, dim);
  Operator splus = Operator::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = s - i;
    out.sz(i, i) = m;
    if (i > 0) {
      // <m+1| S+ |m>
      splus(i - 1, i) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
    }
  }
  const Operator sminus = splus.adjoint();
  out.sx = 0.5 * (splus + sminus);
  out.sy = Complex(0.0, -0.5) * (splus - sminus);
  return out;
}

int total_dim(std::span<const int> dims) {
  int n = 1;
  for (int d : dims) n *= d;
  return n;
}

Operator embed(const Operator& op, std::size_t slot, std::span<const int> dims) {
  if (slot >= dims.size()) {
    throw DimensionError("slot " + std::to_string(slot) + " out of range for " +
                         std::to_string(dims.size()) + " subsystems");
  }
  if (op.rows() != dims[slot] || op.cols() != dims[slot]) {
    throw DimensionError("operator dimension " + std::to_string(op.rows()) +
                         " does not match subsystem dimension " +
                         std::to_string(dims[slot]));
  }
  int left = 1;
  for (std::size_t i = 0; i < slot; ++i) left *= dims[i];
  int right = 1;
  for (std::size_t i = slot + 1; i < dims.size(); ++i) right *= dims[i];
  const int d = dims[slot];
  const int n = left * d * right;
  Operator out = Operator::Zero(n, n);
  for (int l = 0; l < left; ++l) {
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b < d; ++b) {
        const Complex v = op(a, b);
        if (v == Complex(0.0, 0.0)) continue;
        for (int r = 0; r < right; ++r) {
          out((l * d + a) * right + r, (l * d + b) * right + r) = v;
        }
      }
    }
  }
  return out;
}

bool is_hermitian(const Operator& op, double tol) {
  if (op.rows() != op.cols()) return false;
  return max_abs_diff(op, op.adjoint()) <= tol;
}

double max_abs_diff(const Operator& a, const Operator& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("matrix shapes differ");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

DensityMatrix::DensityMatrix(Operator rho, const Tolerance& tol) : rho_(std::move(rho)) {
  if (rho_.rows() == 0 || rho_.rows() != rho_.cols()) {
    throw DimensionError("density matrix must be square and non-empty");
  }
  if (std::abs(rho_.trace() - Complex(1.0, 0.0)) > tol.trace) {
    throw Error("density matrix trace is not 1");
  }
  if (!is_hermitian(rho_, tol.hermitian)) {
    throw Error("density matrix is not Hermitian");
  }
  if (eigenvalues().minCoeff() < -tol.eigenvalue) {
    throw Error("density matrix has a negative eigenvalue");
  }
}

DensityMatrix DensityMatrix::trusted(Operator rho) {
  return DensityMatrix(std::move(rho), TrustedTag{});
}

double DensityMatrix::purity() const { return (rho_ * rho_).trace().real(); }

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  const Operator h = 0.5 * (rho_ + rho_.adjoint());
  return Eigen::SelfAdjointEigenSolver<Operator>(h, Eigen::EigenvaluesOnly).eigenvalues();
}

DensityMatrix initial_state(std::span<const int> dims) {
  if (dims.empty() || dims[0] != 3) {
    throw DimensionError("slot 0 must hold the spin-1 electron");
  }
  const int n = total_dim(dims);
  const int rest = n / 3;
  Operator rho = Operator::Zero(n, n);
  // m_s = 0 is the middle basis vector of the electron.
  for (int i = 0; i < rest; ++i) rho(rest + i, rest + i) = 1.0 / rest;
  return DensityMatrix(std::move(rho));
}

}  // namespace nvsim
