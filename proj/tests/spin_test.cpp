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

#include <random>

#include <doctest.h>

#include "nvsim/errors.hpp"
#include "nvsim/spin.hpp"
#include "support.hpp"

namespace nvsim {
namespace {

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

TEST_CASE("spin operators obey the angular momentum algebra") {
  for (double s : {0.5, 1.0, 1.5, 2.5}) {
    CAPTURE(s);
    const SpinOperatorSet ops = spin_operators(s);
    const int d = static_cast<int>(2 * s + 1);
    CHECK(ops.dim() == d);
    const Complex i(0.0, 1.0);
    CHECK(max_abs_diff(commutator(ops.sx, ops.sy), i * ops.sz) < 1e-12);
    CHECK(max_abs_diff(commutator(ops.sy, ops.sz), i * ops.sx) < 1e-12);
    CHECK(max_abs_diff(commutator(ops.sz, ops.sx), i * ops.sy) < 1e-12);
    const Operator casimir = ops.sx * ops.sx + ops.sy * ops.sy + ops.sz * ops.sz;
    CHECK(max_abs_diff(casimir, s * (s + 1) * Operator::Identity(d, d)) < 1e-12);
    CHECK(is_hermitian(ops.sx));
    CHECK(is_hermitian(ops.sy));
    CHECK(ops.sz(0, 0).real() == doctest::Approx(s));
  }
}

TEST_CASE("invalid spin quantum numbers are rejected") {
  CHECK_THROWS_AS(spin_operators(0.3), InvalidSpinError);
  CHECK_THROWS_AS(spin_operators(-1.0), InvalidSpinError);
  CHECK_THROWS_AS(spin_operators(3.5), InvalidSpinError);
}

TEST_CASE("embedding places an operator on its slot") {
  const std::vector<int> dims{3, 2, 3};
  CHECK(total_dim(dims) == 18);
  const SpinOperatorSet e = spin_operators(1.0);
  const SpinOperatorSet h = spin_operators(0.5);
  const Operator sz = embed(e.sz, 0, dims);
  const Operator iz = embed(h.sz, 1, dims);
  CHECK(sz.rows() == 18);
  CHECK(max_abs_diff(commutator(sz, iz), Operator::Zero(18, 18)) < 1e-15);
  CHECK(sz.trace().real() == doctest::Approx(0.0));
  CHECK((sz * sz).trace().real() == doctest::Approx(2.0 * 6));
  CHECK_THROWS_AS(embed(e.sz, 3, dims), DimensionError);
  CHECK_THROWS_AS(embed(h.sz, 0, dims), DimensionError);
}

TEST_CASE("density matrix validation") {
  Operator rho = Operator::Zero(3, 3);
  rho(0, 0) = 1.0;
  CHECK_NOTHROW(DensityMatrix{rho});
  Operator bad_trace = rho * 0.5;
  CHECK_THROWS_AS(DensityMatrix{bad_trace}, Error);
  Operator non_hermitian = rho;
  non_hermitian(0, 1) = Complex(0.0, 0.1);
  CHECK_THROWS_AS(DensityMatrix{non_hermitian}, Error);
  Operator negative = Operator::Zero(2, 2);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix{negative}, Error);
  CHECK_THROWS_AS(DensityMatrix{Operator(2, 3)}, DimensionError);
}

TEST_CASE("initial state is the bright electron state with a mixed nuclear bath") {
  for (const std::vector<int>& dims :
       {std::vector<int>{3}, std::vector<int>{3, 2}, std::vector<int>{3, 3}, std::vector<int>{3, 3, 2}}) {
    const DensityMatrix rho = initial_state(dims);
    const int nuclear = total_dim(dims) / 3;
    CHECK(rho.trace() == doctest::Approx(1.0));
    CHECK(rho.purity() == doctest::Approx(1.0 / nuclear));
    const Eigen::VectorXd ev = rho.eigenvalues();
    CHECK(ev.minCoeff() > -1e-12);
    CHECK(ev.maxCoeff() == doctest::Approx(1.0 / nuclear));
  }
  CHECK_THROWS_AS(initial_state(std::vector<int>{2, 3}), DimensionError);
}

TEST_CASE("unitary conjugation preserves purity and spectrum") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::vector<int> dims{3, 2};
  const DensityMatrix rho0 = initial_state(dims);
  for (int trial = 0; trial < 10; ++trial) {
    Operator a(6, 6);
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) a(i, j) = Complex(n(rng), n(rng));
    }
    const Eigen::HouseholderQR<Operator> qr(a);
    const Operator q = qr.householderQ();
    const DensityMatrix rho(q * rho0.matrix() * q.adjoint());
    CHECK(rho.purity() == doctest::Approx(rho0.purity()).epsilon(1e-12));
    Eigen::VectorXd e0 = rho0.eigenvalues(), e1 = rho.eigenvalues();
    std::sort(e0.data(), e0.data() + 6);
    std::sort(e1.data(), e1.data() + 6);
    CHECK((e0 - e1).cwiseAbs().maxCoeff() < 1e-12);
  }
}

}  // namespace
}  // namespace nvsim
