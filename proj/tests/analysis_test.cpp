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

#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "nvsim/analysis.hpp"
#include "nvsim/engine.hpp"
#include "nvsim/errors.hpp"

namespace nvsim {
namespace {

constexpr double kPi = std::numbers::pi;

SweepTrace synthetic(double start, double stop, int n, const std::function<double(double)>& f) {
  SweepTrace t;
  t.x = linear_grid(start, stop, n);
  for (double x : t.x) t.p.push_back(f(x));
  return t;
}

TEST_CASE("grids") {
  const auto g = linear_grid(0.1, 2.0, 20);
  CHECK(g.size() == 20);
  CHECK(g.front() == 0.1);
  CHECK(g.back() == 2.0);
  CHECK(g[1] - g[0] == doctest::Approx(0.1));
  CHECK(parse_grid("0.1:2.0:20") == g);
  CHECK_THROWS_AS(linear_grid(2.0, 1.0, 5), GridError);
  CHECK_THROWS_AS(linear_grid(0.0, 1.0, 1), GridError);
  CHECK_THROWS_AS(parse_grid("1:2"), GridError);
  CHECK_THROWS_AS(parse_grid("0:1:100000000"), GridError);
}

TEST_CASE("trace validation") {
  SweepTrace t = synthetic(0.0, 1.0, 8, [](double) { return 0.5; });
  CHECK_NOTHROW(t.validate());
  t.p.pop_back();
  CHECK_THROWS_AS(t.validate(), GridError);
  SweepTrace u = synthetic(0.0, 1.0, 8, [](double) { return 0.5; });
  std::swap(u.x[2], u.x[3]);
  CHECK_THROWS_AS(u.validate(), GridError);
  SweepTrace tiny = synthetic(0.0, 1.0, 4, [](double) { return 0.5; });
  CHECK_THROWS_AS(tiny.validate(), GridError);
}

TEST_CASE("FFT peaks land within a bin of the tones") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> f(0.2, 4.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double f1 = f(rng);
    const double f2 = f1 + 0.7 + f(rng);
    const SweepTrace t = synthetic(0.1, 40.0, 1024, [&](double x) {
      return 0.5 + 0.2 * std::cos(2 * kPi * f1 * x) + 0.1 * std::cos(2 * kPi * f2 * x);
    });
    const Spectrum s = fft_spectrum(t);
    REQUIRE(s.peaks.size() >= 2);
    CHECK(std::abs(s.peaks[0].frequency - f1) < s.bin_width);
    CHECK(std::abs(s.peaks[1].frequency - f2) < s.bin_width);
    CHECK(s.peaks[0].magnitude == doctest::Approx(0.2).epsilon(0.1));
  }
}

TEST_CASE("FFT needs a uniform grid") {
  SweepTrace t = synthetic(0.0, 1.0, 16, [](double x) { return x; });
  t.x[5] += 0.01;
  CHECK_THROWS_AS(fft_spectrum(t), GridError);
}

TEST_CASE("envelope fit recovers the coherence time") {
  for (double tau_c : {1.5, 4.018, 9.0}) {
    CAPTURE(tau_c);
    const SweepTrace plain = synthetic(0.05, 2.5 * tau_c, 300, [&](double x) {
      return 0.4 + 0.5 * std::exp(-std::pow(x / tau_c, 4));
    });
    CHECK(fit_envelope(plain).tau_c == doctest::Approx(tau_c).epsilon(0.01));
    const SweepTrace t = synthetic(0.05, 2.5 * tau_c, 300, [&](double x) {
      return 0.4 + 0.5 * std::exp(-std::pow(x / tau_c, 4)) *
             (1 - 0.2 * std::pow(std::sin(6.0 * std::numbers::pi * x / tau_c), 2));
    });
    const EnvelopeFit e = fit_envelope(t);
    CHECK(e.tau_c == doctest::Approx(tau_c).epsilon(0.02));
    CHECK(e.tau_c_sigma >= 0.0);
  }
  const SweepTrace cos2 = synthetic(0.0, 5.0, 500, [](double x) {
    return std::exp(-std::pow(x / 2.0, 4)) * std::pow(std::cos(2.0 * std::numbers::pi * x), 2);
  });
  CHECK(fit_envelope(cos2).tau_c == doctest::Approx(2.0).epsilon(0.02));
  CHECK_THROWS_AS(fit_envelope(synthetic(0.0, 1.0, 20, [](double) { return 0.3; })), FitError);
}

TEST_CASE("ESEEM fit recovers both frequencies") {
  const double a = 0.42, b = 3.13;
  const SweepTrace t = synthetic(0.1, 30.0, 1024, [&](double x) {
    const double sa = std::sin(kPi * a * x), sb = std::sin(kPi * b * x);
    return 1.0 - 0.3 * sa * sa * sb * sb - 0.02;
  });
  const EseemFit e = extract_eseem(t);
  CHECK(e.w_slow == doctest::Approx(a).epsilon(1e-4));
  CHECK(e.w_fast == doctest::Approx(b).epsilon(1e-4));
  CHECK(e.depth == doctest::Approx(0.3).epsilon(1e-3));
  CHECK(e.residual < 1e-6);
}

TEST_CASE("Pearson correlation and linear maps") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  const std::vector<double> b{2, 4, 6, 8, 10};
  const std::vector<double> c{5, 4, 3, 2, 1};
  CHECK(pearson(a, b) == doctest::Approx(1.0));
  CHECK(pearson(a, c) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson(a, std::vector<double>{1, 1, 1, 1, 1}), CorrelationError);
  CHECK_THROWS_AS(pearson(a, std::vector<double>{1, 2}), CorrelationError);

  const SweepTrace sim = synthetic(0.1, 1.0, 64, [](double x) { return 0.5 + 0.3 * std::cos(9 * x); });
  SweepTrace exp = sim;
  exp.kind = TraceKind::kExperimental;
  for (double& v : exp.p) v = 1200.0 * v + 300.0;
  const CorrelationReport r = fit_linear_map(exp, sim);
  CHECK(r.r == doctest::Approx(1.0));
  CHECK(r.slope == doctest::Approx(1200.0));
  CHECK(r.intercept == doctest::Approx(300.0));
}

TEST_CASE("linear map resamples onto the experimental grid") {
  const auto f = [](double x) { return 0.5 + 0.3 * std::cos(3 * x); };
  const SweepTrace sim = synthetic(0.0, 2.0, 400, f);
  SweepTrace exp = synthetic(0.2, 1.8, 37, f);
  exp.kind = TraceKind::kExperimental;
  for (double& v : exp.p) v = -2.0 * v + 7.0;
  const CorrelationReport r = fit_linear_map(exp, sim);
  CHECK(r.r == doctest::Approx(-1.0).epsilon(1e-4));
  CHECK(r.slope == doctest::Approx(-2.0).epsilon(1e-3));
  const std::vector<double> x{0.0, 1.0, 2.0}, y{0.0, 10.0, 0.0}, q{0.5, 1.5};
  CHECK(resample(x, y, q) == std::vector<double>{5.0, 5.0});
  SweepTrace outside = synthetic(-1.0, 1.0, 20, f);
  CHECK_THROWS(fit_linear_map(outside, sim));
}

TEST_CASE("sweeps are deterministic across worker counts") {
  const SpinSystem s = SpinSystem::make(NitrogenIsotope::kN15, 0.039, 2.6);
  const DriveSpec d = resonant_drive(s, Transition::kPlusOne, 40.0);
  ProtocolParams p;
  p.order = 1;
  p.t_pi_us = calibrate_pi(s, d) * 1e-3;
  const Engine engine(s, d);
  const auto tau = linear_grid(0.2, 0.5, 16);
  const SweepTrace one = run_sweep(engine, p, tau, 1);
  const SweepTrace three = run_sweep(engine, p, tau, 3);
  CHECK(one.p == three.p);
  for (double v : one.p) {
    CHECK(v >= -1e-9);
    CHECK(v <= 0.5 + 1e-9);
  }
}

TEST_CASE("sweep failures name the offending point") {
  const SpinSystem s = SpinSystem::make(NitrogenIsotope::kNone, 0.039, 0.0);
  const DriveSpec d = resonant_drive(s, Transition::kPlusOne, 40.0);
  ProtocolParams p;
  p.t_pi_us = 0.0177;
  const Engine engine(s, d);
  const std::vector<double> tau{0.3, 0.2, 0.001, 0.4};
  try {
    run_sweep(engine, p, tau, 1);
    FAIL("expected a sweep failure");
  } catch (const SweepPointError& e) {
    CHECK(e.index() == 2);
  }
}

}  // namespace
}  // namespace nvsim
