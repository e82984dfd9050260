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

#include "nvsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "nvsim/config.hpp"
#include "nvsim/errors.hpp"
#include "nvsim/parallel.hpp"

namespace nvsim {
namespace {

constexpr double kPi = std::numbers::pi;

// Least-squares functor wrapper for Eigen's Levenberg-Marquardt.
template <typename Model>
struct Residuals {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  std::span<const double> t;
  std::span<const double> y;
  int n_params;
  Model model;

  int inputs() const { return n_params; }
  int values() const { return static_cast<int>(t.size()); }
  int operator()(const Eigen::VectorXd& q, Eigen::VectorXd& f) const {
    for (std::size_t i = 0; i < t.size(); ++i) f(i) = model(q, t[i]) - y[i];
    return 0;
  }
};

struct FitOutcome {
  Eigen::VectorXd params;
  double rms = 0.0;
  bool ok = false;
  Eigen::MatrixXd jacobian;
};

template <typename Model>
FitOutcome least_squares(std::span<const double> t, std::span<const double> y,
                         Eigen::VectorXd start, Model model) {
  Residuals<Model> f{t, y, static_cast<int>(start.size()), model};
  Eigen::NumericalDiff<Residuals<Model>> nd(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Residuals<Model>>> lm(nd);
  lm.parameters.maxfev = 4000;
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-12;
  const auto status = lm.minimize(start);
  FitOutcome out;
  out.params = start;
  Eigen::VectorXd fvec(t.size());
  f(start, fvec);
  out.rms = std::sqrt(fvec.squaredNorm() / static_cast<double>(t.size()));
  out.ok = status != Eigen::LevenbergMarquardtSpace::ImproperInputParameters &&
           status != Eigen::LevenbergMarquardtSpace::TooManyFunctionEvaluation &&
           start.allFinite();
  out.jacobian.resize(t.size(), start.size());
  nd.df(start, out.jacobian);
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

void SweepTrace::validate() const {
  if (x.size() != p.size()) throw GridError("x and p lengths differ");
  if (x.size() < 8) throw GridError("a trace needs at least 8 points");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) {
      throw GridError("x is not strictly increasing at index " + std::to_string(i));
    }
  }
}

std::string to_string(Protocol p) {
  switch (p) {
    case Protocol::kRabi: return "rabi";
    case Protocol::kHahn: return "hahn";
    case Protocol::kXy8: return "xy8";
    case Protocol::kRxy8: return "rxy8";
    case Protocol::kRxy8Correlated: return "rxy8_correlated";
  }
  return "xy8";
}

Protocol parse_protocol(std::string_view text) {
  for (Protocol p : {Protocol::kRabi, Protocol::kHahn, Protocol::kXy8, Protocol::kRxy8,
                     Protocol::kRxy8Correlated}) {
    if (to_string(p) == text) return p;
  }
  throw ConfigError("unknown protocol '" + std::string(text) + "'");
}

SequenceTimeline compile(const ProtocolParams& params, double x, const DriveSpec& drive) {
  switch (params.protocol) {
    case Protocol::kRabi: return rabi_timeline(x, drive);
    case Protocol::kHahn: return hahn_timeline(x, drive, params.t_pi_us);
    case Protocol::kXy8: return xy8_timeline(params.order, x, drive, params.t_pi_us);
    case Protocol::kRxy8:
      return rxy8_timeline(params.order, x, drive, params.t_pi_us, params.seed);
    case Protocol::kRxy8Correlated:
      return rxy8_correlated_timeline(params.order, x, drive, params.t_pi_us, params.group,
                                      params.seed);
  }
  throw ConfigError("unknown protocol");
}

SweepTrace run_sweep(const Engine& engine, const ProtocolParams& params,
                     std::span<const double> x, int workers) {
  SweepTrace out;
  out.x.assign(x.begin(), x.end());
  out.p.assign(x.size(), 0.0);
  parallel_for(x.size(), workers, [&](std::size_t i) {
    try {
      out.p[i] = engine.probability(compile(params, x[i], engine.drive()));
    } catch (const Error& e) {
      throw SweepPointError(i, e.what());
    }
  });
  out.kind = TraceKind::kSimulated;
  out.metadata["protocol"] = to_string(params.protocol);
  out.metadata["order"] = std::to_string(params.order);
  if (params.protocol == Protocol::kRxy8Correlated) {
    out.metadata["group"] = std::to_string(params.group);
  }
  if (params.protocol == Protocol::kRxy8 || params.protocol == Protocol::kRxy8Correlated) {
    out.metadata["seed"] = std::to_string(params.seed);
  }
  out.metadata["t_pi_us"] = format_double(params.t_pi_us);
  return out;
}

std::vector<double> linear_grid(double start, double stop, int n) {
  if (!(std::isfinite(start) && std::isfinite(stop)) || !(start < stop)) {
    throw GridError("grid start must be below stop");
  }
  if (n < 2) throw GridError("grid needs at least 2 points");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) out[i] = start + (stop - start) * i / (n - 1);
  out.back() = stop;
  return out;
}

std::vector<double> parse_grid(std::string_view spec) {
  const auto a = spec.find(':');
  const auto b = a == std::string_view::npos ? a : spec.find(':', a + 1);
  if (b == std::string_view::npos) throw GridError("grid must be start:stop:n");
  double start = 0.0, stop = 0.0;
  long long n = 0;
  try {
    start = parse_double(spec.substr(0, a));
    stop = parse_double(spec.substr(a + 1, b - a - 1));
    n = std::stoll(std::string(spec.substr(b + 1)));
  } catch (const std::exception&) {
    throw GridError("grid must be start:stop:n");
  }
  if (n > 10'000'000) throw GridError("grid is too large");
  return linear_grid(start, stop, static_cast<int>(n));
}

Spectrum fft_spectrum(const SweepTrace& trace, const FftOptions& options) {
  trace.validate();
  const std::size_t n = trace.x.size();
  const double dx = (trace.x.back() - trace.x.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(trace.x[i] - trace.x[i - 1] - dx) > 1e-6 * dx) {
      throw GridError("FFT needs a uniform grid");
    }
  }
  const double mean = std::accumulate(trace.p.begin(), trace.p.end(), 0.0) / n;
  std::vector<double> in(n);
  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w =
        options.hann_window ? 0.5 * (1.0 - std::cos(2.0 * kPi * i / (n - 1))) : 1.0;
    wsum += w;
    in[i] = w * (trace.p[i] - mean);
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  Spectrum s;
  s.window = options.hann_window ? "hann" : "rectangular";
  s.bin_width = 1.0 / (n * dx);
  const std::size_t half = n / 2 + 1;
  s.frequency.resize(half);
  s.magnitude.resize(half);
  for (std::size_t k = 0; k < half; ++k) {
    s.frequency[k] = k * s.bin_width;
    s.magnitude[k] = 2.0 * std::abs(out[k]) / wsum;
  }
  const double top = *std::max_element(s.magnitude.begin() + 1, s.magnitude.end());
  const double floor = std::max(options.noise_multiple * median(s.magnitude),
                                options.relative_floor * top);
  for (std::size_t k = 1; k + 1 < half; ++k) {
    const double a = s.magnitude[k - 1], b = s.magnitude[k], c = s.magnitude[k + 1];
    if (!(b > a && b >= c && b > floor)) continue;
    const double denom = a - 2.0 * b + c;
    const double delta = denom < 0.0 ? 0.5 * (a - c) / denom : 0.0;
    s.peaks.push_back({(k + delta) * s.bin_width, b - 0.25 * (a - c) * delta});
  }
  std::sort(s.peaks.begin(), s.peaks.end(),
            [](const SpectralPeak& l, const SpectralPeak& r) { return l.magnitude > r.magnitude; });
  return s;
}

EnvelopeFit fit_envelope(const SweepTrace& trace) {
  trace.validate();
  const auto& t = trace.x;
  const auto& y = trace.p;
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  if (*hi - *lo < 1e-12 * (1.0 + std::abs(*hi))) {
    throw FitError("trace is constant: coherence time out of range");
  }
  std::vector<double> et, ey;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const bool left = i == 0 || y[i] >= y[i - 1];
    const bool right = i + 1 == t.size() || y[i] >= y[i + 1];
    if (left && right) {
      et.push_back(t[i]);
      ey.push_back(y[i]);
    }
  }
  if (et.size() < 6) {
    et = t;
    ey = y;
  }
  const double c0 = *std::min_element(ey.begin(), ey.end());
  const double a0 = *std::max_element(ey.begin(), ey.end()) - c0;
  double tau0 = t.back();
  for (std::size_t i = 0; i < et.size(); ++i) {
    if (ey[i] - c0 < a0 / std::numbers::e) {
      tau0 = et[i];
      break;
    }
  }
  auto model = [](const Eigen::VectorXd& q, double x) {
    const double r = x / q(1);
    return q(0) * std::exp(-r * r * r * r) + q(2);
  };
  Eigen::VectorXd start(3);
  start << a0, std::max(tau0, 1e-9), c0;
  const FitOutcome fit = least_squares(et, ey, start, model);
  const double span = t.back() - t.front();
  const double tau = std::abs(fit.params(1));
  if (!fit.ok || !std::isfinite(tau) || tau <= 0.0 || tau > 10.0 * (t.back() + span)) {
    throw FitError("coherence time out of range or fit did not converge");
  }
  EnvelopeFit out;
  out.amplitude = fit.params(0);
  out.tau_c = tau;
  out.offset = fit.params(2);
  const Eigen::MatrixXd jtj = fit.jacobian.transpose() * fit.jacobian;
  const double dof = std::max<double>(1.0, static_cast<double>(et.size()) - 3.0);
  const double s2 = fit.rms * fit.rms * static_cast<double>(et.size()) / dof;
  const Eigen::MatrixXd cov = jtj.completeOrthogonalDecomposition().pseudoInverse() * s2;
  out.tau_c_sigma = std::sqrt(std::max(0.0, cov(1, 1)));
  return out;
}

EseemFit extract_eseem(const SweepTrace& trace) {
  trace.validate();
  FftOptions opt;
  opt.relative_floor = 0.02;
  const Spectrum spec = fft_spectrum(trace, opt);
  if (spec.peaks.size() < 2) throw FitError("fewer than two significant spectral peaks");
  const std::size_t top = std::min<std::size_t>(spec.peaks.size(), 5);
  const auto [lo, hi] = std::minmax_element(trace.p.begin(), trace.p.end());
  auto model = [](const Eigen::VectorXd& q, double x) {
    const double sa = std::sin(kPi * q(1) * x);
    const double sb = std::sin(kPi * q(2) * x);
    return 1.0 - q(0) * sa * sa * sb * sb + q(3);
  };
  FitOutcome best;
  best.rms = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < top; ++i) {
    for (std::size_t j = i + 1; j < top; ++j) {
      Eigen::VectorXd start(4);
      start << std::max(*hi - *lo, 1e-3), spec.peaks[i].frequency, spec.peaks[j].frequency,
          *hi - 1.0;
      const FitOutcome fit = least_squares(trace.x, trace.p, start, model);
      if (fit.params.allFinite() && fit.rms < best.rms) best = fit;
    }
  }
  if (!std::isfinite(best.rms)) throw FitError("ESEEM fit did not converge");
  EseemFit out;
  const double a = std::abs(best.params(1)), b = std::abs(best.params(2));
  out.w_slow = std::min(a, b);
  out.w_fast = std::max(a, b);
  out.depth = best.params(0);
  out.baseline = best.params(3);
  out.residual = best.rms;
  if (!(out.w_fast > out.w_slow && out.w_slow > 0.0)) {
    throw FitError("ESEEM fit returned degenerate frequencies");
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw CorrelationError("series lengths differ");
  if (a.size() < 3) throw CorrelationError("need at least 3 samples");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw CorrelationError("correlation undefined for a constant series");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<double> resample(std::span<const double> x, std::span<const double> y,
                             std::span<const double> xq) {
  if (x.size() != y.size() || x.size() < 2) throw GridError("resample needs matching x and y");
  const double tol = 1e-9 * (1.0 + std::abs(x.back() - x.front()));
  std::vector<double> out(xq.size());
  for (std::size_t i = 0; i < xq.size(); ++i) {
    const double q = xq[i];
    if (q < x.front() - tol || q > x.back() + tol) {
      throw GridError("experimental grid extends beyond the simulated range");
    }
    auto it = std::upper_bound(x.begin(), x.end(), q);
    std::size_t k = static_cast<std::size_t>(it - x.begin());
    k = std::clamp<std::size_t>(k, 1, x.size() - 1);
    const double w = std::clamp((q - x[k - 1]) / (x[k] - x[k - 1]), 0.0, 1.0);
    out[i] = (1.0 - w) * y[k - 1] + w * y[k];
  }
  return out;
}

CorrelationReport fit_linear_map(const SweepTrace& experimental, const SweepTrace& simulated) {
  if (experimental.x.size() != experimental.p.size() ||
      simulated.x.size() != simulated.p.size()) {
    throw GridError("trace x and p lengths differ");
  }
  std::vector<double> sim = experimental.x == simulated.x
                                ? simulated.p
                                : resample(simulated.x, simulated.p, experimental.x);
  const auto& counts = experimental.p;
  const double n = static_cast<double>(sim.size());
  const double mp = std::accumulate(sim.begin(), sim.end(), 0.0) / n;
  const double mc = std::accumulate(counts.begin(), counts.end(), 0.0) / n;
  double spp = 0.0, spc = 0.0;
  for (std::size_t i = 0; i < sim.size(); ++i) {
    spp += (sim[i] - mp) * (sim[i] - mp);
    spc += (sim[i] - mp) * (counts[i] - mc);
  }
  if (!(spp > 0.0)) throw CorrelationError("simulation is constant");
  CorrelationReport r;
  r.slope = spc / spp;
  r.intercept = mc - r.slope * mp;
  r.r = pearson(sim, counts);
  return r;
}

}  // namespace nvsim
