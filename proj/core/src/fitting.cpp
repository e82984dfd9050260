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

#include "nvsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "nvsim/config.hpp"
#include "nvsim/errors.hpp"
#include "nvsim/io.hpp"
#include "nvsim/parallel.hpp"
#include "text.hpp"

namespace nvsim {
namespace {

using Lattice = std::array<long, 6>;

double frobenius2(const HyperfineComponents& c) {
  return c[0] * c[0] + c[3] * c[3] + c[5] * c[5] +
         2.0 * (c[1] * c[1] + c[2] * c[2] + c[4] * c[4]);
}

// Keeps the k best distinct candidates.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) {}

  void offer(const Candidate& c) {
    if (items_.size() == k_ && !candidate_less(c, items_.back())) return;
    for (const auto& it : items_) {
      if (it.components == c.components) return;
    }
    items_.insert(std::upper_bound(items_.begin(), items_.end(), c, candidate_less), c);
    if (items_.size() > k_) items_.pop_back();
  }
  void merge(const TopK& other) {
    for (const auto& c : other.items_) offer(c);
  }
  const std::vector<Candidate>& items() const { return items_; }

 private:
  std::size_t k_;
  std::vector<Candidate> items_;
};

struct FrequencyResiduals {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  const HyperfineObjective* f;
  double bound;

  int inputs() const { return 6; }
  int values() const { return static_cast<int>(f->residual_count()); }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& out) const {
    HyperfineComponents c{};
    for (int k = 0; k < 6; ++k) c[k] = std::clamp(x(k), -bound, bound);
    out = f->residuals(c);
    return 0;
  }
};

// Continuous least-squares polish of a lattice point; returns the start when
// the spectrum cannot be grouped along the way.
HyperfineComponents refine_continuous(const HyperfineObjective& f, const HyperfineComponents& start,
                                      double bound) {
  Eigen::VectorXd x(6);
  for (int k = 0; k < 6; ++k) x(k) = start[k];
  if (f.residual_count() < 1) return start;
  try {
    FrequencyResiduals fr{&f, bound};
    Eigen::NumericalDiff<FrequencyResiduals, Eigen::Central> nd(fr, 1e-6);
    Eigen::LevenbergMarquardt<Eigen::NumericalDiff<FrequencyResiduals, Eigen::Central>> lm(nd);
    lm.parameters.maxfev = 600;
    lm.parameters.xtol = 1e-12;
    lm.parameters.ftol = 1e-16;
    lm.minimize(x);
  } catch (const DegeneracyError&) {
    return start;
  }
  if (!x.allFinite()) return start;
  HyperfineComponents out{};
  for (int k = 0; k < 6; ++k) out[k] = std::clamp(x(k), -bound, bound);
  return out;
}

}  // namespace

void EseemMeasurementSet::validate() const {
  if (entries.empty()) throw ConfigError("measurement set is empty");
  for (const auto& e : entries) {
    if (!(e.b0_tesla >= 0.0) || !std::isfinite(e.b0_tesla)) throw ConfigError("b0 must be >= 0");
    if (!(e.theta_deg >= 0.0 && e.theta_deg <= 180.0)) {
      throw ConfigError("theta must lie in [0, 180] degrees");
    }
    if (!(e.w_slow >= 0.0) || !(e.w_fast >= 0.0)) {
      throw ConfigError("measured frequencies must be >= 0");
    }
    if (!(e.weight > 0.0)) throw ConfigError("weights must be > 0");
  }
}

bool EseemMeasurementSet::identifiable() const {
  std::set<double> fields;
  for (const auto& e : entries) fields.insert(e.b0_tesla);
  return entries.size() >= 3 && fields.size() >= 2;
}

EseemMeasurementSet parse_measurements_csv(std::string_view text) {
  EseemMeasurementSet set;
  bool header = false;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      cols.emplace_back(detail::trim(line.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!header) {
      header = true;
      const std::vector<std::string> expected{"b0_T", "theta_deg", "transition",
                                              "w_slow_MHz", "w_fast_MHz", "weight"};
      if (cols != expected) {
        throw ConfigError(
            "header must be b0_T,theta_deg,transition,w_slow_MHz,w_fast_MHz,weight", line_no);
      }
      continue;
    }
    if (cols.size() != 6) throw ConfigError("expected 6 columns", line_no);
    try {
      EseemMeasurement m;
      m.b0_tesla = parse_double(cols[0]);
      m.theta_deg = parse_double(cols[1]);
      m.transition = parse_transition(cols[2]);
      m.w_slow = parse_double(cols[3]);
      m.w_fast = parse_double(cols[4]);
      m.weight = parse_double(cols[5]);
      if (m.b0_tesla == 0.0) {
        set.zero_field_larmor = m.w_fast;
      } else {
        set.entries.push_back(m);
      }
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), line_no);
    }
  }
  if (!header) throw ConfigError("missing header row");
  set.validate();
  return set;
}

EseemMeasurementSet read_measurements_csv(const std::filesystem::path& path) {
  try {
    return parse_measurements_csv(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what(), e.line());
  }
}

std::string measurements_to_csv(const EseemMeasurementSet& set) {
  std::string out = "b0_T,theta_deg,transition,w_slow_MHz,w_fast_MHz,weight\n";
  auto row = [&out](const EseemMeasurement& m) {
    out += format_double(m.b0_tesla) + "," + format_double(m.theta_deg) + "," +
           to_string(m.transition) + "," + format_double(m.w_slow) + "," +
           format_double(m.w_fast) + "," + format_double(m.weight) + "\n";
  };
  if (set.zero_field_larmor) {
    row({0.0, 0.0, Transition::kMinusOne, 0.0, *set.zero_field_larmor, 1.0});
  }
  for (const auto& m : set.entries) row(m);
  return out;
}

EseemMeasurementSet synthesize_measurements(const Eigen::Matrix3d& a,
                                            const std::vector<EseemMeasurement>& conditions,
                                            NitrogenIsotope nitrogen) {
  EseemMeasurementSet set;
  for (EseemMeasurement m : conditions) {
    SpinSystem sys = SpinSystem::make(nitrogen, m.b0_tesla, m.theta_deg);
    sys.target = TargetSpin{constants::kGammaC13, a};
    const std::vector<int> dims = sys.dims();
    const StaticSpectrum spec(build_static(sys), dims);
    m.w_slow = spec.nuclear_gap(0, sys.target_slot());
    m.w_fast = spec.nuclear_gap(transition_ms(m.transition), sys.target_slot());
    set.entries.push_back(m);
  }
  return set;
}

Eigen::Matrix3d to_matrix(const HyperfineComponents& c) {
  return hyperfine_from_components(std::vector<double>(c.begin(), c.end()));
}

HyperfineComponents to_components(const Eigen::Matrix3d& a) {
  const auto v = hyperfine_components(a);
  HyperfineComponents c{};
  std::copy(v.begin(), v.end(), c.begin());
  return c;
}

HyperfineComponents mirror_image(const HyperfineComponents& c) {
  HyperfineComponents m = c;
  m[1] = -m[1];
  m[4] = -m[4];
  for (double& v : m) v += 0.0;  // normalise -0.0
  return m;
}

HyperfineObjective::HyperfineObjective(const EseemMeasurementSet& set, NitrogenIsotope nitrogen) {
  set.validate();
  SpinSystem probe = SpinSystem::make(nitrogen, 0.0, 0.0);
  probe.target = TargetSpin{};
  dims_ = probe.dims();
  slot_ = probe.target_slot();
  const SpinOperatorSet s1 = spin_operators(1.0);
  const SpinOperatorSet s12 = spin_operators(0.5);
  const std::array<Operator, 3> s{embed(s1.sx, 0, dims_), embed(s1.sy, 0, dims_),
                                  embed(s1.sz, 0, dims_)};
  const std::array<Operator, 3> i{embed(s12.sx, slot_, dims_), embed(s12.sy, slot_, dims_),
                                  embed(s12.sz, slot_, dims_)};
  auto pair = [&](int a, int b) {
    Operator op = s[a] * i[b];
    if (a != b) op += s[b] * i[a];
    return op;
  };
  couplings_ = {pair(0, 0), pair(0, 1), pair(0, 2), pair(1, 1), pair(1, 2), pair(2, 2)};
  std::map<std::pair<double, double>, std::size_t> index;
  for (const auto& e : set.entries) {
    const auto key = std::make_pair(e.b0_tesla, e.theta_deg);
    auto it = index.find(key);
    if (it == index.end()) {
      SpinSystem sys = SpinSystem::make(nitrogen, e.b0_tesla, e.theta_deg);
      sys.target = TargetSpin{};
      it = index.emplace(key, fields_.size()).first;
      fields_.push_back({build_static(sys), {}});
    }
    fields_[it->second].entries.push_back(e);
    residual_count_ += 2;
  }
}

Eigen::VectorXd HyperfineObjective::residuals(const HyperfineComponents& c) const {
  Eigen::VectorXd r(static_cast<Eigen::Index>(residual_count_));
  Eigen::Index n = 0;
  for (const auto& f : fields_) {
    Operator h = f.base;
    for (int k = 0; k < 6; ++k) {
      if (c[k] != 0.0) h += c[k] * couplings_[k];
    }
    try {
      const StaticSpectrum spec(h, dims_);
      const double w0 = spec.nuclear_gap(0, slot_);
      for (const auto& e : f.entries) {
        const double w = spec.nuclear_gap(transition_ms(e.transition), slot_);
        const double sw = std::sqrt(e.weight);
        r(n++) = sw * (w0 - e.w_slow);
        r(n++) = sw * (w - e.w_fast);
      }
    } catch (const DegeneracyError& err) {
      std::ostringstream os;
      os << "eigen grouping failed at b0 = " << f.entries.front().b0_tesla << " T, A = (";
      for (int k = 0; k < 6; ++k) os << (k ? ", " : "") << c[k];
      os << "): " << err.what();
      throw DegeneracyError(os.str());
    }
  }
  return r;
}

double HyperfineObjective::operator()(const HyperfineComponents& c) const {
  return residuals(c).squaredNorm();
}

double objective(const Eigen::Matrix3d& a, const EseemMeasurementSet& set,
                 NitrogenIsotope nitrogen) {
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw ConfigError("hyperfine matrix must be symmetric");
  }
  return HyperfineObjective(set, nitrogen)(to_components(a));
}

bool ZeroFieldConstraint::admits(double azx, double azy, double azz) const {
  const double norm = std::sqrt(azx * azx + azy * azy + azz * azz);
  return std::abs(norm - radius) <= slack + 1e-12;
}

ZeroFieldConstraint zero_field_seed(double w_zero_field, double coarse_step) {
  return {std::abs(w_zero_field), 2.0 * coarse_step};
}

void HyperfineSearchSpec::validate() const {
  if (!(coarse_step > 0.0 && fine_step > 0.0 && fine_step < coarse_step)) {
    throw ConfigError("need 0 < fine_step < coarse_step");
  }
  if (!(coarse_range > 0.0) || !(fine_halfwidth >= fine_step)) {
    throw ConfigError("ranges must be positive");
  }
  const double ratio = coarse_step / fine_step;
  const double span = coarse_range / coarse_step;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::abs(span - std::round(span)) > 1e-9) {
    throw ConfigError("coarse grid must align with the fine grid");
  }
  if (shard_count < 1 || shard_index < 0 || shard_index >= shard_count) {
    throw ConfigError("invalid shard selection");
  }
  if (top_k < 1) throw ConfigError("top_k must be >= 1");
}

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.objective != b.objective) return a.objective < b.objective;
  const double fa = frobenius2(a.components), fb = frobenius2(b.components);
  if (fa != fb) return fa < fb;
  return a.components < b.components;
}

SearchResult grid_search(const EseemMeasurementSet& set, const HyperfineSearchSpec& spec) {
  spec.validate();
  set.validate();
  const HyperfineObjective f(set, spec.nitrogen);
  const double u = spec.fine_step;
  const long n_range = std::lround(spec.coarse_range / u);
  const long n_coarse = std::lround(spec.coarse_step / u);
  const long n_half = std::lround(spec.fine_halfwidth / u);
  auto value = [u](long n) { return static_cast<double>(n) * u; };
  auto to_candidate = [&](const Lattice& l) {
    Candidate c;
    for (int k = 0; k < 6; ++k) c.components[k] = value(l[k]);
    c.objective = f(c.components);
    return c;
  };
  const std::size_t keep = std::max<std::size_t>(spec.top_k + 4, 16);

  SearchResult result;
  // Coarse stage: z-row first so pruning removes whole sub-grids.
  std::vector<long> coarse;
  for (long n = -n_range; n <= n_range; n += n_coarse) coarse.push_back(n);
  const long nc = static_cast<long>(coarse.size());
  std::optional<ZeroFieldConstraint> shell;
  if (spec.prune && set.zero_field_larmor) {
    shell = zero_field_seed(*set.zero_field_larmor, spec.coarse_step);
  }
  std::vector<std::array<long, 3>> zrows;
  for (long a : coarse) {
    for (long b : coarse) {
      for (long c : coarse) {
        if (shell && !shell->admits(value(a), value(b), value(c))) {
          result.pruned += static_cast<std::size_t>(nc * nc * nc);
          continue;
        }
        zrows.push_back({a, b, c});
      }
    }
  }
  std::vector<long> leading;
  for (long i = 0; i < nc; ++i) {
    if (i % spec.shard_count == spec.shard_index) leading.push_back(coarse[i]);
  }
  // Besides the overall top-k, keep the best point for every (axis, coarse
  // value) pair; these profile minima seed the fine stage so that weakly
  // constrained components are explored across their whole range.
  auto coarse_index = [&](long n) { return static_cast<std::size_t>((n + n_range) / n_coarse); };
  auto profile_table = [&] { return std::vector<TopK>(6 * coarse.size(), TopK(1)); };
  std::vector<TopK> partial(zrows.size(), TopK(keep));
  std::vector<std::vector<TopK>> profiles(zrows.size());
  parallel_for(zrows.size(), spec.workers, [&](std::size_t i) {
    const auto& z = zrows[i];
    profiles[i] = profile_table();
    for (long xx : leading) {
      for (long xy : coarse) {
        for (long yy : coarse) {
          const Lattice l{xx, xy, z[0], yy, z[1], z[2]};
          const Candidate c = to_candidate(l);
          partial[i].offer(c);
          for (int k = 0; k < 6; ++k) profiles[i][k * coarse.size() + coarse_index(l[k])].offer(c);
        }
      }
    }
  });
  TopK best(keep);
  for (const auto& p : partial) best.merge(p);
  std::vector<TopK> profile = profile_table();
  for (const auto& table : profiles) {
    for (std::size_t j = 0; j < table.size(); ++j) profile[j].merge(table[j]);
  }
  result.coarse_evaluations = zrows.size() * leading.size() * coarse.size() * coarse.size();
  if (best.items().empty()) throw FitError("coarse grid is empty after pruning");

  // Fine stage. Coarse seeds are polished onto the fine lattice; the best one
  // then gets exhaustive 3-D block scans at the fine step inside
  // +-fine_halfwidth, alternating the z-row block and the remaining block
  // until stable, and a 6-D polish over +-2 fine steps.
  auto lattice_of = [u](const Candidate& c) {
    Lattice l{};
    for (int k = 0; k < 6; ++k) l[k] = std::lround(c.components[k] / u);
    return l;
  };
  TopK fine_best(keep);
  for (const auto& c : best.items()) fine_best.offer(c);
  auto scan_around = [&](const Candidate& from, const std::vector<int>& axes, long half,
                         long stride) {
    const Lattice centre = lattice_of(from);
    std::vector<std::vector<long>> ranges;
    for (int ax : axes) {
      std::vector<long> r;
      for (long n = -half; n <= half; ++n) {
        const long v = centre[ax] + n * stride;
        if (v >= -n_range && v <= n_range) r.push_back(v);
      }
      ranges.push_back(std::move(r));
    }
    std::size_t inner = 1;
    for (std::size_t k = 1; k < ranges.size(); ++k) inner *= ranges[k].size();
    std::vector<TopK> local(ranges[0].size(), TopK(keep));
    parallel_for(ranges[0].size(), spec.workers, [&](std::size_t i) {
      Lattice l = centre;
      l[axes[0]] = ranges[0][i];
      for (std::size_t j = 0; j < inner; ++j) {
        std::size_t rem = j;
        for (std::size_t k = ranges.size(); k-- > 1;) {
          l[axes[k]] = ranges[k][rem % ranges[k].size()];
          rem /= ranges[k].size();
        }
        local[i].offer(to_candidate(l));
      }
    });
    for (const auto& t : local) fine_best.merge(t);
    result.fine_evaluations += ranges[0].size() * inner;
    TopK round(1);
    for (const auto& t : local) round.merge(t);
    round.offer(from);
    return round.items().front();
  };
  const std::vector<int> zblock{2, 4, 5}, xblock{0, 1, 3}, all{0, 1, 2, 3, 4, 5};
  std::vector<Candidate> starts(best.items().begin(),
                                best.items().begin() + std::min(spec.top_k, best.items().size()));
  for (const auto& t : profile) {
    for (const auto& c : t.items()) {
      if (std::none_of(starts.begin(), starts.end(),
                       [&](const Candidate& o) { return o.components == c.components; })) {
        starts.push_back(c);
      }
    }
  }
  std::vector<Candidate> polished(starts.size());
  parallel_for(starts.size(), spec.workers, [&](std::size_t i) {
    const HyperfineComponents x = refine_continuous(f, starts[i].components, spec.coarse_range);
    Lattice l{};
    for (int k = 0; k < 6; ++k) l[k] = std::clamp(std::lround(x[k] / u), -n_range, n_range);
    const Candidate snapped = to_candidate(l);
    polished[i] = candidate_less(snapped, starts[i]) ? snapped : starts[i];
  });
  TopK seeds(1);
  for (Candidate c : polished) {
    for (int round = 0; round < spec.max_fine_rounds; ++round) {
      const Candidate next = scan_around(c, all, 1, 1);
      if (next.components == c.components) break;
      c = next;
    }
    seeds.offer(c);
  }
  Candidate current = seeds.items().front();
  auto scan = [&](const std::vector<int>& axes, long half) {
    return scan_around(current, axes, half, 1);
  };
  for (int pass = 0; pass < 4; ++pass) {
    for (int round = 0; round < spec.max_fine_rounds; ++round) {
      const Candidate before = current;
      current = scan(zblock, n_half);
      current = scan(xblock, n_half);
      if (current.components == before.components) break;
    }
    const Candidate before = current;
    current = scan(all, 2);
    if (current.components == before.components) break;
  }

  HyperfineComponents mirrored = mirror_image(current.components);
  Candidate mirror{mirrored, f(mirrored)};
  result.mirror_degenerate =
      mirrored != current.components &&
      std::abs(mirror.objective - current.objective) <= 1e-9 * current.objective + 1e-22;
  // A degenerate pair is reported with the lexicographically smaller member first.
  if (result.mirror_degenerate && mirrored < current.components) {
    std::swap(current, mirror);
    mirrored = mirror.components;
  }
  result.hyperfine = to_matrix(current.components);
  result.objective = current.objective;
  result.mirror = mirror;
  fine_best.offer(result.mirror);
  const Lattice best_l = lattice_of(current);
  for (const auto& c : fine_best.items()) {
    if (c.components == current.components) continue;
    if (result.runners_up.size() < spec.top_k) result.runners_up.push_back(c);
    const Lattice l = lattice_of(c);
    long dist = 0;
    for (int k = 0; k < 6; ++k) dist = std::max(dist, std::abs(l[k] - best_l[k]));
    const bool is_mirror = c.components == mirrored;
    if (!is_mirror && dist > 1 && c.objective <= 1.01 * current.objective + 1e-24) {
      result.identifiability_warning = true;
    }
  }
  if (result.identifiability_warning) {
    result.warning = "runner-up within 1% of the minimum at a non-adjacent grid point";
  }
  if (!set.identifiable()) {
    result.identifiability_warning = true;
    result.warning = "measurement set spans fewer than 2 fields or 3 entries: underdetermined";
  }
  return result;
}

SearchResult merge_results(const std::vector<SearchResult>& shards, std::size_t top_k) {
  if (shards.empty()) throw FitError("no shard results to merge");
  std::size_t best = 0;
  for (std::size_t i = 1; i < shards.size(); ++i) {
    const Candidate a{to_components(shards[i].hyperfine), shards[i].objective};
    const Candidate b{to_components(shards[best].hyperfine), shards[best].objective};
    if (candidate_less(a, b)) best = i;
  }
  SearchResult out = shards[best];
  TopK runners(top_k);
  const HyperfineComponents winner = to_components(out.hyperfine);
  for (const auto& s : shards) {
    const Candidate own{to_components(s.hyperfine), s.objective};
    if (own.components != winner) runners.offer(own);
    for (const auto& c : s.runners_up) {
      if (c.components != winner) runners.offer(c);
    }
  }
  out.runners_up = runners.items();
  out.coarse_evaluations = out.fine_evaluations = out.pruned = 0;
  for (const auto& s : shards) {
    out.coarse_evaluations += s.coarse_evaluations;
    out.fine_evaluations += s.fine_evaluations;
    out.pruned += s.pruned;
    if (s.identifiability_warning && out.warning.empty()) out.warning = s.warning;
    out.identifiability_warning = out.identifiability_warning || s.identifiability_warning;
  }
  return out;
}

std::string search_report(const SearchResult& r) {
  std::ostringstream os;
  os.precision(10);
  auto line = [&os](const HyperfineComponents& c, double obj) {
    for (double v : c) os << v << ',';
    os << obj << '\n';
  };
  os << "# coarse_evaluations " << r.coarse_evaluations << "\n";
  os << "# fine_evaluations " << r.fine_evaluations << "\n";
  os << "# pruned " << r.pruned << "\n";
  os << "# mirror_degenerate " << (r.mirror_degenerate ? "true" : "false") << "\n";
  os << "# identifiability_warning " << (r.identifiability_warning ? "true" : "false") << "\n";
  if (!r.warning.empty()) os << "# warning " << r.warning << "\n";
  os << "rank,xx,xy,xz,yy,yz,zz,objective\n";
  os << "0,";
  line(to_components(r.hyperfine), r.objective);
  int rank = 1;
  for (const auto& c : r.runners_up) {
    os << rank++ << ',';
    line(c.components, c.objective);
  }
  os << "mirror,";
  line(r.mirror.components, r.mirror.objective);
  return os.str();
}

}  // namespace nvsim
