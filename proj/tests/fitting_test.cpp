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
#include <random>

#include <doctest.h>

#include "nvsim/errors.hpp"
#include "nvsim/fitting.hpp"
#include "nvsim/hamiltonian.hpp"
#include "support.hpp"

namespace nvsim {
namespace {

const HyperfineComponents kPlant{0.5, -1.0, 0.5, 0.0, 0.5, 1.0};

EseemMeasurementSet planted_set(const HyperfineComponents& c) {
  std::vector<EseemMeasurement> conditions;
  for (double b : {0.018, 0.031, 0.040}) {
    for (auto t : {Transition::kPlusOne, Transition::kMinusOne}) {
      conditions.push_back({b, 5.0, t, 0.0, 0.0, 1.0});
    }
  }
  EseemMeasurementSet set = synthesize_measurements(to_matrix(c), conditions, NitrogenIsotope::kNone);
  set.zero_field_larmor = zero_field_larmor(to_matrix(c));
  return set;
}

HyperfineSearchSpec small_spec() {
  HyperfineSearchSpec spec;
  spec.nitrogen = NitrogenIsotope::kNone;
  spec.coarse_range = 1.0;
  spec.coarse_step = 0.5;
  spec.fine_step = 0.05;
  spec.fine_halfwidth = 0.25;
  spec.workers = 1;
  return spec;
}

double max_err(const HyperfineComponents& a, const HyperfineComponents& b) {
  double e = 0.0;
  for (int k = 0; k < 6; ++k) e = std::max(e, std::abs(a[k] - b[k]));
  return e;
}

TEST_CASE("component packing round trips and mirrors flip the y couplings") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Matrix3d a = testing::random_symmetric(rng, 4.0);
    CHECK((to_matrix(to_components(a)) - a).norm() < 1e-15);
    const HyperfineComponents c = to_components(a);
    const HyperfineComponents m = mirror_image(c);
    CHECK(mirror_image(m) == c);
    CHECK(m[1] == -c[1]);
    CHECK(m[4] == -c[4]);
    CHECK(zero_field_larmor(to_matrix(m)) == doctest::Approx(zero_field_larmor(a)));
  }
}

TEST_CASE("mirror images produce identical spectra") {
  const auto set = planted_set(kPlant);
  const HyperfineObjective f(set, NitrogenIsotope::kNone);
  CHECK(f(kPlant) < 1e-20);
  CHECK(f(mirror_image(kPlant)) < 1e-20);
  HyperfineComponents off = kPlant;
  off[2] += 0.05;
  CHECK(f(off) > 1e-6);
  CHECK(f.residuals(off).size() == static_cast<Eigen::Index>(f.residual_count()));
  CHECK(f.residual_count() == 2 * set.entries.size());
}

TEST_CASE("measurement CSV round trip and validation") {
  const auto set = planted_set(kPlant);
  const std::string csv = measurements_to_csv(set);
  const EseemMeasurementSet back = parse_measurements_csv(csv);
  REQUIRE(back.entries.size() == set.entries.size());
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    CHECK(back.entries[i].w_slow == set.entries[i].w_slow);
    CHECK(back.entries[i].w_fast == set.entries[i].w_fast);
    CHECK(back.entries[i].transition == set.entries[i].transition);
  }
  CHECK(back.zero_field_larmor.has_value());
  CHECK(*back.zero_field_larmor == *set.zero_field_larmor);
  CHECK_THROWS_AS(parse_measurements_csv("b0_T,theta_deg\n0.1,2\n"), ConfigError);
  EseemMeasurementSet bad = set;
  bad.entries[0].weight = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  EseemMeasurementSet thin;
  thin.entries = {set.entries[0], set.entries[1]};
  CHECK_FALSE(thin.identifiable());
  CHECK(set.identifiable());
}

TEST_CASE("zero-field constraint admits the planted z row") {
  const ZeroFieldConstraint z = zero_field_seed(zero_field_larmor(to_matrix(kPlant)), 0.5);
  CHECK(z.admits(kPlant[2], kPlant[4], kPlant[5]));
  CHECK_FALSE(z.admits(3.0, 3.0, 3.0));
}

TEST_CASE("search spec validation") {
  HyperfineSearchSpec s = small_spec();
  CHECK_NOTHROW(s.validate());
  s.fine_step = 0.03;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = small_spec();
  s.shard_index = 2;
  s.shard_count = 2;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = small_spec();
  s.fine_step = 0.6;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("grid search recovers a planted tensor up to its mirror") {
  const auto set = planted_set(kPlant);
  const SearchResult r = grid_search(set, small_spec());
  const HyperfineComponents got = to_components(r.hyperfine);
  CHECK(std::min(max_err(got, kPlant), max_err(got, mirror_image(kPlant))) < 1e-9);
  CHECK(r.objective < 1e-18);
  CHECK(r.mirror_degenerate);
  CHECK_FALSE(r.identifiability_warning);
  CHECK(got <= r.mirror.components);
  CHECK(r.coarse_evaluations > 0);
  for (std::size_t i = 1; i < r.runners_up.size(); ++i) {
    CHECK_FALSE(candidate_less(r.runners_up[i], r.runners_up[i - 1]));
  }
  const std::string report = search_report(r);
  CHECK(report.find("mirror") != std::string::npos);
}

TEST_CASE("merged shards agree with the unsharded search") {
  const auto set = planted_set(kPlant);
  HyperfineSearchSpec spec = small_spec();
  spec.prune = false;
  const SearchResult whole = grid_search(set, spec);
  std::vector<SearchResult> shards;
  spec.shard_count = 3;
  std::size_t coarse = 0;
  for (int i = 0; i < 3; ++i) {
    spec.shard_index = i;
    shards.push_back(grid_search(set, spec));
    coarse += shards.back().coarse_evaluations;
  }
  const SearchResult merged = merge_results(shards);
  CHECK(coarse == whole.coarse_evaluations);
  CHECK(merged.objective == doctest::Approx(whole.objective).epsilon(1e-6));
  CHECK(merged.objective < 1e-18);
  CHECK_THROWS_AS(merge_results({}), FitError);
}

TEST_CASE("underdetermined measurement sets raise a warning") {
  auto set = planted_set(kPlant);
  set.entries.resize(2);
  set.entries[1].b0_tesla = set.entries[0].b0_tesla;
  set.entries[1].transition = set.entries[0].transition;
  HyperfineSearchSpec spec = small_spec();
  spec.top_k = 3;
  const SearchResult r = grid_search(set, spec);
  CHECK(r.identifiability_warning);
  CHECK_FALSE(r.warning.empty());
}

}  // namespace
}  // namespace nvsim
