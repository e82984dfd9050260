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

#include <algorithm>
#include <filesystem>
#include <random>
#include <set>

#include <doctest.h>

#include "nvsim/analysis.hpp"
#include "nvsim/config.hpp"
#include "nvsim/dataset.hpp"
#include "nvsim/errors.hpp"
#include "nvsim/io.hpp"
#include "support.hpp"

namespace nvsim {
namespace {

namespace fs = std::filesystem;

GridSpec small_grid() {
  GridSpec g;
  g.isotopes = {NitrogenIsotope::kN15};
  g.b0_tesla = {0.024, 0.039};
  g.theta_deg = {2.6, 5.1};
  g.orders = {1, 2};
  g.transitions = {Transition::kPlusOne};
  g.tau_us = linear_grid(0.2, 0.8, 64);
  return g;
}

// One store shared by the read-only cases below.
const DatasetStore& shared_store() {
  static testing::TempDir dir("dataset_shared");
  static DatasetStore store = [] {
    DatasetStore s(dir.path());
    GridSpec g = small_grid();
    s.generate(g, 1);
    g.isotopes = {NitrogenIsotope::kN14};
    g.orders = {1};
    g.transitions = {Transition::kMinusOne};
    s.generate(g, 1);
    return s;
  }();
  return store;
}

std::vector<std::string> ids(const std::vector<DatasetRecord>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) out.push_back(r.id);
  return out;
}

TEST_CASE("record ids depend on every physical parameter") {
  RecordParams p;
  p.tau_us = linear_grid(0.1, 1.0, 64);
  const std::string base = record_id(p);
  CHECK(base.size() == 16);
  CHECK(base.find_first_not_of("0123456789abcdef") == std::string::npos);
  CHECK(record_id(p) == base);
  RecordParams q = p;
  q.t_pi_ns = 17.0;
  CHECK(record_id(q) == base);
  std::vector<RecordParams> variants(7, p);
  variants[0].b0_tesla = 0.03;
  variants[1].theta_deg = 1.0;
  variants[2].order = 3;
  variants[3].transition = Transition::kPlusOne;
  variants[4].protocol = Protocol::kHahn;
  variants[5].tau_us.back() = 1.01;
  variants[6].isotope = NitrogenIsotope::kN14;
  std::set<std::string> seen{base};
  for (const auto& v : variants) CHECK(seen.insert(record_id(v)).second);
}

TEST_CASE("records need a dense tau grid") {
  RecordParams p;
  p.tau_us = linear_grid(0.1, 1.0, 32);
  CHECK_THROWS_AS(simulate_record(p), GridError);
}

TEST_CASE("record text round trip") {
  const DatasetStore& store = shared_store();
  const auto entries = store.index();
  REQUIRE_FALSE(entries.empty());
  const DatasetRecord r = store.load(entries.front().id);
  const std::string text = record_to_text(r);
  CHECK(text.rfind("# nvsim-record 1", 0) == 0);
  const DatasetRecord back = record_from_text(text);
  CHECK(back.id == r.id);
  CHECK(back.trace.x == r.trace.x);
  CHECK(back.trace.p == r.trace.p);
  CHECK(back.params.t_pi_ns == r.params.t_pi_ns);
  CHECK(record_to_text(back) == text);
  CHECK_THROWS_AS(record_from_text("hello"), Error);
}

TEST_CASE("grid config expands as a cartesian product") {
  testing::TempDir dir("grid_cfg");
  write_file_atomic(dir.path() / "fam.cfg", "fam_a = -0.25 -1.85 -0.49 0 0.01 1.01\n");
  const Config cfg = Config::parse(
      "isotope = n14 n15\nb0_T = 0.02 0.03 0.04\ntheta_deg = 2.6\norder = 1 2\n"
      "transition = plus_one minus_one\ntau_us = 0.1:1.0:64\nfamily_table = fam.cfg\n"
      "family = none fam_a\n");
  const GridSpec g = GridSpec::from_config(cfg, dir.path());
  const auto expanded = g.expand();
  CHECK(expanded.size() == 2 * 3 * 1 * 2 * 2 * 2);
  std::set<std::string> unique;
  for (const auto& p : expanded) unique.insert(record_id(p));
  CHECK(unique.size() == expanded.size());
  CHECK_THROWS_AS(GridSpec::from_config(Config::parse("isotope = n15\nb0_T = 0.02\ntheta_deg = 1\n"
                                                      "order = 1\ntransition = plus_one\n"
                                                      "protocol = rabi\n")),
                  ConfigError);
  CHECK_THROWS_AS(GridSpec::from_config(Config::parse("isotope = n15\nb0_T = 0.02\ntheta_deg = 1\n"
                                                      "order = 1.5\ntransition = plus_one\n")),
                  ConfigError);
  CHECK_THROWS_AS(GridSpec::from_config(Config::parse("isotope = n15\nb0_T = 0.02\ntheta_deg = 1\n"
                                                      "order = 1\ntransition = plus_one\n"
                                                      "family = fam_z\n")),
                  ConfigError);
}

TEST_CASE("filter clause parsing") {
  const FilterClause a = parse_clause("b0_T>=0.03");
  CHECK(a.field == "b0_T");
  CHECK(a.op == FilterOp::kGe);
  CHECK(a.value == "0.03");
  CHECK(parse_clause("isotope != n14").op == FilterOp::kNe);
  CHECK(parse_clause("order<2").op == FilterOp::kLt);
  CHECK_THROWS_AS(parse_clause("b0_T"), QueryError);
  CHECK_THROWS_AS(validate_filter(parse_filter({"colour = red"})), QueryError);
  CHECK_THROWS_AS(validate_filter(parse_filter({"isotope < n15"})), QueryError);
  CHECK_THROWS_AS(validate_filter(parse_filter({"b0_T = abc"})), QueryError);
}

TEST_CASE("store generation is idempotent and indexed") {
  testing::TempDir dir("dataset_gen");
  DatasetStore store(dir.path());
  GridSpec g = small_grid();
  g.b0_tesla = {0.039};
  g.theta_deg = {2.6};
  const GenerateReport first = store.generate(g, 1);
  CHECK(first.requested == 2);
  CHECK(first.generated == 2);
  CHECK(first.failed == 0);
  const GenerateReport second = store.generate(g, 1);
  CHECK(second.generated == 0);
  CHECK(second.skipped == 2);
  CHECK(store.index().size() == 2);
  CHECK(fs::exists(store.index_path()));
  fs::remove(store.index_path());
  CHECK(store.index().size() == 2);
  store.reindex();
  CHECK(fs::exists(store.index_path()));
  CHECK_THROWS_AS(store.load("0123456789abcdef"), NotFoundError);
  CHECK_THROWS_AS(store.load("../../etc/passwd"), NotFoundError);
}

TEST_CASE("failed records are quarantined") {
  testing::TempDir dir("dataset_quarantine");
  DatasetStore store(dir.path());
  GridSpec g = small_grid();
  g.b0_tesla = {0.039};
  g.theta_deg = {2.6};
  g.orders = {1};
  g.tau_us = linear_grid(0.001, 0.8, 64);
  const GenerateReport r = store.generate(g, 1);
  CHECK(r.failed == 1);
  CHECK(fs::exists(store.quarantine_path()));
  CHECK(store.index().empty());
}

TEST_CASE("index queries agree with a linear scan") {
  const DatasetStore& store = shared_store();
  const auto all = store.index();
  CHECK(all.size() == 12);
  CHECK(std::is_sorted(all.begin(), all.end(), index_less));
  std::mt19937_64 rng(17);
  const std::vector<std::string> numeric{"b0_T", "theta_deg", "order", "rabi_MHz", "t_pi_ns"};
  const std::vector<std::string> ops{"=", "!=", "<", "<=", ">", ">="};
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<std::string> clauses;
    const std::size_t n = pick(3);
    for (std::size_t k = 0; k < n; ++k) {
      const IndexEntry& e = all[pick(all.size())];
      switch (pick(4)) {
        case 0: clauses.push_back("isotope " + std::string(pick(2) ? "=" : "!=") + " " + to_string(e.isotope)); break;
        case 1: clauses.push_back("transition = " + to_string(e.transition)); break;
        case 2: clauses.push_back("id != " + e.id); break;
        default: {
          const std::string f = numeric[pick(numeric.size())];
          const double v = f == "b0_T" ? e.b0_tesla : f == "theta_deg" ? e.theta_deg
                         : f == "order" ? e.order : f == "rabi_MHz" ? e.rabi_mhz : e.t_pi_ns;
          clauses.push_back(f + ops[pick(ops.size())] + format_double(v));
        }
      }
    }
    CAPTURE(clauses.size());
    const Filter filter = parse_filter(clauses);
    const auto via_index = store.query(filter);
    const auto via_scan = store.query_scan(filter);
    CHECK(ids(via_index) == ids(via_scan));
    CHECK(store.query_index(filter).size() == via_scan.size());
  }
}

TEST_CASE("best match ranks records by correlation") {
  const DatasetStore& store = shared_store();
  const auto all = store.index();
  const DatasetRecord target = store.load(all[3].id);
  SweepTrace exp = target.trace;
  exp.kind = TraceKind::kExperimental;
  for (double& v : exp.p) v = 500.0 * v + 80.0;
  const auto ranked = best_match(store, exp, {}, 4);
  REQUIRE(ranked.size() == 4);
  CHECK(ranked[0].record.id == target.id);
  CHECK(ranked[0].report.r == doctest::Approx(1.0));
  for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].report.r >= ranked[i].report.r);
  CHECK_THROWS_AS(best_match(store, exp, parse_filter({"b0_T > 5"})), NotFoundError);
  const auto n14 = best_match(store, exp, parse_filter({"isotope = n14"}), 10);
  for (const auto& m : n14) CHECK(m.record.params.isotope == NitrogenIsotope::kN14);
}

}  // namespace
}  // namespace nvsim
