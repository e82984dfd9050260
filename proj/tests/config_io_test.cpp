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

#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <thread>

#include <doctest.h>

#include "nvsim/config.hpp"
#include "nvsim/errors.hpp"
#include "nvsim/hash.hpp"
#include "nvsim/io.hpp"
#include "nvsim/parallel.hpp"
#include "nvsim/rng.hpp"
#include "nvsim/system.hpp"
#include "support.hpp"

namespace nvsim {
namespace {

TEST_CASE("config parsing") {
  const Config c = Config::parse(
      "# comment\n"
      "nitrogen = n15\n"
      "\n"
      "b0_T = 0.039   \n"
      "orders = 1 2 4\n"
      "count = 7\n");
  CHECK(c.get_string("nitrogen") == "n15");
  CHECK(c.get_double("b0_T") == 0.039);
  CHECK(c.get_doubles("orders") == std::vector<double>{1, 2, 4});
  CHECK(c.get_int("count") == 7);
  CHECK(c.get_double("missing", 2.5) == 2.5);
  CHECK(c.line("b0_T") == 4);
  CHECK(c.has("count"));
  CHECK_FALSE(c.has("Count"));
  CHECK_THROWS_AS(c.get_string("nope"), ConfigError);
  CHECK_THROWS_AS(c.get_double("nitrogen"), ConfigError);
  CHECK_THROWS_AS(c.get_int("b0_T"), ConfigError);
}

TEST_CASE("config errors carry line numbers") {
  try {
    Config::parse("a = 1\nb = 2\nnot a pair\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 3);
  }
  try {
    Config::parse("a = 1\na = 2\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 2);
  }
  const Config c = Config::parse("a = 1\nzzz = 2\n");
  CHECK_THROWS_AS(c.require_known({"a"}), ConfigError);
  CHECK_NOTHROW(c.require_known({"a", "zzz"}));
  CHECK_THROWS_AS(Config::load("/nonexistent/nvsim.cfg"), ConfigError);
}

TEST_CASE("filtered configs keep entries and lines") {
  const Config c = Config::parse("a = 1\nb = 2\nc = 3\n");
  const Config f = c.filtered([](std::string_view k) { return k != "b"; });
  CHECK(f.keys() == std::vector<std::string>{"a", "c"});
  CHECK(f.line("c") == 3);
}

TEST_CASE("number formatting round trips exactly") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) * std::pow(10.0, static_cast<int>(u(rng)) % 12);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(40.0) == "40");
  CHECK_THROWS_AS(parse_double("1.2.3"), ConfigError);
  CHECK_THROWS_AS(parse_double(""), ConfigError);
}

TEST_CASE("system config round trip") {
  SpinSystem s = SpinSystem::make(NitrogenIsotope::kN14, 0.04, 2.6);
  s.target = TargetSpin{constants::kGammaC13,
                        hyperfine_from_components({-0.25, -1.85, -0.49, 0.0, 0.01, 1.01})};
  const SpinSystem back = system_from_config(Config::parse(system_to_config(s)));
  CHECK(back.nitrogen == s.nitrogen);
  CHECK(back.b0_tesla == s.b0_tesla);
  CHECK(back.theta_deg == s.theta_deg);
  REQUIRE(back.target.has_value());
  CHECK(back.target->hyperfine == s.target->hyperfine);
  CHECK(system_to_config(back) == system_to_config(s));
  CHECK_THROWS_AS(system_from_config(Config::parse("b0_T = 0.04\nnitrogen = n16\n")), ConfigError);
  CHECK_THROWS_AS(system_from_config(Config::parse("b0_T = 0.04\ncolour = red\n")), ConfigError);
  CHECK_THROWS_AS(system_from_config(Config::parse("theta_deg = 2\n")), ConfigError);
}

TEST_CASE("trace CSV round trip and rejection of malformed input") {
  SweepTrace t;
  for (int i = 0; i < 16; ++i) {
    t.x.push_back(0.1 + 0.013 * i);
    t.p.push_back(std::sin(0.37 * i) / 3.0);
  }
  const std::string csv = trace_to_csv(t);
  const SweepTrace back = parse_trace_csv(csv);
  CHECK(back.x == t.x);
  CHECK(back.p == t.p);
  CHECK(back.kind == TraceKind::kExperimental);
  CHECK_THROWS_AS(parse_trace_csv("tau_us,p\n0.1,0.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_trace_csv("freq,p\n" + csv.substr(csv.find('\n') + 1)), ConfigError);
  std::string bad = csv;
  bad.insert(bad.find('\n') + 1, "0.2,abc\n");
  CHECK_THROWS_AS(parse_trace_csv(bad), ConfigError);
  std::string unordered = "tau_us,p\n";
  for (int i = 0; i < 10; ++i) unordered += std::to_string(10 - i) + ",0.5\n";
  CHECK_THROWS_AS(parse_trace_csv(unordered), ConfigError);
}

TEST_CASE("atomic writes replace whole files") {
  testing::TempDir dir("io");
  const auto path = dir.path() / "sub" / "a.txt";
  write_file_atomic(path, "first");
  CHECK(read_file(path) == "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  CHECK_THROWS_AS(read_file(dir.path() / "missing"), Error);
  CHECK(metadata_to_text({{"b", "2"}, {"a", "1"}}) == "a = 1\nb = 2\n");
}

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("SplitMix64 is reproducible and splits into distinct streams") {
  SplitMix64 a(1), b(1);
  for (int i = 0; i < 10; ++i) CHECK(a.next() == b.next());
  SplitMix64 zero(0);
  CHECK(zero.next() == 0xe220a8397b1dcdafULL);
  const SplitMix64 root(7);
  SplitMix64 c1 = root.split(0), c2 = root.split(1);
  CHECK(c1.next() != c2.next());
  double sum = 0.0;
  SplitMix64 u(3);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform();
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    sum += v;
  }
  CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("parallel_for visits every index once") {
  for (int workers : {1, 2, 4}) {
    std::vector<std::atomic<int>> hits(257);
    parallel_for(hits.size(), workers, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits) CHECK(h.load() == 1);
  }
  CHECK_THROWS_AS(parallel_for(8, 2, [](std::size_t i) {
                    if (i == 5) throw ConfigError("boom");
                  }),
                  ConfigError);
  CHECK(default_worker_count() >= 1);
}

TEST_CASE("job queue rejects work beyond capacity") {
  std::atomic<bool> release{false};
  std::atomic<int> done{0};
  {
    JobQueue q(1, 2);
    auto blocker = [&] {
      while (!release.load()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
      done++;
    };
    CHECK(q.try_submit(blocker));
    // Give the worker time to pick up the first job.
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    CHECK(q.try_submit(blocker));
    CHECK(q.try_submit(blocker));
    CHECK_FALSE(q.try_submit(blocker));
    release = true;
  }
  CHECK(done.load() == 3);
}

}  // namespace
}  // namespace nvsim
