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

#ifndef NVSIM_DATASET_HPP_
#define NVSIM_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "nvsim/analysis.hpp"
#include "nvsim/config.hpp"
#include "nvsim/system.hpp"

namespace nvsim {

struct RecordParams {
  NitrogenIsotope isotope = NitrogenIsotope::kN15;
  double b0_tesla = 0.0;
  double theta_deg = 0.0;
  int order = 1;
  Transition transition = Transition::kMinusOne;
  Protocol protocol = Protocol::kXy8;
  double rabi_mhz = 40.0;
  std::string family = "none";
  std::optional<Eigen::Matrix3d> hyperfine;
  std::uint64_t seed = 0;
  int samples_per_period = 64;
  std::vector<double> tau_us;
  double t_pi_ns = 0.0;  // derived by calibration, not part of the id
};

struct DatasetRecord {
  std::string id;
  RecordParams params;
  SweepTrace trace;
  std::string engine_version;
  std::string created_at;
};

// Hashed input text: every input parameter, the tau grid and the engine version.
std::string canonical_params(const RecordParams& p);
std::string record_id(const RecordParams& p);

SpinSystem record_system(const RecordParams& p);
// Calibrates t_pi, then runs the sweep.
DatasetRecord simulate_record(RecordParams p, int workers = 1);

std::string record_to_text(const DatasetRecord& r);
DatasetRecord record_from_text(std::string_view text);

// family id -> symmetric hyperfine matrix, one `id = xx xy xz yy yz zz` line each.
struct FamilyTable {
  std::map<std::string, Eigen::Matrix3d> entries;

  static FamilyTable parse(std::string_view text);
  static FamilyTable load(const std::filesystem::path& path);
};

struct GridSpec {
  std::vector<NitrogenIsotope> isotopes;
  std::vector<double> b0_tesla;
  std::vector<double> theta_deg;
  std::vector<int> orders;
  std::vector<Transition> transitions;
  std::vector<double> tau_us;
  double rabi_mhz = 40.0;
  Protocol protocol = Protocol::kXy8;
  std::vector<std::string> families{"none"};
  FamilyTable family_table;
  std::uint64_t seed = 0;
  int samples_per_period = 64;

  // Relative paths in the config resolve against `base_dir`.
  static GridSpec from_config(const Config& cfg, const std::filesystem::path& base_dir = {});
  std::vector<RecordParams> expand() const;
};

enum class FilterOp { kEq, kNe, kLt, kLe, kGt, kGe };

struct FilterClause {
  std::string field;
  FilterOp op = FilterOp::kEq;
  std::string value;
};

using Filter = std::vector<FilterClause>;

// "field op value" with op in =, !=, <, <=, >, >=. Throws QueryError.
FilterClause parse_clause(std::string_view text);
Filter parse_filter(const std::vector<std::string>& clauses);
void validate_filter(const Filter& filter);

// Flat view of a record used for filtering and ordering.
struct IndexEntry {
  std::string id;
  NitrogenIsotope isotope = NitrogenIsotope::kN15;
  double b0_tesla = 0.0;
  double theta_deg = 0.0;
  int order = 1;
  Transition transition = Transition::kMinusOne;
  Protocol protocol = Protocol::kXy8;
  std::string family;
  double rabi_mhz = 40.0;
  double t_pi_ns = 0.0;
  std::size_t points = 0;

  static IndexEntry of(const DatasetRecord& r);
};

bool matches(const IndexEntry& e, const Filter& filter);
// (isotope, B0, theta, M, transition, family, id).
bool index_less(const IndexEntry& a, const IndexEntry& b);

struct GenerateReport {
  std::size_t requested = 0;
  std::size_t generated = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
  std::vector<std::string> new_ids;
};

// Append-only directory of record files plus a rebuildable index.
class DatasetStore {
 public:
  explicit DatasetStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path record_path(std::string_view id) const;
  std::filesystem::path index_path() const;
  std::filesystem::path quarantine_path() const;

  using Progress = std::function<void(std::size_t done, std::size_t total)>;
  GenerateReport generate(const GridSpec& grid, int workers = 0, const Progress& progress = {});

  void reindex() const;
  std::vector<IndexEntry> index() const;
  bool contains(std::string_view id) const;
  DatasetRecord load(std::string_view id) const;

  std::vector<IndexEntry> query_index(const Filter& filter) const;
  std::vector<DatasetRecord> query(const Filter& filter) const;
  // Same result as query() from reading every record file.
  std::vector<DatasetRecord> query_scan(const Filter& filter) const;

 private:
  std::vector<IndexEntry> scan_entries() const;
  std::filesystem::path root_;
};

struct Match {
  DatasetRecord record;
  CorrelationReport report;
};

// Ranked by r descending; records with undefined correlation are skipped.
std::vector<Match> best_match(const DatasetStore& store, const SweepTrace& experimental,
                              const Filter& filter, std::size_t top_k = 10);

}  // namespace nvsim

#endif  // NVSIM_DATASET_HPP_
