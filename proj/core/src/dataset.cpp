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

#include "nvsim/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <sstream>

#include "nvsim/engine.hpp"
#include "nvsim/errors.hpp"
#include "nvsim/hash.hpp"
#include "nvsim/io.hpp"
#include "nvsim/parallel.hpp"
#include "nvsim/version.hpp"
#include "text.hpp"

namespace fs = std::filesystem;

namespace nvsim {
namespace {

constexpr std::string_view kRecordMagic = "# nvsim-record 1";
constexpr std::string_view kRecordExt = ".rec";
constexpr std::string_view kIndexHeader =
    "id\tisotope\tb0_T\ttheta_deg\torder\ttransition\tprotocol\tfamily\trabi_MHz\tt_pi_ns\tpoints";

std::string now_utc() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (double d : v) {
    if (!out.empty()) out += ' ';
    out += format_double(d);
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto p = s.find(sep, start);
    out.emplace_back(s.substr(start, p - start));
    if (p == std::string_view::npos) break;
    start = p + 1;
  }
  return out;
}

bool is_numeric_field(std::string_view f) {
  return f == "b0_T" || f == "theta_deg" || f == "order" || f == "rabi_MHz" || f == "t_pi_ns";
}

bool is_text_field(std::string_view f) {
  return f == "isotope" || f == "transition" || f == "protocol" || f == "family" || f == "id";
}

double numeric_value(const IndexEntry& e, std::string_view f) {
  if (f == "b0_T") return e.b0_tesla;
  if (f == "theta_deg") return e.theta_deg;
  if (f == "order") return e.order;
  if (f == "rabi_MHz") return e.rabi_mhz;
  return e.t_pi_ns;
}

std::string text_value(const IndexEntry& e, std::string_view f) {
  if (f == "isotope") return to_string(e.isotope);
  if (f == "transition") return to_string(e.transition);
  if (f == "protocol") return to_string(e.protocol);
  if (f == "family") return e.family;
  return e.id;
}

std::string index_line(const IndexEntry& e) {
  return e.id + '\t' + to_string(e.isotope) + '\t' + format_double(e.b0_tesla) + '\t' +
         format_double(e.theta_deg) + '\t' + std::to_string(e.order) + '\t' +
         to_string(e.transition) + '\t' + to_string(e.protocol) + '\t' + e.family + '\t' +
         format_double(e.rabi_mhz) + '\t' + format_double(e.t_pi_ns) + '\t' +
         std::to_string(e.points);
}

IndexEntry parse_index_line(std::string_view line) {
  const auto c = split(line, '\t');
  if (c.size() != 11) throw Error("corrupt index line");
  IndexEntry e;
  e.id = c[0];
  e.isotope = parse_isotope(c[1]);
  e.b0_tesla = parse_double(c[2]);
  e.theta_deg = parse_double(c[3]);
  e.order = std::stoi(c[4]);
  e.transition = parse_transition(c[5]);
  e.protocol = parse_protocol(c[6]);
  e.family = c[7];
  e.rabi_mhz = parse_double(c[8]);
  e.t_pi_ns = parse_double(c[9]);
  e.points = std::stoul(c[10]);
  return e;
}

}  // namespace

std::string canonical_params(const RecordParams& p) {
  std::string s;
  s += "isotope=" + to_string(p.isotope) + "\n";
  s += "b0_T=" + format_double(p.b0_tesla) + "\n";
  s += "theta_deg=" + format_double(p.theta_deg) + "\n";
  s += "order=" + std::to_string(p.order) + "\n";
  s += "transition=" + to_string(p.transition) + "\n";
  s += "protocol=" + to_string(p.protocol) + "\n";
  s += "rabi_MHz=" + format_double(p.rabi_mhz) + "\n";
  s += "family=" + p.family + "\n";
  if (p.hyperfine) s += "hyperfine_MHz=" + join_doubles(hyperfine_components(*p.hyperfine)) + "\n";
  s += "seed=" + std::to_string(p.seed) + "\n";
  s += "samples_per_period=" + std::to_string(p.samples_per_period) + "\n";
  s += "tau_us=" + join_doubles(p.tau_us) + "\n";
  s += "engine_version=" + std::string(kEngineVersion) + "\n";
  return s;
}

std::string record_id(const RecordParams& p) { return sha256_hex(canonical_params(p)).substr(0, 16); }

SpinSystem record_system(const RecordParams& p) {
  SpinSystem sys = SpinSystem::make(p.isotope, p.b0_tesla, p.theta_deg);
  if (p.hyperfine) sys.target = TargetSpin{constants::kGammaC13, *p.hyperfine};
  sys.validate();
  return sys;
}

DatasetRecord simulate_record(RecordParams p, int workers) {
  if (p.tau_us.size() < 64) throw GridError("dataset records need at least 64 tau points");
  const SpinSystem sys = record_system(p);
  const DriveSpec drive = resonant_drive(sys, p.transition, p.rabi_mhz);
  PropagationSettings settings;
  settings.samples_per_drive_period = p.samples_per_period;
  p.t_pi_ns = calibrate_pi(sys, drive, settings);
  const Engine engine(sys, drive, std::nullopt, settings);
  ProtocolParams proto;
  proto.protocol = p.protocol;
  proto.order = p.order;
  proto.seed = p.seed;
  proto.t_pi_us = p.t_pi_ns * 1e-3;
  DatasetRecord r;
  r.trace = run_sweep(engine, proto, p.tau_us, workers);
  r.id = record_id(p);
  r.params = std::move(p);
  r.engine_version = std::string(kEngineVersion);
  r.created_at = now_utc();
  return r;
}

std::string record_to_text(const DatasetRecord& r) {
  const RecordParams& p = r.params;
  std::string s(kRecordMagic);
  s += "\n";
  auto put = [&s](std::string_view k, const std::string& v) {
    s += "# ";
    s.append(k);
    s += ": " + v + "\n";
  };
  put("id", r.id);
  put("engine_version", r.engine_version);
  put("created_at", r.created_at);
  put("isotope", to_string(p.isotope));
  put("b0_T", format_double(p.b0_tesla));
  put("theta_deg", format_double(p.theta_deg));
  put("order", std::to_string(p.order));
  put("transition", to_string(p.transition));
  put("protocol", to_string(p.protocol));
  put("rabi_MHz", format_double(p.rabi_mhz));
  put("family", p.family);
  if (p.hyperfine) put("hyperfine_MHz", join_doubles(hyperfine_components(*p.hyperfine)));
  put("seed", std::to_string(p.seed));
  put("samples_per_period", std::to_string(p.samples_per_period));
  put("t_pi_ns", format_double(p.t_pi_ns));
  put("basis", "electron m_s = +1, 0, -1 then nuclei, each descending in m");
  s += trace_to_csv(r.trace, "tau_us", "p");
  return s;
}

DatasetRecord record_from_text(std::string_view text) {
  if (text.substr(0, kRecordMagic.size()) != kRecordMagic) throw Error("not a record file");
  std::map<std::string, std::string> h;
  std::size_t pos = 0;
  while (pos < text.size() && text[pos] == '#') {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    const auto colon = line.find(": ");
    if (colon == std::string_view::npos || colon < 2) continue;
    h[std::string(line.substr(2, colon - 2))] = std::string(line.substr(colon + 2));
  }
  auto get = [&h](const std::string& k) -> const std::string& {
    const auto it = h.find(k);
    if (it == h.end()) throw Error("record header lacks '" + k + "'");
    return it->second;
  };
  DatasetRecord r;
  r.id = get("id");
  r.engine_version = get("engine_version");
  r.created_at = get("created_at");
  RecordParams& p = r.params;
  p.isotope = parse_isotope(get("isotope"));
  p.b0_tesla = parse_double(get("b0_T"));
  p.theta_deg = parse_double(get("theta_deg"));
  p.order = std::stoi(get("order"));
  p.transition = parse_transition(get("transition"));
  p.protocol = parse_protocol(get("protocol"));
  p.rabi_mhz = parse_double(get("rabi_MHz"));
  p.family = get("family");
  if (h.count("hyperfine_MHz")) {
    std::vector<double> c;
    for (const auto& tok : split(h["hyperfine_MHz"], ' ')) c.push_back(parse_double(tok));
    p.hyperfine = hyperfine_from_components(c);
  }
  p.seed = std::stoull(get("seed"));
  p.samples_per_period = std::stoi(get("samples_per_period"));
  p.t_pi_ns = parse_double(get("t_pi_ns"));
  r.trace = parse_trace_csv(text.substr(pos), TraceKind::kSimulated);
  r.trace.metadata.clear();
  p.tau_us = r.trace.x;
  return r;
}

FamilyTable FamilyTable::parse(std::string_view text) {
  const Config cfg = Config::parse(text);
  FamilyTable t;
  for (const auto& k : cfg.keys()) {
    try {
      const Eigen::Matrix3d a = hyperfine_from_components(cfg.get_doubles(k));
      if (!a.allFinite()) throw ConfigError("non-finite component");
      t.entries.emplace(k, a);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("family '") + k + "': " + e.what(), cfg.line(k));
    }
  }
  return t;
}

FamilyTable FamilyTable::load(const fs::path& path) {
  try {
    return parse(read_file(path));
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

GridSpec GridSpec::from_config(const Config& cfg, const fs::path& base_dir) {
  cfg.require_known({"isotope", "b0_T", "theta_deg", "order", "transition", "tau_us",
                     "rabi_MHz", "family_table", "family", "protocol", "seed",
                     "samples_per_period"});
  GridSpec g;
  auto at = [&cfg](std::string_view key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), cfg.line(key));
    } catch (const GridError& e) {
      throw ConfigError(e.what(), cfg.line(key));
    }
  };
  at("isotope", [&] {
    for (const auto& s : cfg.get_strings("isotope")) g.isotopes.push_back(parse_isotope(s));
  });
  g.b0_tesla = cfg.get_doubles("b0_T");
  g.theta_deg = cfg.get_doubles("theta_deg");
  at("order", [&] {
    for (double o : cfg.get_doubles("order")) {
      if (o < 1 || o != std::floor(o)) throw ConfigError("orders must be positive integers");
      g.orders.push_back(static_cast<int>(o));
    }
  });
  at("transition", [&] {
    for (const auto& s : cfg.get_strings("transition")) g.transitions.push_back(parse_transition(s));
  });
  at("tau_us", [&] { g.tau_us = parse_grid(cfg.get_string("tau_us", "0.1:2.0:256")); });
  g.rabi_mhz = cfg.get_double("rabi_MHz", 40.0);
  at("protocol", [&] { g.protocol = parse_protocol(cfg.get_string("protocol", "xy8")); });
  if (g.protocol == Protocol::kRabi || g.protocol == Protocol::kRxy8Correlated) {
    throw ConfigError("dataset protocol must be hahn, xy8 or rxy8", cfg.line("protocol"));
  }
  g.seed = cfg.get_uint64("seed", 0);
  g.samples_per_period = static_cast<int>(cfg.get_int("samples_per_period", 64));
  if (cfg.has("family_table")) {
    fs::path p = cfg.get_string("family_table");
    if (p.is_relative()) p = base_dir / p;
    at("family_table", [&] { g.family_table = FamilyTable::load(p); });
  }
  if (cfg.has("family")) g.families = cfg.get_strings("family");
  for (const auto& f : g.families) {
    if (f != "none" && g.family_table.entries.count(f) == 0) {
      throw ConfigError("family '" + f + "' is not in the family table", cfg.line("family"));
    }
  }
  if (g.isotopes.empty() || g.b0_tesla.empty() || g.theta_deg.empty() || g.orders.empty() ||
      g.transitions.empty()) {
    throw ConfigError("every grid axis needs at least one value");
  }
  return g;
}

std::vector<RecordParams> GridSpec::expand() const {
  std::vector<RecordParams> out;
  for (auto iso : isotopes)
    for (double b : b0_tesla)
      for (double th : theta_deg)
        for (int m : orders)
          for (auto tr : transitions)
            for (const auto& fam : families) {
              RecordParams p;
              p.isotope = iso;
              p.b0_tesla = b;
              p.theta_deg = th;
              p.order = m;
              p.transition = tr;
              p.protocol = protocol;
              p.rabi_mhz = rabi_mhz;
              p.family = fam;
              if (fam != "none") p.hyperfine = family_table.entries.at(fam);
              p.seed = seed;
              p.samples_per_period = samples_per_period;
              p.tau_us = tau_us;
              out.push_back(std::move(p));
            }
  return out;
}

FilterClause parse_clause(std::string_view text) {
  static constexpr std::pair<std::string_view, FilterOp> kOps[] = {
      {"!=", FilterOp::kNe}, {"<=", FilterOp::kLe}, {">=", FilterOp::kGe},
      {"=", FilterOp::kEq},  {"<", FilterOp::kLt},  {">", FilterOp::kGt}};
  for (const auto& [sym, op] : kOps) {
    const auto p = text.find(sym);
    if (p == std::string_view::npos) continue;
    FilterClause c{std::string(detail::trim(text.substr(0, p))), op,
                   std::string(detail::trim(text.substr(p + sym.size())))};
    validate_filter({c});
    return c;
  }
  throw QueryError("malformed filter clause '" + std::string(text) + "'");
}

Filter parse_filter(const std::vector<std::string>& clauses) {
  Filter f;
  for (const auto& c : clauses) f.push_back(parse_clause(c));
  return f;
}

void validate_filter(const Filter& filter) {
  for (const auto& c : filter) {
    if (is_numeric_field(c.field)) {
      try {
        parse_double(c.value);
      } catch (const ConfigError&) {
        throw QueryError("filter value for '" + c.field + "' is not a number");
      }
    } else if (is_text_field(c.field)) {
      if (c.op != FilterOp::kEq && c.op != FilterOp::kNe) {
        throw QueryError("field '" + c.field + "' supports only = and !=");
      }
    } else {
      throw QueryError("unknown filter field '" + c.field + "'");
    }
  }
}

IndexEntry IndexEntry::of(const DatasetRecord& r) {
  IndexEntry e;
  e.id = r.id;
  e.isotope = r.params.isotope;
  e.b0_tesla = r.params.b0_tesla;
  e.theta_deg = r.params.theta_deg;
  e.order = r.params.order;
  e.transition = r.params.transition;
  e.protocol = r.params.protocol;
  e.family = r.params.family;
  e.rabi_mhz = r.params.rabi_mhz;
  e.t_pi_ns = r.params.t_pi_ns;
  e.points = r.trace.x.size();
  return e;
}

bool matches(const IndexEntry& e, const Filter& filter) {
  for (const auto& c : filter) {
    if (is_numeric_field(c.field)) {
      const double v = numeric_value(e, c.field);
      const double q = parse_double(c.value);
      const bool eq = std::abs(v - q) <= 1e-12 * std::max(1.0, std::abs(q));
      bool ok = false;
      switch (c.op) {
        case FilterOp::kEq: ok = eq; break;
        case FilterOp::kNe: ok = !eq; break;
        case FilterOp::kLt: ok = v < q; break;
        case FilterOp::kLe: ok = v <= q; break;
        case FilterOp::kGt: ok = v > q; break;
        case FilterOp::kGe: ok = v >= q; break;
      }
      if (!ok) return false;
    } else if (is_text_field(c.field)) {
      std::string q = c.value;
      if (c.field == "isotope") q = to_string(parse_isotope(q));
      if (c.field == "transition") q = to_string(parse_transition(q));
      const bool eq = text_value(e, c.field) == q;
      if (eq != (c.op == FilterOp::kEq)) return false;
    } else {
      throw QueryError("unknown filter field '" + c.field + "'");
    }
  }
  return true;
}

bool index_less(const IndexEntry& a, const IndexEntry& b) {
  auto key = [](const IndexEntry& e) {
    return std::make_tuple(to_string(e.isotope), e.b0_tesla, e.theta_deg, e.order,
                           to_string(e.transition), e.family, e.id);
  };
  return key(a) < key(b);
}

DatasetStore::DatasetStore(fs::path root) : root_(std::move(root)) {}

fs::path DatasetStore::record_path(std::string_view id) const {
  return root_ / "records" / (std::string(id) + std::string(kRecordExt));
}
fs::path DatasetStore::index_path() const { return root_ / "index.tsv"; }
fs::path DatasetStore::quarantine_path() const { return root_ / "quarantine.log"; }

bool DatasetStore::contains(std::string_view id) const { return fs::exists(record_path(id)); }

DatasetRecord DatasetStore::load(std::string_view id) const {
  const bool safe = !id.empty() && std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
  });
  if (!safe || !contains(id)) throw NotFoundError("unknown record id '" + std::string(id) + "'");
  return record_from_text(read_file(record_path(id)));
}

GenerateReport DatasetStore::generate(const GridSpec& grid, int workers,
                                      const Progress& progress) {
  fs::create_directories(root_ / "records");
  const std::vector<RecordParams> all = grid.expand();
  GenerateReport report;
  report.requested = all.size();
  std::vector<const RecordParams*> todo;
  for (const auto& p : all) {
    if (contains(record_id(p))) {
      ++report.skipped;
    } else {
      todo.push_back(&p);
    }
  }
  std::vector<std::string> failures(todo.size());
  std::vector<std::string> ids(todo.size());
  std::mutex mu;
  std::size_t done = 0;
  parallel_for(todo.size(), workers, [&](std::size_t i) {
    try {
      const DatasetRecord r = simulate_record(*todo[i], 1);
      write_file_atomic(record_path(r.id), record_to_text(r));
      ids[i] = r.id;
    } catch (const std::exception& e) {
      failures[i] = record_id(*todo[i]) + "\t" + e.what();
    }
    std::lock_guard lock(mu);
    ++done;
    if (progress) progress(done, todo.size());
  });
  std::string quarantine;
  for (std::size_t i = 0; i < todo.size(); ++i) {
    if (!failures[i].empty()) {
      ++report.failed;
      quarantine += failures[i] + "\n";
    } else {
      ++report.generated;
      report.new_ids.push_back(ids[i]);
    }
  }
  if (!quarantine.empty()) {
    std::ofstream q(quarantine_path(), std::ios::app);
    q << quarantine;
  }
  reindex();
  return report;
}

std::vector<IndexEntry> DatasetStore::scan_entries() const {
  std::vector<IndexEntry> out;
  const fs::path dir = root_ / "records";
  if (!fs::exists(dir)) return out;
  for (const auto& f : fs::directory_iterator(dir)) {
    if (f.path().extension() != kRecordExt) continue;
    out.push_back(IndexEntry::of(record_from_text(read_file(f.path()))));
  }
  std::sort(out.begin(), out.end(), index_less);
  return out;
}

void DatasetStore::reindex() const {
  fs::create_directories(root_);
  std::string text(kIndexHeader);
  text += "\n";
  for (const auto& e : scan_entries()) text += index_line(e) + "\n";
  write_file_atomic(index_path(), text);
}

std::vector<IndexEntry> DatasetStore::index() const {
  if (!fs::exists(index_path())) return scan_entries();
  const std::string text = read_file(index_path());
  std::vector<IndexEntry> out;
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos || text.substr(0, pos) != kIndexHeader) {
    throw Error("index file is corrupt; run reindex");
  }
  ++pos;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    if (end > pos) out.push_back(parse_index_line(std::string_view(text).substr(pos, end - pos)));
    pos = end + 1;
  }
  std::sort(out.begin(), out.end(), index_less);
  return out;
}

std::vector<IndexEntry> DatasetStore::query_index(const Filter& filter) const {
  validate_filter(filter);
  std::vector<IndexEntry> out;
  for (auto& e : index()) {
    if (matches(e, filter)) out.push_back(std::move(e));
  }
  return out;
}

std::vector<DatasetRecord> DatasetStore::query(const Filter& filter) const {
  std::vector<DatasetRecord> out;
  for (const auto& e : query_index(filter)) out.push_back(load(e.id));
  return out;
}

std::vector<DatasetRecord> DatasetStore::query_scan(const Filter& filter) const {
  validate_filter(filter);
  std::vector<DatasetRecord> out;
  const fs::path dir = root_ / "records";
  if (!fs::exists(dir)) return out;
  for (const auto& f : fs::directory_iterator(dir)) {
    if (f.path().extension() != kRecordExt) continue;
    DatasetRecord r = record_from_text(read_file(f.path()));
    if (matches(IndexEntry::of(r), filter)) out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), [](const DatasetRecord& a, const DatasetRecord& b) {
    return index_less(IndexEntry::of(a), IndexEntry::of(b));
  });
  return out;
}

std::vector<Match> best_match(const DatasetStore& store, const SweepTrace& experimental,
                              const Filter& filter, std::size_t top_k) {
  const std::vector<IndexEntry> entries = store.query_index(filter);
  if (entries.empty()) throw NotFoundError("no records match the filter");
  std::vector<Match> out;
  for (const auto& e : entries) {
    DatasetRecord r = store.load(e.id);
    try {
      const CorrelationReport rep = fit_linear_map(experimental, r.trace);
      out.push_back({std::move(r), rep});
    } catch (const CorrelationError&) {
    } catch (const GridError&) {
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Match& a, const Match& b) {
    if (a.report.r != b.report.r) return a.report.r > b.report.r;
    return a.record.id < b.record.id;
  });
  if (out.size() > top_k) out.resize(top_k);
  return out;
}

}  // namespace nvsim
