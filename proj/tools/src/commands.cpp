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

#include "nvsim_cli/commands.hpp"

#include <CLI11.hpp>
#include <csignal>
#include <iostream>
#include <optional>

#include "nvsim/config.hpp"
#include "nvsim/dataset.hpp"
#include "nvsim/errors.hpp"
#include "nvsim/fitting.hpp"
#include "nvsim/io.hpp"
#include "nvsim/version.hpp"
#include "nvsim_cli/artifacts.hpp"
#include "nvsim_cli/service.hpp"

namespace fs = std::filesystem;

namespace nvsim::cli {
namespace {

struct InputError : Error {
  using Error::Error;
};

struct FilterFlags {
  std::optional<std::string> b0, theta, isotope, order, transition, family, protocol;
  std::vector<std::string> where;

  void add(CLI::App* app) {
    app->add_option("--b0", b0, "B0 in tesla (equality)");
    app->add_option("--theta", theta, "Misalignment in degrees (equality)");
    app->add_option("--isotope", isotope, "n14, n15 or none");
    app->add_option("--order", order, "XY8 order M");
    app->add_option("--transition", transition, "plus_one or minus_one");
    app->add_option("--family", family, "13C family id or none");
    app->add_option("--protocol", protocol, "hahn, xy8 or rxy8");
    app->add_option("--where", where, "Clause such as 'b0_T>=0.02' (repeatable)");
  }

  Filter filter() const {
    std::vector<std::string> clauses;
    auto eq = [&](const char* field, const std::optional<std::string>& v) {
      if (v) clauses.push_back(std::string(field) + "=" + *v);
    };
    eq("b0_T", b0);
    eq("theta_deg", theta);
    eq("isotope", isotope);
    eq("order", order);
    eq("transition", transition);
    eq("family", family);
    eq("protocol", protocol);
    clauses.insert(clauses.end(), where.begin(), where.end());
    return parse_filter(clauses);
  }
};

struct SimulateFlags {
  std::string system;
  std::optional<std::string> protocol, tau, transition, rabi, detuning, duration_scale, samples,
      t_pi_ns, signal_mhz, signal_b2, signal_phase, order, group, seed;
  std::optional<fs::path> out;
  int workers = 0;
};

struct FitFlags {
  std::string measurements;
  std::string nitrogen = "n14";
  HyperfineSearchSpec spec;
  std::optional<std::string> shard;
  bool no_prune = false;
  std::optional<fs::path> out;
};

struct DatasetFlags {
  std::string grid;
  std::string root;
  FilterFlags filter;
  int workers = 0;
};

struct CompareFlags {
  std::string experimental;
  std::string root;
  FilterFlags filter;
  std::size_t top_k = 5;
  std::optional<fs::path> out;
};

struct ServeFlags {
  std::string root;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t queue = 16;
  int workers = 0;
  bool allow_build = false;
};

CommandResult cmd_simulate(const SimulateFlags& f, std::ostream& out) {
  Config cfg = Config::load(f.system);
  auto put = [&cfg](const char* key, const std::optional<std::string>& v) {
    if (v) cfg.set(key, *v);
  };
  put("protocol", f.protocol);
  put("order", f.order);
  put("group", f.group);
  put("seed", f.seed);
  put("tau_us", f.tau);
  put("transition", f.transition);
  put("rabi_MHz", f.rabi);
  put("detuning_MHz", f.detuning);
  put("duration_scale", f.duration_scale);
  put("samples_per_period", f.samples);
  put("t_pi_ns", f.t_pi_ns);
  put("signal_MHz", f.signal_mhz);
  put("signal_b2_T", f.signal_b2);
  put("signal_phase", f.signal_phase);
  const SimulationRequest req = request_from_config(cfg);
  const SimulationArtifacts art = simulate(req, f.workers);
  CommandResult r;
  if (f.out) {
    fs::create_directories(*f.out);
    const fs::path csv = *f.out / "trace.csv";
    const fs::path meta = *f.out / "metadata.txt";
    write_file_atomic(csv, art.csv);
    write_file_atomic(meta, art.metadata);
    r.artifacts = {csv, meta};
    r.summary = "wrote " + std::to_string(art.trace.x.size()) + " points to " + csv.string();
  } else {
    out << art.csv;
    r.summary = std::to_string(art.trace.x.size()) + " points";
  }
  return r;
}

CommandResult cmd_fit(FitFlags f, std::ostream& out, std::ostream& err) {
  const EseemMeasurementSet set = read_measurements_csv(f.measurements);
  f.spec.nitrogen = parse_isotope(f.nitrogen);
  f.spec.prune = !f.no_prune;
  if (f.shard) {
    const auto slash = f.shard->find('/');
    if (slash == std::string::npos) throw InputError("--shard expects i/n");
    try {
      f.spec.shard_index = std::stoi(f.shard->substr(0, slash));
      f.spec.shard_count = std::stoi(f.shard->substr(slash + 1));
    } catch (const std::exception&) {
      throw InputError("--shard expects i/n");
    }
  }
  const SearchResult res = grid_search(set, f.spec);
  if (res.identifiability_warning) err << "warning: " << res.warning << "\n";
  std::string matrix = "# fitted hyperfine matrix, MHz (xx xy xz yy yz zz)\ntarget = c13\n";
  matrix += "target_hyperfine_MHz =";
  for (double c : hyperfine_components(res.hyperfine)) matrix += " " + format_double(c);
  matrix += "\n";
  const std::string report = search_report(res);
  CommandResult r;
  if (f.out) {
    fs::create_directories(*f.out);
    write_file_atomic(*f.out / "hyperfine.cfg", matrix);
    write_file_atomic(*f.out / "report.csv", report);
    r.artifacts = {*f.out / "hyperfine.cfg", *f.out / "report.csv"};
  } else {
    out << matrix << report;
  }
  r.summary = "objective " + format_double(res.objective);
  return r;
}

CommandResult cmd_build(const DatasetFlags& f, std::ostream& err) {
  const fs::path grid_path = f.grid;
  const GridSpec grid = GridSpec::from_config(Config::load(grid_path), grid_path.parent_path());
  DatasetStore store(f.root);
  const GenerateReport rep = store.generate(grid, f.workers, [&err](std::size_t done, std::size_t total) {
    err << "\r" << done << "/" << total << std::flush;
  });
  if (rep.requested != rep.skipped) err << "\n";
  CommandResult r;
  r.artifacts.push_back(store.index_path());
  for (const auto& id : rep.new_ids) r.artifacts.push_back(store.record_path(id));
  r.summary = std::to_string(rep.generated) + " generated, " + std::to_string(rep.skipped) +
              " skipped, " + std::to_string(rep.failed) + " failed";
  if (rep.failed > 0) {
    r.summary += " (see " + store.quarantine_path().string() + ")";
    r.exit_code = kExitFailure;
  }
  return r;
}

CommandResult cmd_query(const DatasetFlags& f, std::ostream& out) {
  const DatasetStore store(f.root);
  const auto entries = store.query_index(f.filter.filter());
  out << index_table(entries);
  return {kExitOk, {}, std::to_string(entries.size()) + " records"};
}

CommandResult cmd_reindex(const DatasetFlags& f) {
  const DatasetStore store(f.root);
  store.reindex();
  return {kExitOk, {store.index_path()}, std::to_string(store.index().size()) + " records indexed"};
}

CommandResult cmd_compare(const CompareFlags& f, std::ostream& out) {
  const SweepTrace exp = read_trace_csv(f.experimental);
  const DatasetStore store(f.root);
  const auto matches = best_match(store, exp, f.filter.filter(), f.top_k);
  const std::string table = compare_table(matches);
  CommandResult r;
  if (f.out) {
    write_file_atomic(*f.out, table);
    r.artifacts.push_back(*f.out);
  } else {
    out << table;
  }
  r.summary = std::to_string(matches.size()) + " matches";
  return r;
}

Service* g_service = nullptr;

CommandResult cmd_serve(const ServeFlags& f, std::ostream& err) {
  ServiceOptions opt;
  opt.dataset_root = f.root;
  opt.queue_capacity = f.queue;
  opt.job_workers = f.workers;
  opt.allow_build = f.allow_build;
  Service service(opt);
  const int port = service.bind(f.host, f.port);
  if (port < 0) throw Error("cannot bind " + f.host + ":" + std::to_string(f.port));
  err << "nvsim " << kEngineVersion << " serving " << f.root << " on http://" << f.host << ":"
      << port << "/v1\n";
  g_service = &service;
  std::signal(SIGINT, [](int) {
    if (g_service) g_service->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_service) g_service->stop();
  });
  service.listen();
  g_service = nullptr;
  return {kExitOk, {}, "stopped"};
}

}  // namespace

CommandResult run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"NV-center dynamical decoupling simulator", "nvsim"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kEngineVersion));

  SimulateFlags sim;
  auto* s = app.add_subcommand("simulate", "Simulate one sweep and write trace CSV + metadata");
  s->add_option("--system", sim.system, "System config file")->required()->check(CLI::ExistingFile);
  s->add_option("--protocol", sim.protocol, "rabi, hahn, xy8, rxy8 or rxy8_correlated");
  s->add_option("--order", sim.order, "XY8 order M");
  s->add_option("--group", sim.group, "Correlation group g (2 or 3)");
  s->add_option("--seed", sim.seed, "Phase seed for randomized protocols");
  s->add_option("--tau", sim.tau, "Sweep grid start:stop:n in microseconds");
  s->add_option("--transition", sim.transition, "plus_one or minus_one");
  s->add_option("--rabi", sim.rabi, "Rabi frequency in MHz");
  s->add_option("--detuning", sim.detuning, "Drive detuning in MHz");
  s->add_option("--duration-scale", sim.duration_scale, "Pulse length scale T_p/t_pi");
  s->add_option("--samples", sim.samples, "Time steps per drive period");
  s->add_option("--t-pi-ns", sim.t_pi_ns, "Pi-pulse length; calibrated when absent");
  s->add_option("--signal-mhz", sim.signal_mhz, "Classical signal frequency");
  s->add_option("--signal-b2", sim.signal_b2, "Signal amplitude along z in tesla");
  s->add_option("--signal-phase", sim.signal_phase, "Signal phase in radians");
  s->add_option("--out", sim.out, "Output directory");
  s->add_option("--workers", sim.workers, "Worker threads");

  FitFlags fit;
  auto* fh = app.add_subcommand("fit-hyperfine", "Invert ESEEM frequencies into a hyperfine matrix");
  fh->add_option("--measurements", fit.measurements, "Measurement CSV")->required()->check(CLI::ExistingFile);
  fh->add_option("--nitrogen", fit.nitrogen, "Nitrogen isotope of the model");
  fh->add_option("--coarse-range", fit.spec.coarse_range);
  fh->add_option("--coarse-step", fit.spec.coarse_step);
  fh->add_option("--fine-step", fit.spec.fine_step);
  fh->add_option("--fine-halfwidth", fit.spec.fine_halfwidth);
  fh->add_option("--top-k", fit.spec.top_k);
  fh->add_option("--shard", fit.shard, "Shard i/n of the coarse grid");
  fh->add_flag("--no-prune", fit.no_prune, "Disable zero-field shell pruning");
  fh->add_option("--workers", fit.spec.workers);
  fh->add_option("--out", fit.out, "Output directory");

  DatasetFlags ds;
  auto* d = app.add_subcommand("dataset", "Build, query or reindex a record store");
  d->require_subcommand(1);
  auto* build = d->add_subcommand("build", "Generate missing records of a grid");
  build->add_option("--grid", ds.grid)->required()->check(CLI::ExistingFile);
  build->add_option("--out,--root", ds.root, "Store directory")->required();
  build->add_option("--workers", ds.workers);
  auto* query = d->add_subcommand("query", "List records matching a filter");
  query->add_option("--root,--out", ds.root, "Store directory")->required()->check(CLI::ExistingDirectory);
  ds.filter.add(query);
  auto* reindex = d->add_subcommand("reindex", "Rebuild the index from record files");
  reindex->add_option("root,--root", ds.root, "Store directory")->required()->check(CLI::ExistingDirectory);

  CompareFlags cmp;
  auto* c = app.add_subcommand("compare", "Rank stored records against an experimental trace");
  c->add_option("--exp", cmp.experimental, "Experimental CSV")->required()->check(CLI::ExistingFile);
  c->add_option("--root", cmp.root, "Store directory")->required()->check(CLI::ExistingDirectory);
  c->add_option("--top", cmp.top_k, "Number of matches");
  c->add_option("--out", cmp.out, "Output file");
  cmp.filter.add(c);

  ServeFlags sv;
  auto* srv = app.add_subcommand("serve", "Run the /v1 HTTP JSON service");
  srv->add_option("--root", sv.root, "Store directory")->required()->check(CLI::ExistingDirectory);
  srv->add_option("--host", sv.host);
  srv->add_option("--port", sv.port);
  srv->add_option("--queue", sv.queue, "Simulation queue capacity");
  srv->add_option("--workers", sv.workers, "Simulation workers");
  srv->add_flag("--allow-build", sv.allow_build, "Enable POST /v1/dataset/build");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return {kExitOk, {}, {}};
    }
    err << "error: " << e.what() << "\nRun with --help for usage.\n";
    return {kExitInvalidInput, {}, e.what()};
  }

  CommandResult result;
  try {
    if (s->parsed()) {
      result = cmd_simulate(sim, out);
    } else if (fh->parsed()) {
      result = cmd_fit(fit, out, err);
    } else if (build->parsed()) {
      result = cmd_build(ds, err);
    } else if (query->parsed()) {
      result = cmd_query(ds, out);
    } else if (reindex->parsed()) {
      result = cmd_reindex(ds);
    } else if (c->parsed()) {
      result = cmd_compare(cmp, out);
    } else if (srv->parsed()) {
      result = cmd_serve(sv, err);
    }
  } catch (const ConfigError& e) {
    result = {kExitInvalidInput, {}, e.what()};
  } catch (const GridError& e) {
    result = {kExitInvalidInput, {}, e.what()};
  } catch (const QueryError& e) {
    result = {kExitInvalidInput, {}, e.what()};
  } catch (const InvalidSpinError& e) {
    result = {kExitInvalidInput, {}, e.what()};
  } catch (const BoundsError& e) {
    result = {kExitInvalidInput, {}, e.what()};
  } catch (const InputError& e) {
    result = {kExitInvalidInput, {}, e.what()};
  } catch (const std::exception& e) {
    result = {kExitFailure, {}, e.what()};
  }
  if (result.exit_code != kExitOk) err << "error: " << result.summary << "\n";
  return result;
}

}  // namespace nvsim::cli
