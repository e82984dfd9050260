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

#include "nvsim_cli/service.hpp"

#include <future>

#include "nvsim/config.hpp"
#include "nvsim/dataset.hpp"
#include "nvsim/errors.hpp"
#include "nvsim/io.hpp"
#include "nvsim/parallel.hpp"
#include "nvsim/version.hpp"
#include "nvsim_cli/artifacts.hpp"

// After Eigen: <resolv.h> defines a `_res` macro.
#include <httplib.h>
#include <json.hpp>

namespace nvsim::cli {
namespace {

using nlohmann::json;

struct HttpError {
  int status;
  std::string message;
};

void reply(httplib::Response& res, int status, json body) {
  body["engine_version"] = std::string(kEngineVersion);
  res.status = status;
  res.set_header("X-Nvsim-Version", std::string(kEngineVersion));
  res.set_content(body.dump(), "application/json");
}

json entry_json(const IndexEntry& e) {
  return {{"id", e.id},
          {"isotope", to_string(e.isotope)},
          {"b0_T", e.b0_tesla},
          {"theta_deg", e.theta_deg},
          {"order", e.order},
          {"transition", to_string(e.transition)},
          {"protocol", to_string(e.protocol)},
          {"family", e.family},
          {"rabi_MHz", e.rabi_mhz},
          {"t_pi_ns", e.t_pi_ns},
          {"points", e.points}};
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  throw HttpError{422, "unsupported value type"};
}

Config config_from_json(const json& body) {
  if (!body.is_object()) throw HttpError{400, "request body must be a JSON object"};
  Config cfg;
  for (const auto& [k, v] : body.items()) {
    if (v.is_array()) {
      std::string joined;
      for (const auto& x : v) {
        if (!joined.empty()) joined += ' ';
        joined += scalar_text(x);
      }
      cfg.set(k, joined);
    } else {
      cfg.set(k, scalar_text(v));
    }
  }
  return cfg;
}

Filter filter_from_params(const httplib::Params& params) {
  std::vector<std::string> clauses;
  for (const auto& [k, v] : params) {
    if (k == "where") {
      clauses.push_back(v);
    } else if (k != "top_k") {
      clauses.push_back(k + "=" + v);
    }
  }
  return parse_filter(clauses);
}

}  // namespace

struct Service::Impl {
  ServiceOptions options;
  DatasetStore store;
  JobQueue jobs;
  httplib::Server server;

  explicit Impl(ServiceOptions o)
      : options(std::move(o)),
        store(options.dataset_root),
        jobs(options.job_workers > 0 ? options.job_workers : default_worker_count(),
             options.queue_capacity) {}

  // Runs fn on the job queue and waits for it.
  template <typename Fn>
  auto run_job(Fn&& fn) {
    using R = decltype(fn());
    auto task = std::make_shared<std::packaged_task<R()>>(std::forward<Fn>(fn));
    auto fut = task->get_future();
    if (!jobs.try_submit([task] { (*task)(); })) throw HttpError{503, "job queue is full"};
    return fut.get();
  }

  void guarded(httplib::Response& res, const std::function<void()>& fn) {
    try {
      fn();
    } catch (const HttpError& e) {
      reply(res, e.status, {{"error", e.message}});
    } catch (const QueryError& e) {
      reply(res, 400, {{"error", e.what()}});
    } catch (const NotFoundError& e) {
      reply(res, 404, {{"error", e.what()}});
    } catch (const ConfigError& e) {
      reply(res, 422, {{"error", e.what()}});
    } catch (const GridError& e) {
      reply(res, 422, {{"error", e.what()}});
    } catch (const SweepPointError& e) {
      reply(res, 422, {{"error", e.what()}, {"point", e.index()}});
    } catch (const Error& e) {
      reply(res, 422, {{"error", e.what()}});
    } catch (const json::exception& e) {
      reply(res, 400, {{"error", std::string("malformed JSON: ") + e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", e.what()}});
    }
  }

  void routes() {
    server.Get("/v1/health", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, 200, {{"status", "ok"}, {"read_only", !options.allow_build}});
    });

    server.Get("/v1/records", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const Filter filter = filter_from_params(req.params);
        json list = json::array();
        for (const auto& e : store.query_index(filter)) list.push_back(entry_json(e));
        reply(res, 200, {{"count", list.size()}, {"records", list}});
      });
    });

    server.Get(R"(/v1/records/([^/]+)/trace)",
               [this](const httplib::Request& req, httplib::Response& res) {
                 guarded(res, [&] {
                   const DatasetRecord r = store.load(req.matches[1].str());
                   reply(res, 200,
                         {{"id", r.id},
                          {"record", entry_json(IndexEntry::of(r))},
                          {"tau_us", r.trace.x},
                          {"p", r.trace.p},
                          {"csv", trace_to_csv(r.trace, "tau_us", "p")}});
                 });
               });

    server.Post("/v1/simulate", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const SimulationRequest sim = request_from_config(config_from_json(json::parse(req.body)));
        if (sim.tau_us.size() > options.max_tau_points) {
          throw HttpError{422, "at most " + std::to_string(options.max_tau_points) +
                                   " tau points per request; use the CLI for larger jobs"};
        }
        if (sim.protocol.order > options.max_order) {
          throw HttpError{422, "order must be <= " + std::to_string(options.max_order)};
        }
        const SimulationArtifacts art = run_job([sim] { return simulate(sim, 1); });
        reply(res, 200,
              {{"tau_us", art.trace.x},
               {"p", art.trace.p},
               {"csv", art.csv},
               {"metadata", art.metadata}});
      });
    });

    server.Post("/v1/compare", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!req.has_file("experimental")) {
          throw HttpError{400, "multipart field 'experimental' is required"};
        }
        SweepTrace exp;
        try {
          exp = parse_trace_csv(req.get_file_value("experimental").content);
        } catch (const Error& e) {
          throw HttpError{400, e.what()};
        }
        std::vector<std::string> clauses;
        for (const auto& f : req.get_file_values("where")) clauses.push_back(f.content);
        const Filter filter = parse_filter(clauses);
        std::size_t top_k = 5;
        if (req.has_file("top_k")) {
          try {
            top_k = std::stoul(req.get_file_value("top_k").content);
          } catch (const std::exception&) {
            throw HttpError{400, "top_k must be a positive integer"};
          }
        }
        const auto matches = run_job([&] { return best_match(store, exp, filter, top_k); });
        json list = json::array();
        int rank = 1;
        for (const auto& m : matches) {
          json e = entry_json(IndexEntry::of(m.record));
          e["rank"] = rank++;
          e["r"] = m.report.r;
          e["slope"] = m.report.slope;
          e["intercept"] = m.report.intercept;
          list.push_back(e);
        }
        reply(res, 200, {{"matches", list}, {"table", compare_table(matches)}});
      });
    });

    server.Post("/v1/dataset/build", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        if (!options.allow_build) throw HttpError{403, "dataset build is disabled"};
        const GridSpec grid = GridSpec::from_config(Config::parse(req.body), options.dataset_root);
        const GenerateReport rep = run_job([&] { return store.generate(grid, 1); });
        reply(res, 200,
              {{"requested", rep.requested},
               {"generated", rep.generated},
               {"skipped", rep.skipped},
               {"failed", rep.failed}});
      });
    });

    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) reply(res, res.status, {{"error", "no such endpoint"}});
    });
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {
  impl_->routes();
}

Service::~Service() { stop(); }

int Service::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool Service::listen() { return impl_->server.listen_after_bind(); }

void Service::stop() { impl_->server.stop(); }

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

bool Service::submit(std::function<void()> job) { return impl_->jobs.try_submit(std::move(job)); }

}  // namespace nvsim::cli
