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

#ifndef NVSIM_CLI_SERVICE_HPP_
#define NVSIM_CLI_SERVICE_HPP_

#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>

namespace nvsim::cli {

struct ServiceOptions {
  std::filesystem::path dataset_root;
  int job_workers = 0;            // 0 = NVSIM_WORKERS or hardware concurrency
  std::size_t queue_capacity = 16;
  std::size_t max_tau_points = 512;
  int max_order = 16;
  bool allow_build = false;
};

// JSON-over-HTTP front end under /v1:
//   GET  /v1/health
//   GET  /v1/records?field=value&where=<clause>...
//   GET  /v1/records/{id}/trace
//   POST /v1/simulate          JSON body of request keys
//   POST /v1/compare           multipart: experimental (CSV), where, top_k
//   POST /v1/dataset/build     grid config text, only with allow_build
class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Returns the bound port, or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();
  void wait_until_ready() const;

  // Runs `job` on the simulation queue; false when the queue is full.
  bool submit(std::function<void()> job);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nvsim::cli

#endif  // NVSIM_CLI_SERVICE_HPP_
