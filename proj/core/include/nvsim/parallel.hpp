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

#ifndef NVSIM_PARALLEL_HPP_
#define NVSIM_PARALLEL_HPP_

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace nvsim {

// NVSIM_WORKERS if set and positive, else the hardware concurrency.
int default_worker_count();

// Calls fn(i) for i in [0, n) on up to `workers` threads (0 = default).
// Rethrows the exception of the lowest failing index after all work ends.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

// Fixed worker pool with a bounded queue; try_submit refuses when full.
class JobQueue {
 public:
  JobQueue(int workers, std::size_t capacity);
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  bool try_submit(std::function<void()> job);
  std::size_t capacity() const { return capacity_; }

 private:
  void run();

  std::size_t capacity_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> jobs_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

}  // namespace nvsim

#endif  // NVSIM_PARALLEL_HPP_
