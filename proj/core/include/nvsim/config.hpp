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

#ifndef NVSIM_CONFIG_HPP_
#define NVSIM_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nvsim {

// Flat `key = value` document. Lines starting with '#' are comments.
// Every lookup failure reports the line of the offending entry.
class Config {
 public:
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  std::size_t line(std::string_view key) const;
  std::vector<std::string> keys() const;

  const std::string& get_string(std::string_view key) const;
  std::string get_string(std::string_view key, std::string_view fallback) const;
  double get_double(std::string_view key) const;
  double get_double(std::string_view key, double fallback) const;
  long long get_int(std::string_view key) const;
  long long get_int(std::string_view key, long long fallback) const;
  std::uint64_t get_uint64(std::string_view key, std::uint64_t fallback) const;
  // Whitespace- or comma-separated numbers.
  std::vector<double> get_doubles(std::string_view key) const;
  std::vector<std::string> get_strings(std::string_view key) const;

  void set(std::string key, std::string value);

  // Copy holding only the entries whose key satisfies `keep`.
  Config filtered(const std::function<bool(std::string_view)>& keep) const;

  // Throws ConfigError on the first key outside `allowed`.
  void require_known(std::initializer_list<std::string_view> allowed) const;

 private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  const Entry& entry(std::string_view key) const;
  std::map<std::string, Entry, std::less<>> entries_;
};

// Shortest round-trip text for a double.
std::string format_double(double v);
double parse_double(std::string_view text);

}  // namespace nvsim

#endif  // NVSIM_CONFIG_HPP_
