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

#include "nvsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "nvsim/errors.hpp"
#include "text.hpp"

namespace nvsim {
namespace {

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

double parse_double(std::string_view text) {
  text = detail::trim(text);
  double v = 0.0;
  const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
  if (r.ec != std::errc() || r.ptr != text.data() + text.size()) {
    throw ConfigError("not a number: '" + std::string(text) + "'");
  }
  return v;
}

Config Config::parse(std::string_view text) {
  Config cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("expected 'key = value'", line_no);
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (cfg.entries_.count(key) != 0) {
      throw ConfigError("duplicate key '" + key + "'", line_no);
    }
    cfg.entries_.emplace(key, Entry{value, line_no});
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

bool Config::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

std::size_t Config::line(std::string_view key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? 0 : it->second.line;
}

std::vector<std::string> Config::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_) out.push_back(k);
  return out;
}

const Config::Entry& Config::entry(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing key '" + std::string(key) + "'");
  return it->second;
}

const std::string& Config::get_string(std::string_view key) const { return entry(key).value; }

std::string Config::get_string(std::string_view key, std::string_view fallback) const {
  return has(key) ? entry(key).value : std::string(fallback);
}

double Config::get_double(std::string_view key) const {
  const Entry& e = entry(key);
  try {
    return parse_double(e.value);
  } catch (const ConfigError&) {
    throw ConfigError("'" + std::string(key) + "' is not a number", e.line);
  }
}

double Config::get_double(std::string_view key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long Config::get_int(std::string_view key) const {
  const Entry& e = entry(key);
  long long v = 0;
  const auto r = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (r.ec != std::errc() || r.ptr != e.value.data() + e.value.size()) {
    throw ConfigError("'" + std::string(key) + "' is not an integer", e.line);
  }
  return v;
}

long long Config::get_int(std::string_view key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_uint64(std::string_view key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const Entry& e = entry(key);
  std::uint64_t v = 0;
  const auto r = std::from_chars(e.value.data(), e.value.data() + e.value.size(), v);
  if (r.ec != std::errc() || r.ptr != e.value.data() + e.value.size()) {
    throw ConfigError("'" + std::string(key) + "' is not an unsigned integer", e.line);
  }
  return v;
}

std::vector<double> Config::get_doubles(std::string_view key) const {
  const Entry& e = entry(key);
  std::vector<double> out;
  for (const auto& tok : split_list(e.value)) {
    try {
      out.push_back(parse_double(tok));
    } catch (const ConfigError&) {
      throw ConfigError("'" + std::string(key) + "' has a non-numeric item '" + tok + "'",
                        e.line);
    }
  }
  return out;
}

std::vector<std::string> Config::get_strings(std::string_view key) const {
  return split_list(entry(key).value);
}

void Config::set(std::string key, std::string value) {
  entries_[std::move(key)] = Entry{std::move(value), 0};
}

Config Config::filtered(const std::function<bool(std::string_view)>& keep) const {
  Config out;
  for (const auto& [k, e] : entries_) {
    if (keep(k)) out.entries_.emplace(k, e);
  }
  return out;
}

void Config::require_known(std::initializer_list<std::string_view> allowed) const {
  for (const auto& [k, e] : entries_) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      throw ConfigError("unknown key '" + k + "'", e.line);
    }
  }
}

}  // namespace nvsim
