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

#include "nvsim/io.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "nvsim/config.hpp"
#include "nvsim/errors.hpp"
#include "text.hpp"

namespace nvsim {

SweepTrace parse_trace_csv(std::string_view text, TraceKind kind) {
  SweepTrace t;
  t.kind = kind;
  bool header_seen = false;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    const std::string_view line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw ConfigError("expected two comma-separated columns", line_no);
    }
    const std::string_view a = detail::trim(line.substr(0, comma));
    const std::string_view b = detail::trim(line.substr(comma + 1));
    if (!header_seen) {
      header_seen = true;
      if (a != "tau_us" && a != "t_us") {
        throw ConfigError("first column must be tau_us or t_us", line_no);
      }
      t.metadata["x_column"] = std::string(a);
      t.metadata["y_column"] = std::string(b);
      continue;
    }
    try {
      t.x.push_back(parse_double(a));
      t.p.push_back(parse_double(b));
    } catch (const ConfigError&) {
      throw ConfigError("malformed numeric row", line_no);
    }
    if (!std::isfinite(t.x.back()) || !std::isfinite(t.p.back())) {
      throw ConfigError("non-finite value", line_no);
    }
    if (t.x.size() > 1 && !(t.x.back() > t.x[t.x.size() - 2])) {
      throw ConfigError("x is not strictly increasing", line_no);
    }
  }
  if (!header_seen) throw ConfigError("missing header row");
  if (t.x.size() < 8) throw ConfigError("a trace needs at least 8 rows");
  return t;
}

SweepTrace read_trace_csv(const std::filesystem::path& path, TraceKind kind) {
  try {
    return parse_trace_csv(read_file(path), kind);
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what(), e.line());
  }
}

std::string trace_to_csv(const SweepTrace& trace, std::string_view x_name,
                         std::string_view y_name) {
  std::string out;
  out.reserve(trace.x.size() * 40);
  out.append(x_name).append(",").append(y_name).append("\n");
  for (std::size_t i = 0; i < trace.x.size(); ++i) {
    out += format_double(trace.x[i]);
    out += ',';
    out += format_double(trace.p[i]);
    out += '\n';
  }
  return out;
}

std::string metadata_to_text(const std::map<std::string, std::string>& metadata) {
  std::string out;
  for (const auto& [k, v] : metadata) out += k + " = " + v + "\n";
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  static std::atomic<unsigned long long> counter{0};
  std::ostringstream suffix;
  suffix << ".tmp." << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.'
         << counter++;
  const std::filesystem::path tmp = path.string() + suffix.str();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace nvsim
