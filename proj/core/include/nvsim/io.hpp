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

#ifndef NVSIM_IO_HPP_
#define NVSIM_IO_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "nvsim/analysis.hpp"

namespace nvsim {

// Two-column CSV with a header row; '#' lines are comments. Errors carry the
// 1-based line number.
SweepTrace parse_trace_csv(std::string_view text, TraceKind kind = TraceKind::kExperimental);
SweepTrace read_trace_csv(const std::filesystem::path& path,
                          TraceKind kind = TraceKind::kExperimental);

std::string trace_to_csv(const SweepTrace& trace, std::string_view x_name = "tau_us",
                         std::string_view y_name = "p");

// Sorted `key = value` lines.
std::string metadata_to_text(const std::map<std::string, std::string>& metadata);

// Creates missing parent directories, writes a sibling temporary file and
// renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace nvsim

#endif  // NVSIM_IO_HPP_
