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

#ifndef NVSIM_VERSION_HPP_
#define NVSIM_VERSION_HPP_

#include <string_view>

namespace nvsim {

#ifndef NVSIM_VERSION
#define NVSIM_VERSION "0.0.0"
#endif

inline constexpr std::string_view kEngineVersion = NVSIM_VERSION;

}  // namespace nvsim

#endif  // NVSIM_VERSION_HPP_
