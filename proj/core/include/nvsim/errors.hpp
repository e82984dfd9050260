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

#ifndef NVSIM_ERRORS_HPP_
#define NVSIM_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nvsim {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpinError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Parse or validation failure in a config file. `line` is 1-based, 0 when
// the problem is not tied to a line.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, std::size_t line = 0)
      : Error(line == 0 ? message
                        : "line " + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Eigenstates could not be assigned to bare spin manifolds.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

class PropagationError : public Error {
 public:
  using Error::Error;
};

// Pulse sequence does not fit in the requested spacing.
class GeometryError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

// Sample grid unusable for the requested analysis.
class GridError : public Error {
 public:
  using Error::Error;
};

// Correlation of a constant series.
class CorrelationError : public Error {
 public:
  using Error::Error;
};

class QueryError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// Parameter outside the bounds accepted by a bounded entry point.
class BoundsError : public Error {
 public:
  using Error::Error;
};

// Failure at one point of a sweep; wraps the original message.
class SweepPointError : public Error {
 public:
  SweepPointError(std::size_t index, const std::string& message)
      : Error("point " + std::to_string(index) + ": " + message),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace nvsim

#endif  // NVSIM_ERRORS_HPP_
