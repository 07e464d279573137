// Copyright 2026 The pcn Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PCN_ERROR_HPP
#define PCN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pcn {

// Numeric values are shared with the C API status codes.
enum class ErrorCode : int {
  kConfig = 1,
  kData = 2,
  kShape = 3,
  kNumeric = 4,
  kArgument = 5,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Invalid or unknown configuration field. `field()` names the offender.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(ErrorCode::kConfig, field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Missing, truncated or malformed input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCode::kData, what) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(ErrorCode::kShape, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what)
      : Error(ErrorCode::kNumeric, what) {}
};

/// Precondition violated by the caller (clamped layer, bad selector, ...).
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what)
      : Error(ErrorCode::kArgument, what) {}
};

}  // namespace pcn

#endif  // PCN_ERROR_HPP
