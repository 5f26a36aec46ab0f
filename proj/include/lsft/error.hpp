// Copyright 2026 The lsft Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace lsft {

/// Failure categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  Validation = 2,
  Budget = 3,
  Numerical = 4,
};

inline const char *to_string(ErrorKind kind) {
  switch (kind) {
  case ErrorKind::Validation:
    return "validation";
  case ErrorKind::Budget:
    return "budget";
  case ErrorKind::Numerical:
    return "numerical";
  }
  return "unknown";
}

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string &what)
      : Error(ErrorKind::Validation, what) {}
};

/// Raised when a request would exceed the configured amplitude budget.
class BudgetError : public Error {
public:
  BudgetError(const std::string &what, double required_bytes)
      : Error(ErrorKind::Budget, what), required_bytes_(required_bytes) {}

  double required_bytes() const noexcept { return required_bytes_; }

private:
  double required_bytes_;
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string &what)
      : Error(ErrorKind::Numerical, what) {}
};

namespace detail {
inline void require(bool condition, const std::string &message) {
  if (!condition) {
    throw ValidationError(message);
  }
}
} // namespace detail

} // namespace lsft
