// Copyright 2026 The creodrift Authors
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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace creodrift {

enum class ErrorCode {
  io,
  format,
  invalid_input,
  empty_corpus,
  empty_vocabulary,
  budget_exceeded,
  unsupported_request,
  incomparable_diagrams,
  undefined_mean,
  generation,
  validation,
};

const char* to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code lets the
/// CLI map failures onto exit statuses without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::size_t budget, double offending_eps);

  std::size_t budget() const noexcept { return budget_; }
  /// Smallest filtration value at which the complex outgrows the budget.
  double offending_eps() const noexcept { return eps_; }

 private:
  std::size_t budget_;
  double eps_;
};

class IncomparableDiagrams : public Error {
 public:
  IncomparableDiagrams(int dim, std::size_t left_infinite, std::size_t right_infinite);

  int dim() const noexcept { return dim_; }
  std::size_t left_infinite() const noexcept { return left_; }
  std::size_t right_infinite() const noexcept { return right_; }

 private:
  int dim_;
  std::size_t left_;
  std::size_t right_;
};

}  // namespace creodrift
