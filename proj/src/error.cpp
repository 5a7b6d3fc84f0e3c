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

#include "creodrift/error.hpp"

#include <sstream>

namespace creodrift {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::empty_corpus: return "empty-corpus";
    case ErrorCode::empty_vocabulary: return "empty-vocabulary";
    case ErrorCode::budget_exceeded: return "budget-exceeded";
    case ErrorCode::unsupported_request: return "unsupported-request";
    case ErrorCode::incomparable_diagrams: return "incomparable-diagrams";
    case ErrorCode::undefined_mean: return "undefined-mean";
    case ErrorCode::generation: return "generation";
    case ErrorCode::validation: return "validation";
  }
  return "unknown";
}

namespace {

std::string budget_message(std::size_t budget, double eps) {
  std::ostringstream os;
  os << "simplex budget of " << budget << " exceeded at eps=" << eps
     << "; lower max_eps, max_dim or the cloud size";
  return os.str();
}

std::string incomparable_message(int dim, std::size_t l, std::size_t r) {
  std::ostringstream os;
  os << "diagrams are incomparable in dimension " << dim << ": " << l << " vs " << r
     << " infinite bars";
  return os.str();
}

}  // namespace

BudgetExceeded::BudgetExceeded(std::size_t budget, double offending_eps)
    : Error(ErrorCode::budget_exceeded, budget_message(budget, offending_eps)),
      budget_(budget),
      eps_(offending_eps) {}

IncomparableDiagrams::IncomparableDiagrams(int dim, std::size_t left_infinite,
                                           std::size_t right_infinite)
    : Error(ErrorCode::incomparable_diagrams,
            incomparable_message(dim, left_infinite, right_infinite)),
      dim_(dim),
      left_(left_infinite),
      right_(right_infinite) {}

}  // namespace creodrift
