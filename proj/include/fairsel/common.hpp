// Copyright 2026 The fairsel Authors
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

#ifndef FAIRSEL_COMMON_HPP_
#define FAIRSEL_COMMON_HPP_

#include <stdexcept>
#include <string>

namespace fairsel {

// Zero comparisons on derivative values in optimality conditions.
inline constexpr double kDerivTol = 1e-12;
// Probability mass bookkeeping (sums, residuals).
inline constexpr double kMassTol = 1e-9;
// Ingest-time renormalization window; beyond this the data is rejected.
inline constexpr double kIngestTol = 1e-6;
// Outcome-regime classification.
inline constexpr double kRegimeTol = 1e-10;

// Bad data or configuration. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A solver was invoked outside its hypotheses. The CLI maps this to exit code 3.
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fairsel

#endif  // FAIRSEL_COMMON_HPP_
