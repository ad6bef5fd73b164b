// Copyright 2026 The edgescale Authors
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

#include <cstdint>
#include <stdexcept>
#include <string>

namespace edgescale {

/// A caller broke a documented precondition (invalid state, infeasible action).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integer or floating-point result does not fit its representation.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Enumeration refused: the exact state count exceeds the configured limit.
/// A count of UINT64_MAX stands for "does not fit in 64 bits".
class StateSpaceTooLarge : public std::runtime_error {
 public:
  StateSpaceTooLarge(std::uint64_t count, std::uint64_t limit)
      : std::runtime_error("state space too large: " +
                           (count == UINT64_MAX ? std::string("more than 2^64") : std::to_string(count)) +
                           " states exceeds limit " + std::to_string(limit)),
        count_(count),
        limit_(limit) {}

  std::uint64_t count() const noexcept { return count_; }
  std::uint64_t limit() const noexcept { return limit_; }

 private:
  std::uint64_t count_;
  std::uint64_t limit_;
};

/// An iterative method hit its iteration cap before reaching tolerance.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, double last_residual)
      : std::runtime_error(what + " (last residual " +
                           std::to_string(last_residual) + ")"),
        last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

}  // namespace edgescale
