// Copyright 2026 The fabk Authors. All Rights Reserved.
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
// =============================================================================

#ifndef FABK_ERROR_H_
#define FABK_ERROR_H_

#include <stdexcept>
#include <string>

namespace fabk {

// Raised when a caller breaks a documented precondition (bad k, index out of
// range, dimension mismatch).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when replicated state that must agree (client weights) diverges.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration, dataset, or I/O problems surfaced to the CLI.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define FABK_REQUIRE(cond, msg)                     \
  do {                                              \
    if (!(cond)) throw ::fabk::ContractViolation(msg); \
  } while (0)

}  // namespace fabk

#endif  // FABK_ERROR_H_
