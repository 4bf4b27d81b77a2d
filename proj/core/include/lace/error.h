/*
 * Copyright 2026 The LACE Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LACE_ERROR_H_
#define LACE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace lace {

enum class ErrorCode {
  kInvalidInput,
  kNotFound,
  kDuplicate,
  kConflict,
  kInvalidState,
  kEmptyActiveSet,
  kNonConvergence,
  kLoad,
  kConfiguration,
  kTransport,
  kValidation,
  kInternal,
};

// Stable snake_case name used in HTTP error bodies and CLI output.
std::string_view ErrorCodeName(ErrorCode code);

// HTTP status an error code maps to when surfaced by the service.
int HttpStatusFor(ErrorCode code);

// All failures raised by the library carry a machine-readable code, a
// human-readable message and an optional free-form detail string.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message, std::string detail = {})
      : std::runtime_error(std::move(message)),
        code_(code),
        detail_(std::move(detail)) {}

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// Raised when Sinkhorn exhausts its iteration budget.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(double violation, int iterations);

  double violation() const { return violation_; }
  int iterations() const { return iterations_; }

 private:
  double violation_;
  int iterations_;
};

}  // namespace lace

#endif  // LACE_ERROR_H_
