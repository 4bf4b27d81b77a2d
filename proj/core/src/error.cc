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

#include "lace/error.h"

#include <sstream>

namespace lace {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "invalid_input";
    case ErrorCode::kNotFound:
      return "not_found";
    case ErrorCode::kDuplicate:
      return "duplicate";
    case ErrorCode::kConflict:
      return "conflict";
    case ErrorCode::kInvalidState:
      return "invalid_state";
    case ErrorCode::kEmptyActiveSet:
      return "empty_active_set";
    case ErrorCode::kNonConvergence:
      return "non_convergence";
    case ErrorCode::kLoad:
      return "load_error";
    case ErrorCode::kConfiguration:
      return "configuration_error";
    case ErrorCode::kTransport:
      return "transport_error";
    case ErrorCode::kValidation:
      return "validation_error";
    case ErrorCode::kInternal:
      return "internal";
  }
  return "internal";
}

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
    case ErrorCode::kValidation:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kDuplicate:
    case ErrorCode::kConflict:
    case ErrorCode::kEmptyActiveSet:
      return 409;
    case ErrorCode::kInvalidState:
      return 422;
    case ErrorCode::kTransport:
      return 502;
    case ErrorCode::kConfiguration:
      return 503;
    case ErrorCode::kNonConvergence:
    case ErrorCode::kLoad:
    case ErrorCode::kInternal:
      return 500;
  }
  return 500;
}

namespace {

std::string NonConvergenceMessage(double violation, int iterations) {
  std::ostringstream out;
  out << "sinkhorn did not converge after " << iterations
      << " iterations (marginal violation " << violation << ")";
  return out.str();
}

}  // namespace

NonConvergenceError::NonConvergenceError(double violation, int iterations)
    : Error(ErrorCode::kNonConvergence,
            NonConvergenceMessage(violation, iterations),
            "violation=" + std::to_string(violation)),
      violation_(violation),
      iterations_(iterations) {}

}  // namespace lace
