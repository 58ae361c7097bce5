// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ttc {

enum class ErrorCode {
  invalid_argument,
  config_invalid,
  backend_unreachable,
  unknown_task,
  unknown_checkpoint,
  analysis_invalid,
  io_failure,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::config_invalid: return "config_invalid";
    case ErrorCode::backend_unreachable: return "backend_unreachable";
    case ErrorCode::unknown_task: return "unknown_task";
    case ErrorCode::unknown_checkpoint: return "unknown_checkpoint";
    case ErrorCode::analysis_invalid: return "analysis_invalid";
    case ErrorCode::io_failure: return "io_failure";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace ttc
