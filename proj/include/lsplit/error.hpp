#pragma once

#include <stdexcept>
#include <string>

namespace lsplit {

enum class ErrorCode {
  InvalidArgument,
  Io,
  DimensionMismatch,
  EmptyInput,
  Format,
  ShapeMismatch,
  SolverFailure,
  Internal,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code alongside the message. The
/// optional subject names the file, key or pixel the error is about.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string subject = {})
      : std::runtime_error(message), code_(code), subject_(std::move(subject)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& subject() const noexcept { return subject_; }

 private:
  ErrorCode code_;
  std::string subject_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message,
                              std::string subject = {}) {
  throw Error(code, message, std::move(subject));
}

}  // namespace lsplit
