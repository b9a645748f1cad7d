#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lecturedeck {

/// Machine-readable failure categories shared by the library, the HTTP API
/// and the CLI error JSON.
enum class ErrorCode {
  InvalidInput,
  Io,
  Format,
  Transport,
  Consistency,
  Conflict,
  NotFound,
  CorruptStore,
  Bind,
  Usage,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lecturedeck
