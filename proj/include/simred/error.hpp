#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace simred {

enum class ErrorCode {
  InvalidArgument,
  InvalidConfig,
  ValidationError,
  TypeMismatch,
  OutOfBounds,
  BarrierDivergence,
  LocalMemOverflow,
  GeometryError,
  ParseError,
  IoError,
  BadRange,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so the
// C layer can map it to a status value without parsing messages.
class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

}  // namespace simred
