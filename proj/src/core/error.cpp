#include "simred/error.hpp"

namespace simred {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::BarrierDivergence: return "BarrierDivergence";
    case ErrorCode::LocalMemOverflow: return "LocalMemOverflow";
    case ErrorCode::GeometryError: return "GeometryError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BadRange: return "BadRange";
  }
  return "Unknown";
}

void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(to_string(code)) + ": " + message);
}

}  // namespace simred
