#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace accessgraph {

enum class ErrorCode {
  InvalidArgument,
  EmptyScene,
  EmptyWalkableSet,
  DuplicateEdge,
  InvalidStart,
  MissingAttribute,
  ChildlessVertex,
  NonPositiveEdgeCost,
  NotFound,
  AlreadyExists,
  ParseError,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyScene: return "EmptyScene";
    case ErrorCode::EmptyWalkableSet: return "EmptyWalkableSet";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::InvalidStart: return "InvalidStart";
    case ErrorCode::MissingAttribute: return "MissingAttribute";
    case ErrorCode::ChildlessVertex: return "ChildlessVertex";
    case ErrorCode::NonPositiveEdgeCost: return "NonPositiveEdgeCost";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::AlreadyExists: return "AlreadyExists";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Every recoverable failure in the library is reported as an Error carrying
/// a machine-readable code; the CLI and the HTTP service map codes to exit
/// codes and status codes respectively.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

} // namespace accessgraph
