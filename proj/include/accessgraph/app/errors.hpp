#pragma once

#include <accessgraph/error.hpp>

#include <nlohmann/json.hpp>

#include <string>

namespace accessgraph::app {

/// CLI exit code: 1 for errors the caller can fix, 2 for internal failures.
inline int exit_code_for(ErrorCode code) { return code == ErrorCode::Io ? 2 : 1; }

inline int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ParseError: return 400;
    case ErrorCode::NotFound: return 404;
    case ErrorCode::AlreadyExists: return 409;
    case ErrorCode::InvalidStart:
    case ErrorCode::EmptyScene:
    case ErrorCode::EmptyWalkableSet:
    case ErrorCode::NonPositiveEdgeCost:
    case ErrorCode::MissingAttribute:
    case ErrorCode::ChildlessVertex:
    case ErrorCode::DuplicateEdge: return 422;
    case ErrorCode::Io: return 500;
  }
  return 500;
}

/// {"error": {"code": ..., "message": ...}}, the body of every failure.
inline nlohmann::json error_json(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

inline nlohmann::json error_json(const Error& e) { return error_json(std::string(to_string(e.code())), e.what()); }

} // namespace accessgraph::app
