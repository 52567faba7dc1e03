#include "rewind/error.hpp"

namespace timetravel {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::not_found: return "not-found";
    case ErrorCode::duplicate: return "duplicate";
    case ErrorCode::unknown_recipient: return "unknown-recipient";
    case ErrorCode::not_paused: return "not-paused";
    case ErrorCode::empty_queue: return "empty-queue";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::roster_mismatch: return "roster-mismatch";
    case ErrorCode::schema_violation: return "schema-violation";
    case ErrorCode::edit_locality: return "edit-locality";
    case ErrorCode::faulted: return "faulted";
    case ErrorCode::checkpoint_failure: return "checkpoint-failure";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::version_mismatch: return "version-mismatch";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

}  // namespace timetravel
