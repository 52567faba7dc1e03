#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace timetravel {

enum class ErrorCode {
  invalid_argument,
  not_found,
  duplicate,
  unknown_recipient,
  not_paused,
  empty_queue,
  conflict,
  roster_mismatch,
  schema_violation,
  edit_locality,
  faulted,
  checkpoint_failure,
  parse_error,
  version_mismatch,
  internal,
};

std::string_view to_string(ErrorCode code);

/// Failure raised by every module. `detail` carries structured context
/// (offending keys, missing agents, ...) that the service forwards verbatim.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, nlohmann::json detail = nlohmann::json::object())
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const nlohmann::json& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  nlohmann::json detail_;
};

}  // namespace timetravel
