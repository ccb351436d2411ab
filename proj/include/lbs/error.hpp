#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lbs {

// Every failure the platform reports. The textual names are part of the wire
// protocol and must not change.
enum class ErrorCode {
  InvalidPhone,
  DuplicatePhone,
  WeakPassword,
  AuthFailed,
  InvalidToken,
  UnknownUser,
  UnknownZone,
  UnknownTag,
  NotCovered,
  Underdetermined,
  DegenerateGeometry,
  NotFound,
  NotAuthorized,
  WrongZone,
  CspUnreachable,
  NoCuForZone,
  PartialResult,
  ConfigError,
  BindError,
  ParseError,
  ZoneMismatch,
  StepFailed,
  InvalidField,
  LspUnreachable,
  InternalError,
};

std::string_view to_string(ErrorCode code) noexcept;
std::optional<ErrorCode> error_code_from_string(std::string_view text) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail = {})
      : std::runtime_error(detail.empty() ? std::string(to_string(code))
                                          : std::string(to_string(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lbs
