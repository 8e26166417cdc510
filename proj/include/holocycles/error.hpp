#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace holocycles {

enum class ErrorCode {
  InvalidArgument,
  NotComplexHyperbolic,
  DegenerateField,
  SingularEncounter,
  NoConvergence,
  DomainError,
  NoAdmissibleDirection,
  OnSeparatrix,
  GermVanishes,
  ContractionViolated,
  AssemblyError,
  NotClosed,
  TooLarge,
  NotInvariantLine,
  InvariantLine,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotComplexHyperbolic: return "NotComplexHyperbolic";
    case ErrorCode::DegenerateField: return "DegenerateField";
    case ErrorCode::SingularEncounter: return "SingularEncounter";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::NoAdmissibleDirection: return "NoAdmissibleDirection";
    case ErrorCode::OnSeparatrix: return "OnSeparatrix";
    case ErrorCode::GermVanishes: return "GermVanishes";
    case ErrorCode::ContractionViolated: return "ContractionViolated";
    case ErrorCode::AssemblyError: return "AssemblyError";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NotInvariantLine: return "NotInvariantLine";
    case ErrorCode::InvariantLine: return "InvariantLine";
  }
  return "Unknown";
}

/// Exception type for every failure raised by the library. The code is the
/// stable, machine-readable part; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace holocycles
