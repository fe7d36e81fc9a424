#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace yamabe {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveWarp,
  PoleClosureViolated,
  GridMismatch,
  NonPositiveTestFunction,
  SolverDiverged,
  IndefiniteOperator,
  ParameterBlowup,
  CFLViolated,
  NeckpinchDetected,
  InsufficientSnapshots,
  NormalizationViolated,
  GridTooCoarse,
  Inapplicable,
  NotHomogeneous,
  ChartDegenerate,
  Config,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveWarp: return "NonPositiveWarp";
    case ErrorCode::PoleClosureViolated: return "PoleClosureViolated";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NonPositiveTestFunction: return "NonPositiveTestFunction";
    case ErrorCode::SolverDiverged: return "SolverDiverged";
    case ErrorCode::IndefiniteOperator: return "IndefiniteOperator";
    case ErrorCode::ParameterBlowup: return "ParameterBlowup";
    case ErrorCode::CFLViolated: return "CFLViolated";
    case ErrorCode::NeckpinchDetected: return "NeckpinchDetected";
    case ErrorCode::InsufficientSnapshots: return "InsufficientSnapshots";
    case ErrorCode::NormalizationViolated: return "NormalizationViolated";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::Inapplicable: return "Inapplicable";
    case ErrorCode::NotHomogeneous: return "NotHomogeneous";
    case ErrorCode::ChartDegenerate: return "ChartDegenerate";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Library-wide exception. The code drives CLI exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& message() const noexcept { return message_; }

  /// Failures of the numerics (as opposed to bad input or configuration).
  bool is_numerical() const noexcept {
    switch (code_) {
      case ErrorCode::SolverDiverged:
      case ErrorCode::IndefiniteOperator:
      case ErrorCode::ParameterBlowup:
      case ErrorCode::CFLViolated:
      case ErrorCode::NeckpinchDetected:
      case ErrorCode::GridTooCoarse:
      case ErrorCode::NormalizationViolated:
      case ErrorCode::NonPositiveWarp:
        return true;
      default:
        return false;
    }
  }

 private:
  ErrorCode code_;
  std::string message_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace yamabe
