#ifndef RSCEV_ERROR_HPP
#define RSCEV_ERROR_HPP

#include <stdexcept>
#include <string>
#include <string_view>

namespace rscev {

enum class ErrorCode {
  NotSquare,
  NegativeOffDiagonal,
  RowSumViolation,
  NotIrreducible,
  AlphaOutOfRange,
  FellerViolation,
  SignViolation,
  DimensionMismatch,
  DegenerateBeta,
  BranchMismatch,
  NonFiniteResult,
  ParametersNotIdentical,
  DegenerateSpectrum,
  DivisionByZero,
  MomentOrderNotInteger,
  BranchUnsupported,
  InvalidArgument,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NegativeOffDiagonal: return "NegativeOffDiagonal";
    case ErrorCode::RowSumViolation: return "RowSumViolation";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::AlphaOutOfRange: return "AlphaOutOfRange";
    case ErrorCode::FellerViolation: return "FellerViolation";
    case ErrorCode::SignViolation: return "SignViolation";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateBeta: return "DegenerateBeta";
    case ErrorCode::BranchMismatch: return "BranchMismatch";
    case ErrorCode::NonFiniteResult: return "NonFiniteResult";
    case ErrorCode::ParametersNotIdentical: return "ParametersNotIdentical";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::MomentOrderNotInteger: return "MomentOrderNotInteger";
    case ErrorCode::BranchUnsupported: return "BranchUnsupported";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rscev

#endif  // RSCEV_ERROR_HPP
