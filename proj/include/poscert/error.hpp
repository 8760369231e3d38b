#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace poscert {

/// Failure categories raised across the library. Each maps to a named error
/// in the module contracts so callers (and the CLI) can report the stage.
enum class ErrorCode {
  DivisionByIntervalContainingZero,
  NegativeSqrt,
  NonPositiveArgument,
  NonSquare,
  DimensionMismatch,
  CoefficientOverflow,
  DegreeOverflow,
  NewtonDivergence,
  SingularJacobian,
  ArgumentOutOfRange,
  UnsupportedDomain,
  RangeBoundTooLoose,
  NonPositiveWeight,
  IndefiniteB,
  VerificationFailure,
  MissingConstant,
  EigenvalueStraddlesOne,
  TailTooShort,
  IncommensurateGeometry,
  UnsupportedNonlinearity,
  NoAdmissibleAlpha,
  OmegaPlusEmpty,
  ContainmentFailure,
  ParseError,
  IoError,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace poscert
