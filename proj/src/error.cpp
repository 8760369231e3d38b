#include "poscert/error.hpp"

namespace poscert {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DivisionByIntervalContainingZero: return "DivisionByIntervalContainingZero";
    case ErrorCode::NegativeSqrt: return "NegativeSqrt";
    case ErrorCode::NonPositiveArgument: return "NonPositiveArgument";
    case ErrorCode::NonSquare: return "NonSquare";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::CoefficientOverflow: return "CoefficientOverflow";
    case ErrorCode::DegreeOverflow: return "DegreeOverflow";
    case ErrorCode::NewtonDivergence: return "NewtonDivergence";
    case ErrorCode::SingularJacobian: return "SingularJacobian";
    case ErrorCode::ArgumentOutOfRange: return "ArgumentOutOfRange";
    case ErrorCode::UnsupportedDomain: return "UnsupportedDomain";
    case ErrorCode::RangeBoundTooLoose: return "RangeBoundTooLoose";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::IndefiniteB: return "IndefiniteB";
    case ErrorCode::VerificationFailure: return "VerificationFailure";
    case ErrorCode::MissingConstant: return "MissingConstant";
    case ErrorCode::EigenvalueStraddlesOne: return "EigenvalueStraddlesOne";
    case ErrorCode::TailTooShort: return "TailTooShort";
    case ErrorCode::IncommensurateGeometry: return "IncommensurateGeometry";
    case ErrorCode::UnsupportedNonlinearity: return "UnsupportedNonlinearity";
    case ErrorCode::NoAdmissibleAlpha: return "NoAdmissibleAlpha";
    case ErrorCode::OmegaPlusEmpty: return "OmegaPlusEmpty";
    case ErrorCode::ContainmentFailure: return "ContainmentFailure";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace poscert
