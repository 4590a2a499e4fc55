#include "fvdd/error.hpp"

namespace fvdd {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DistortionTooLarge: return "DistortionTooLarge";
    case ErrorCode::EdgeStraddlesSegments: return "EdgeStraddlesSegments";
    case ErrorCode::DegenerateDiamond: return "DegenerateDiamond";
    case ErrorCode::NotStarShaped: return "NotStarShaped";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::SingularCellBlock: return "SingularCellBlock";
    case ErrorCode::StepFloorReached: return "StepFloorReached";
    case ErrorCode::NonPositiveInitialData: return "NonPositiveInitialData";
    case ErrorCode::NonPositiveIterate: return "NonPositiveIterate";
    case ErrorCode::NewtonFailure: return "NewtonFailure";
  }
  return "Unknown";
}

}  // namespace fvdd
