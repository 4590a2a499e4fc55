#pragma once

#include <stdexcept>
#include <string>

namespace fvdd {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  DistortionTooLarge,
  EdgeStraddlesSegments,
  DegenerateDiamond,
  NotStarShaped,
  SingularMatrix,
  SingularCellBlock,
  StepFloorReached,
  NonPositiveInitialData,
  NonPositiveIterate,
  NewtonFailure,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library; the code tells callers what failed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fvdd
