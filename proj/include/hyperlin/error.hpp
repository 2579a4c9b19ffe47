#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hyperlin {

enum class ErrorCode {
  InvalidArgument,
  NonHyperbolic,
  EmptySpectrum,
  NotMixed,
  TargetTooTight,
  KTooSmall,
  HypothesisViolated,
  NonpositiveResult,
  ConditionViolated,
  BandConditionViolated,
  NonpositiveExponent,
  EtaNotAchievable,
  OriginUndefined,
  LeftDomain,
  OutsideBox,
  EtaTooLarge,
  TailTooShort,
  NoConvergence,
  DerivativeMismatch,
  InverseNewtonFailed,
  GraphLeavesBox,
  SlowDecay,
  NewtonFailed,
  LeafIntersectionFailed,
  ConfigError,
};

std::string_view error_name(ErrorCode code);

// Condition failures map to exit code 2, configuration problems to 4,
// everything else is a numerical failure (3).
int exit_code_for(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hyperlin
