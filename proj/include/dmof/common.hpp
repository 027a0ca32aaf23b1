#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace dmof {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Absolute tolerance used when deciding whether a weight vector is already
// normalized.
inline constexpr double kNormTol = 1e-12;

// Default cap on exhaustive enumerations (product distributions, trajectory
// spaces, deterministic policy/kernel listings).
inline constexpr std::size_t kEnumerationCap = 1'000'000;

enum class ErrorCode {
  Empty,
  NegativeWeight,
  ZeroMass,
  LengthMismatch,
  EnumerationCapExceeded,
  NonFinite,
  Timeout,
  MissingStar,
  AllModelsImpossible,
  IndexOutOfRange,
  NonPositiveArgument,
  NonDecomposableLoss,
  RangeViolation,
  EmptyGrid,
  EmptyGame,
  AssertionFailed,
  InvalidArgument,
  ParseError,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) fail(code, message);
}

const char* error_code_name(ErrorCode code);

}  // namespace dmof
