#include "dmof/common.hpp"

#include <cmath>

#include "dmof/report.hpp"

namespace dmof {

double three_sigma_threshold(double delta, std::uint64_t trials) {
  require(trials >= 1, ErrorCode::InvalidArgument, "three_sigma_threshold: no trials");
  return delta + 3.0 * std::sqrt(delta * (1.0 - delta) / static_cast<double>(trials));
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EnumerationCapExceeded: return "EnumerationCapExceeded";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::MissingStar: return "MissingStar";
    case ErrorCode::AllModelsImpossible: return "AllModelsImpossible";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonPositiveArgument: return "NonPositiveArgument";
    case ErrorCode::NonDecomposableLoss: return "NonDecomposableLoss";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::EmptyGame: return "EmptyGame";
    case ErrorCode::AssertionFailed: return "AssertionFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace dmof
