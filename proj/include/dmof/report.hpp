#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace dmof {

// Deterministic inequality check: asserts lhs <= rhs + tolerance.
struct CheckReport {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;  // JSON fragment with inputs digest / failing instance

  double slack() const { return rhs + tolerance - lhs; }
};

// Aggregate over a seeded corpus of deterministic checks.
struct CorpusReport {
  std::string name;
  std::uint64_t cases = 0;
  std::uint64_t violations = 0;
  double worst_slack = 0.0;  // min over cases of (rhs + tol - lhs)
  double worst_ratio = 0.0;  // max observed lhs/rhs, loose-constant visibility
  std::uint64_t digest = 0;
  bool pass() const { return violations == 0; }
};

// "With probability >= 1 - delta" checks: per-trial violations counted
// against delta plus a two-sided three-sigma binomial slack.
struct MonteCarloReport {
  std::string name;
  std::uint64_t trials = 0;
  std::uint64_t violations = 0;
  double delta = 0.0;
  double threshold = 0.0;  // delta + 3 sqrt(delta (1-delta) / trials)
  double worst_slack = 0.0;
  std::uint64_t digest = 0;
  bool pass = false;

  double frequency() const {
    return trials == 0 ? 0.0 : static_cast<double>(violations) / trials;
  }
};

double three_sigma_threshold(double delta, std::uint64_t trials);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace dmof
