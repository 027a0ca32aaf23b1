#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "dmof/divergence.hpp"

namespace dmof {

// Dense payoff matrix of a finite zero-sum game: the column player mixes and
// minimizes, the row player (adversary) maximizes. Entries must be finite;
// rows carrying an infinite divergence offset are removed by callers before
// a matrix is formed.
struct PayoffMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;  // row-major, rows*cols

  double at(std::size_t r, std::size_t c) const { return entries[r * cols + c]; }
  double& at(std::size_t r, std::size_t c) { return entries[r * cols + c]; }

  static PayoffMatrix from_rows(const std::vector<std::vector<double>>& data);
};

// eps-optimal pair with a duality-gap certificate:
//   max_r (row_r . col_mixture) <= value + gap
//   min_c (row_mixture . col_c) >= value - gap
// Both bounds are recomputed from the matrix by independent scans, never
// taken from solver internals.
struct GameSolution {
  FiniteDist col_mixture;
  FiniteDist row_mixture;
  double value = 0.0;
  double gap = 0.0;
};

struct SolveOptions {
  double eps = 1e-9;
  long pivot_cap = 10'000'000;
};

// Certified solve. Exact up to floating point via a dense simplex LP; the
// returned gap is the independently measured duality gap and satisfies
// gap <= eps or the call throws (Timeout when the pivot cap is hit,
// NonFinite for bad entries).
GameSolution solve_zero_sum(const PayoffMatrix& game, double eps);
GameSolution solve_zero_sum(const PayoffMatrix& game, const SolveOptions& options);

// Builds a GameSolution for a given mixture pair by measuring both
// best-response bounds directly on the matrix.
GameSolution certified_from_mixtures(const PayoffMatrix& game, FiniteDist col_mixture,
                                     FiniteDist row_mixture);

// Argmax row against a column mixture; ties break to the smallest index.
std::pair<std::size_t, double> best_response_row(const PayoffMatrix& game,
                                                 const FiniteDist& col_mixture);

// Argmin column against a row mixture; ties break to the smallest index.
std::pair<std::size_t, double> best_response_col(const PayoffMatrix& game,
                                                 const FiniteDist& row_mixture);

struct CertificateCheck {
  double primal_bound = 0.0;  // max_r row . col_mixture
  double dual_bound = 0.0;    // min_c row_mixture . col
  double gap = 0.0;
  bool ok = false;
};

// Re-validates a solution against its matrix by best-response scans.
CertificateCheck validate_certificate(const PayoffMatrix& game,
                                      const GameSolution& solution, double eps);

// Process-wide audit of every certified solve: counts solutions and tracks
// the worst independently re-measured gap. Used by the acceptance suite to
// confirm that all solutions produced along the way were certified.
class CertificationAudit {
 public:
  static CertificationAudit& instance();
  void reset();
  void record(double gap, double eps, bool ok);
  std::uint64_t count() const;
  std::uint64_t failures() const;
  double worst_gap() const;
  double worst_eps() const;

 private:
  CertificationAudit() = default;
};

}  // namespace dmof
