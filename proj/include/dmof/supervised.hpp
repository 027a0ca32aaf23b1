#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmof/core.hpp"

namespace dmof {

// Supervised-learning instance: a finite sample space (encoding input-output
// pairs), hypotheses with a pointwise loss, and candidate sample laws.
struct SlInstance {
  std::size_t n_x = 0;
  std::vector<std::string> hypothesis_labels;
  std::vector<std::vector<double>> pointwise_loss;  // [x][h], values in [0, B]
  std::vector<FiniteDist> model_dists;              // Phi(M) per model
  std::size_t sample_count = 0;                     // N
  double loss_bound = 0.0;                          // B
  std::size_t star = 0;

  std::size_t n_models() const { return model_dists.size(); }
  std::size_t n_hypotheses() const { return hypothesis_labels.size(); }
};

void validate(const SlInstance& inst);

// Expected pointwise loss of hypothesis h under model m's sample law.
double sl_loss(const SlInstance& inst, std::size_t model, std::size_t hypothesis);

std::vector<std::size_t> sample_sl_dataset(const SlInstance& inst, std::size_t n,
                                           std::uint64_t seed);

// Loss matrix sl_loss(m, h); `centered` subtracts each row's minimum, which
// keeps entries in [0, B] and puts a zero in every row.
std::vector<std::vector<double>> sl_loss_matrix(const SlInstance& inst, bool centered);

// EDD over hypotheses with the 4B/N schedule: relative log-likelihoods are
// sum_i log Phi(m)(x_i).
struct SlEddResult {
  PolicyMixture policy;
  double value = 0.0;
  ScoredDmof scored;  // the packaged instance that was solved
};

SlEddResult edd_sl(const SlInstance& inst, const std::vector<std::size_t>& dataset,
                   double eps, bool centered = false);

// Monte Carlo check of the fast supervised-learning bound. Un-centered mode
// verifies both
//   EOEC_{4B/N} <= 3 min_h L(M*, h) + (8B/N) log(|M|/delta)
// and the same bound on EDD's realized loss; centered mode verifies the
// regret bound  L(M*, p) - min_h L(M*, h) <= (8B/N) log(|M|/delta).
MonteCarloReport check_fast_sl(const SlInstance& inst, double delta,
                               std::uint64_t trials, std::uint64_t seed,
                               bool centered, double eps = 1e-9);

struct SlSweepRow {
  std::size_t n = 0;
  std::uint64_t trial = 0;
  double lambda = 0.0;
  double edd_loss = 0.0;  // regret in centered mode, loss otherwise
  double bound = 0.0;
  bool violated = false;
};

struct SlSweepResult {
  std::vector<SlSweepRow> rows;
  std::vector<std::size_t> n_grid;
  std::vector<double> means;
  double slope_full = 0.0;
  double slope_upper_half = 0.0;
  std::uint64_t violations = 0;
};

// Regret-vs-N sweep mirroring the sequential rate experiment.
SlSweepResult sl_sweep(const SlInstance& inst, const std::vector<std::size_t>& n_grid,
                       double delta, std::uint64_t trials, std::uint64_t seed,
                       bool centered = true, double eps = 1e-9, unsigned threads = 1);

}  // namespace dmof
