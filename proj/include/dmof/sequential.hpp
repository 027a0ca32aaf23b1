#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "dmof/core.hpp"

namespace dmof {

// Markov policy: per step, per state, a distribution over that step's actions.
struct MarkovPolicy {
  std::vector<std::vector<FiniteDist>> action_dists;  // [h][s]
};

// Trajectory as the (s_h, a_h) pairs, one per step.
using Trajectory = std::vector<std::pair<std::size_t, std::size_t>>;

// Loss of a whole trajectory under a given policy index; values in [0, B].
using EpisodicLoss = std::function<double(const Trajectory&, std::size_t)>;

// Horizon-indexed tabular sequential problem. All models share the initial
// distribution, the rewards and the policy list; only transition kernels
// differ across models, so likelihood ratios depend on transitions alone.
struct TabularMsp {
  std::size_t horizon = 0;                  // H
  std::vector<std::size_t> state_sizes;     // length H+1 (last: terminal space)
  std::vector<std::size_t> action_sizes;    // length H
  FiniteDist init_dist;                     // over S_1
  std::vector<std::vector<std::vector<double>>> rewards;  // [h][s][a]
  // kernels[m][h][s * A_h + a] is the next-state law at step h under model m.
  std::vector<std::vector<std::vector<FiniteDist>>> kernels;
  std::vector<MarkovPolicy> policies;
  double loss_bound = 0.0;  // B, bounds returns and episodic losses
  std::size_t star = 0;
  // When set, replaces the default episodic loss B - return. Evaluation then
  // goes through exact forward enumeration of the trajectory space.
  EpisodicLoss episodic_loss;
  bool range_suspect = false;  // set by sampled range validation, never fatal

  std::size_t n_models() const { return kernels.size(); }
  std::size_t n_policies() const { return policies.size(); }
  const FiniteDist& kernel(std::size_t m, std::size_t h, std::size_t s,
                           std::size_t a) const {
    return kernels[m][h][s * action_sizes[h] + a];
  }
};

// Validates shapes and verifies the loss range: exactly (via min/max dynamic
// programming over returns) for the default loss, by enumeration or sampling
// for a custom episodic loss. A sampled check only flags range_suspect.
void validate(TabularMsp& msp, std::uint64_t cap = kEnumerationCap);

struct BehaviorSpec {
  enum class Mode { Trajectory, Independent };
  Mode mode = Mode::Trajectory;
  std::optional<std::size_t> policy_index;   // trajectory mode, index form
  std::optional<MarkovPolicy> policy;        // trajectory mode, explicit form
  std::vector<FiniteDist> margins;           // independent mode, per h over S_h x A_h

  static BehaviorSpec trajectory(std::size_t policy_index);
  static BehaviorSpec trajectory(MarkovPolicy policy);
  static BehaviorSpec independent(std::vector<FiniteDist> margins);
};

struct TrajectoryDataset {
  std::size_t n_sequences = 0;
  std::size_t horizon = 0;
  // Indexed [n * horizon + h].
  std::vector<std::uint32_t> states, actions, next_states;
};

// Expected cumulative reward of a policy under one model (exact backward DP).
double evaluate_policy(const TabularMsp& msp, std::size_t model,
                       const MarkovPolicy& policy);
double evaluate_policy(const TabularMsp& msp, std::size_t model,
                       std::size_t policy_index);

// Optimal return and a deterministic optimal Markov policy (ties to the
// lowest action index).
std::pair<double, MarkovPolicy> optimal_value(const TabularMsp& msp,
                                              std::size_t model);

// Suboptimality loss J*_m - J_m(pi), the decision loss for offline RL.
double rl_loss(const TabularMsp& msp, std::size_t model, std::size_t policy_index);

// Expected episodic loss E ell(trajectory, policy). Defaults to B - return
// (exact DP); custom losses are evaluated by exact forward enumeration.
double expected_episodic_loss(const TabularMsp& msp, std::size_t model,
                              std::size_t policy_index,
                              std::uint64_t cap = kEnumerationCap);

// Exact per-step margins of (s_h, a_h) under (model, policy).
std::vector<FiniteDist> occupancy(const TabularMsp& msp, std::size_t model,
                                  const MarkovPolicy& policy);

// The per-step data margins d_h: occupancy of the behavior policy under the
// real model in trajectory mode, the explicit margins otherwise.
std::vector<FiniteDist> behavior_margins(const TabularMsp& msp,
                                         const BehaviorSpec& spec);

// max_h sup-norm of occupancy(star, pi_bar) / d_h; +infinity when the data
// misses a visited cell.
double coverage_coefficient(const TabularMsp& msp, std::size_t pi_bar,
                            const BehaviorSpec& spec);

TrajectoryDataset sample_dataset(const TabularMsp& msp, const BehaviorSpec& spec,
                                 std::size_t n, std::uint64_t seed);

// Sum over dataset triples of log P(s' | m, h, s, a); -infinity when the
// model assigns an observed transition probability zero.
double rel_log_likelihood(const TabularMsp& msp, std::size_t model,
                          const TrajectoryDataset& data);

// Packages the instance for EDD: loss matrix rl_loss(m, pi), relative
// log-likelihoods of `data`, star index.
ScoredDmof build_scored_dmof(const TabularMsp& msp, const TrajectoryDataset& data);

// Loss matrix |M| x |grid| for return estimation: |J_m(pi_eval) - r| clipped
// to [0, B].
std::vector<std::vector<double>> ope_loss(const TabularMsp& msp,
                                          std::size_t pi_eval,
                                          const std::vector<double>& value_grid);

// Asserts the trajectory-level change of measure
//   L(m, pi) <= 3 L(m', pi) + 4 B 100 log(2H) E_{T(m,pi)}[sum_h H2(kernels)].
CheckReport check_refined_simulation(const TabularMsp& msp, std::size_t m,
                                     std::size_t m_prime, std::size_t policy_index);

struct RateRow {
  std::size_t n = 0;
  std::uint64_t trial = 0;
  double lambda = 0.0;
  double edd_loss = 0.0;
  double bound = 0.0;
  bool violated = false;
};

struct RateSummaryRow {
  std::size_t n = 0;
  double mean = 0.0;
  double q10 = 0.0, q50 = 0.0, q90 = 0.0;
  std::uint64_t violations = 0;
};

struct RateSweepResult {
  std::vector<RateRow> rows;
  std::vector<RateSummaryRow> summary;
  double slope_full = 0.0;        // log mean loss vs log N, all grid points
  double slope_upper_half = 0.0;  // same fit over the upper half of the grid
  double coverage = 0.0;
  std::uint64_t violations = 0;
};

// Fast-rate experiment: for each N and trial, sample a dataset, run EDD with
// the 400 B C log(2H) / N schedule and record the realized loss against the
// 3 L(M*, pi_bar) + (1200 B C log(2H) / N) log(3 H |M| / delta) bound.
RateSweepResult rate_sweep(const TabularMsp& msp, const BehaviorSpec& spec,
                           std::size_t pi_bar, const std::vector<std::size_t>& n_grid,
                           double delta, std::uint64_t trials, std::uint64_t seed,
                           double eps = 1e-9, unsigned threads = 1);

// Every deterministic Markov policy of the given shape, in mixed-radix order.
std::vector<MarkovPolicy> all_deterministic_policies(
    const std::vector<std::size_t>& state_sizes,
    const std::vector<std::size_t>& action_sizes, std::size_t cap = kEnumerationCap);

// Least-squares slope of log(y) vs log(x); y values are floored at 1e-300.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dmof
