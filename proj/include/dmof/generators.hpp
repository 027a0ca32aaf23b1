#pragma once

#include <cstdint>

#include "dmof/core.hpp"
#include "dmof/sequential.hpp"
#include "dmof/supervised.hpp"

namespace dmof {

enum class ObsStyle {
  Dirichlet,   // flat-Dirichlet observation laws
  PointMass,   // disjoint-as-possible point masses (perfectly revealing)
  Shared,      // every model shares one observation law (uninformative)
};

struct ExplicitShape {
  std::size_t n_obs = 4;
  std::size_t n_models = 3;
  std::size_t n_policies = 3;
  double loss_bound = 1.0;
  ObsStyle style = ObsStyle::Dirichlet;
};

// Losses uniform in [0, B], observation laws per style.
ExplicitDmof gen_explicit_dmof(const ExplicitShape& shape, std::uint64_t seed);

struct ScoredShape {
  std::size_t n_models = 4;
  std::size_t n_policies = 3;
  double loss_bound = 1.0;
  double rel_ll_lo = -5.0;
  double rel_ll_hi = 0.0;
  double p_impossible = 0.0;  // chance a non-star model scores -infinity
};

ScoredDmof gen_scored_dmof(const ScoredShape& shape, std::uint64_t seed);

struct MspShape {
  std::size_t horizon = 3;
  std::size_t n_states = 3;   // every step, including the terminal space
  std::size_t n_actions = 2;
  std::size_t n_models = 2;
  std::size_t n_policies = 4;  // random stochastic Markov policies
  double loss_bound = 1.0;
};

// Fully random instance: Dirichlet kernels and initial law, rewards uniform
// in [0, B/H], stochastic Dirichlet policies.
TabularMsp gen_random_msp(const MspShape& shape, std::uint64_t seed);

struct SequentialTestbedConfig {
  std::size_t horizon = 3;
  std::size_t n_states = 3;
  std::size_t n_actions = 2;
  std::size_t n_models = 8;
  double loss_bound = 1.0;
  // Non-star kernels are rowwise mixtures (1 - beta) * star + beta * fresh,
  // with beta = beta0 * beta_growth^k for competitor k: a ladder of model
  // closenesses so the likelihood race resolves across the whole N grid.
  double beta0 = 0.02;
  double beta_growth = 1.6;
};

// Star model plus a ladder of perturbed competitors; the policy list is every
// deterministic Markov policy, and star's optimal policy index is returned.
struct SequentialTestbed {
  TabularMsp msp;
  std::size_t optimal_policy_index = 0;
};

SequentialTestbed gen_sequential_testbed(const SequentialTestbedConfig& config,
                                         std::uint64_t seed);

struct SlTestbedConfig {
  std::size_t n_x = 6;
  std::size_t n_hypotheses = 4;
  std::size_t n_models = 5;
  std::size_t sample_count = 200;  // N
  double loss_bound = 1.0;
  double beta0 = 0.05;
  double beta_growth = 1.9;
};

SlInstance gen_sl_testbed(const SlTestbedConfig& config, std::uint64_t seed);

}  // namespace dmof
