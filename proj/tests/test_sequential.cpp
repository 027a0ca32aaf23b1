#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "dmof/generators.hpp"
#include "dmof/rng.hpp"
#include "dmof/sequential.hpp"

using namespace dmof;

namespace {

// Sampling-path oracle, independent of the dynamic-programming code.
double rollout_return(const TabularMsp& msp, std::size_t model,
                      const MarkovPolicy& policy, Rng& rng) {
  double total = 0.0;
  std::size_t s = rng.categorical(msp.init_dist.weights());
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    const std::size_t a = rng.categorical(policy.action_dists[h][s].weights());
    total += msp.rewards[h][s][a];
    s = rng.categorical(msp.kernel(model, h, s, a).weights());
  }
  return total;
}

TabularMsp deterministic_two_arm() {
  // H = 1, one state, two actions with rewards (0.2, 0.9)
  TabularMsp msp;
  msp.horizon = 1;
  msp.state_sizes = {1, 1};
  msp.action_sizes = {2};
  msp.init_dist = point_mass(1, 0);
  msp.rewards = {{{0.2, 0.9}}};
  msp.kernels = {{{point_mass(1, 0), point_mass(1, 0)}}};
  msp.loss_bound = 1.0;
  msp.star = 0;
  msp.policies = all_deterministic_policies(msp.state_sizes, msp.action_sizes);
  validate(msp);
  return msp;
}

}  // namespace

TEST_CASE("policy evaluation: deterministic and degenerate cases") {
  TabularMsp msp = deterministic_two_arm();
  CHECK(evaluate_policy(msp, 0, std::size_t{0}) == doctest::Approx(0.2));
  CHECK(evaluate_policy(msp, 0, std::size_t{1}) == doctest::Approx(0.9));

  auto [best, policy] = optimal_value(msp, 0);
  CHECK(best == doctest::Approx(0.9));
  CHECK(policy.action_dists[0][0][1] == 1.0);

  // zero rewards: every policy evaluates to zero
  for (auto& table : msp.rewards) {
    for (auto& row : table) row.assign(row.size(), 0.0);
  }
  CHECK(evaluate_policy(msp, 0, std::size_t{0}) == 0.0);
  CHECK(optimal_value(msp, 0).first == 0.0);
}

TEST_CASE("policy evaluation matches a million-rollout Monte Carlo oracle") {
  const TabularMsp msp = gen_random_msp({3, 2, 2, 1, 3, 1.0}, 520);
  const MarkovPolicy& policy = msp.policies[1];
  const double exact = evaluate_policy(msp, 0, policy);

  Rng rng(999);
  const int n = 1'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double value = rollout_return(msp, 0, policy, rng);
    sum += value;
    sum_sq += value * value;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / n);
  CHECK(std::abs(exact - mean) <= 3.0 * sd + 1e-6);
}

TEST_CASE("optimal value dominates every listed policy") {
  const TabularMsp msp = gen_random_msp({3, 3, 2, 2, 6, 1.0}, 521);
  for (std::size_t m = 0; m < msp.n_models(); ++m) {
    const double best = optimal_value(msp, m).first;
    for (std::size_t p = 0; p < msp.n_policies(); ++p) {
      CHECK(best >= evaluate_policy(msp, m, p) - 1e-12);
    }
  }
}

TEST_CASE("rl_loss composes evaluation with the optimal value") {
  const TabularMsp msp = gen_random_msp({3, 3, 2, 2, 5, 1.0}, 522);
  for (std::size_t m = 0; m < msp.n_models(); ++m) {
    const double best = optimal_value(msp, m).first;
    for (std::size_t p = 0; p < msp.n_policies(); ++p) {
      CHECK(rl_loss(msp, m, p) ==
            doctest::Approx(best - evaluate_policy(msp, m, p)).epsilon(1e-12));
    }
  }

  // the optimal policy of each model, if appended, has zero loss
  TabularMsp extended = msp;
  for (std::size_t m = 0; m < msp.n_models(); ++m) {
    extended.policies.push_back(optimal_value(msp, m).second);
    CHECK(rl_loss(extended, m, extended.policies.size() - 1) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("occupancy margins are exact distributions matching rollouts") {
  const TabularMsp msp = gen_random_msp({3, 2, 2, 1, 2, 1.0}, 523);
  const MarkovPolicy& policy = msp.policies[0];
  const auto margins = occupancy(msp, 0, policy);
  REQUIRE(margins.size() == msp.horizon);
  for (const auto& margin : margins) {
    double total = 0.0;
    for (std::size_t i = 0; i < margin.size(); ++i) total += margin[i];
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  Rng rng(7777);
  const int n = 200'000;
  std::vector<std::vector<double>> counts(msp.horizon);
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    counts[h].assign(msp.state_sizes[h] * msp.action_sizes[h], 0.0);
  }
  for (int i = 0; i < n; ++i) {
    std::size_t s = rng.categorical(msp.init_dist.weights());
    for (std::size_t h = 0; h < msp.horizon; ++h) {
      const std::size_t a = rng.categorical(policy.action_dists[h][s].weights());
      counts[h][s * msp.action_sizes[h] + a] += 1.0;
      s = rng.categorical(msp.kernel(0, h, s, a).weights());
    }
  }
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    for (std::size_t i = 0; i < counts[h].size(); ++i) {
      const double expected = margins[h][i];
      const double freq = counts[h][i] / n;
      const double sigma = std::sqrt(std::max(expected * (1 - expected), 1e-12) / n);
      CHECK(std::abs(freq - expected) <= 3.5 * sigma + 1e-4);
    }
  }
}

TEST_CASE("deterministic chains produce point-mass occupancies") {
  TabularMsp msp = deterministic_two_arm();
  const auto margins = occupancy(msp, 0, msp.policies[1]);
  CHECK(margins[0][1] == 1.0);  // (s=0, a=1)
}

TEST_CASE("coverage coefficient: self-coverage is 1, uniform data scales") {
  const TabularMsp msp = gen_random_msp({3, 3, 2, 1, 4, 1.0}, 524);
  const BehaviorSpec self = BehaviorSpec::trajectory(std::size_t{2});
  CHECK(coverage_coefficient(msp, 2, self) == doctest::Approx(1.0).epsilon(1e-12));

  // uniform data margins: C = max cell occupancy * #cells
  std::vector<FiniteDist> uniform_margins;
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    uniform_margins.push_back(uniform_dist(msp.state_sizes[h] * msp.action_sizes[h]));
  }
  const BehaviorSpec uniform = BehaviorSpec::independent(uniform_margins);
  const auto occ = occupancy(msp, msp.star, msp.policies[1]);
  double expect = 0.0;
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    const double cells = static_cast<double>(occ[h].size());
    for (std::size_t i = 0; i < occ[h].size(); ++i) {
      expect = std::max(expect, occ[h][i] * cells);
    }
  }
  CHECK(coverage_coefficient(msp, 1, uniform) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(coverage_coefficient(msp, 1, uniform) >= 1.0 - 1e-12);

  // data missing a visited cell: infinite
  TabularMsp det = deterministic_two_arm();
  std::vector<FiniteDist> missing{point_mass(2, 0)};  // only (s0, a0) covered
  CHECK(coverage_coefficient(det, 1, BehaviorSpec::independent(missing)) == kInf);
}

TEST_CASE("sampled datasets reproduce the behavior margins") {
  const TabularMsp msp = gen_random_msp({2, 3, 2, 1, 3, 1.0}, 525);
  const BehaviorSpec spec = BehaviorSpec::trajectory(std::size_t{0});
  const auto margins = behavior_margins(msp, spec);

  const std::size_t n = 100'000;
  const TrajectoryDataset data = sample_dataset(msp, spec, n, 31337);
  REQUIRE(data.n_sequences == n);
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    std::vector<double> counts(msp.state_sizes[h] * msp.action_sizes[h], 0.0);
    for (std::size_t seq = 0; seq < n; ++seq) {
      const std::size_t at = seq * msp.horizon + h;
      counts[data.states[at] * msp.action_sizes[h] + data.actions[at]] += 1.0;
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double expected = margins[h][i];
      const double sigma =
          std::sqrt(std::max(expected * (1 - expected), 1e-12) / static_cast<double>(n));
      CHECK(std::abs(counts[i] / static_cast<double>(n) - expected) <=
            3.5 * sigma + 1e-4);
    }
  }

  // determinism in the seed
  const TrajectoryDataset again = sample_dataset(msp, spec, 64, 22);
  const TrajectoryDataset same = sample_dataset(msp, spec, 64, 22);
  CHECK(again.states == same.states);
  CHECK(again.actions == same.actions);
  CHECK(again.next_states == same.next_states);
  CHECK_THROWS_AS(sample_dataset(msp, spec, 0, 1), Error);
}

TEST_CASE("independent-mode sampling follows the explicit margins") {
  const TabularMsp msp = gen_random_msp({2, 2, 2, 1, 2, 1.0}, 526);
  std::vector<FiniteDist> margins;
  Rng rng(606);
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    margins.push_back(make_dist(rng.dirichlet(msp.state_sizes[h] * msp.action_sizes[h])));
  }
  const BehaviorSpec spec = BehaviorSpec::independent(margins);
  const std::size_t n = 100'000;
  const TrajectoryDataset data = sample_dataset(msp, spec, n, 448);
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    std::vector<double> counts(margins[h].size(), 0.0);
    for (std::size_t seq = 0; seq < n; ++seq) {
      const std::size_t at = seq * msp.horizon + h;
      counts[data.states[at] * msp.action_sizes[h] + data.actions[at]] += 1.0;
    }
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const double expected = margins[h][i];
      const double sigma =
          std::sqrt(std::max(expected * (1 - expected), 1e-12) / static_cast<double>(n));
      CHECK(std::abs(counts[i] / static_cast<double>(n) - expected) <=
            3.5 * sigma + 1e-4);
    }
  }
}

TEST_CASE("relative log-likelihood: exact cases and naive recomputation") {
  TabularMsp det = deterministic_two_arm();
  const BehaviorSpec spec = BehaviorSpec::trajectory(std::size_t{1});
  const TrajectoryDataset data = sample_dataset(det, spec, 16, 5);
  CHECK(rel_log_likelihood(det, 0, data) == 0.0);  // all factors log 1

  const TabularMsp msp = gen_random_msp({3, 2, 2, 3, 2, 1.0}, 527);
  const TrajectoryDataset random_data =
      sample_dataset(msp, BehaviorSpec::trajectory(std::size_t{0}), 50, 6);
  for (std::size_t m = 0; m < msp.n_models(); ++m) {
    double naive = 0.0;
    for (std::size_t seq = 0; seq < random_data.n_sequences; ++seq) {
      for (std::size_t h = 0; h < msp.horizon; ++h) {
        const std::size_t at = seq * msp.horizon + h;
        naive += std::log(msp.kernel(m, h, random_data.states[at],
                                     random_data.actions[at])[random_data.next_states[at]]);
      }
    }
    CHECK(rel_log_likelihood(msp, m, random_data) ==
          doctest::Approx(naive).epsilon(1e-12));
  }

  // a model with a zero on an observed transition scores -infinity
  TabularMsp zeroed = msp;
  zeroed.kernels.push_back(zeroed.kernels[0]);
  for (auto& table : zeroed.kernels.back()) {
    for (auto& row : table) row = point_mass(row.size(), 0);
  }
  validate(zeroed);
  bool hit_zero = false;
  for (std::size_t seq = 0; !hit_zero && seq < random_data.n_sequences; ++seq) {
    for (std::size_t h = 0; h < msp.horizon; ++h) {
      if (random_data.next_states[seq * msp.horizon + h] != 0) hit_zero = true;
    }
  }
  if (hit_zero) {
    CHECK(rel_log_likelihood(zeroed, zeroed.n_models() - 1, random_data) == -kInf);
  }
}

TEST_CASE("star model wins the expected log-likelihood race") {
  const TabularMsp msp = gen_random_msp({3, 3, 2, 3, 2, 1.0}, 528);
  const BehaviorSpec spec = BehaviorSpec::trajectory(std::size_t{0});
  std::vector<double> mean(msp.n_models(), 0.0);
  const int datasets = 500;
  for (int d = 0; d < datasets; ++d) {
    const TrajectoryDataset data = sample_dataset(msp, spec, 12, 9000 + d);
    for (std::size_t m = 0; m < msp.n_models(); ++m) {
      mean[m] += rel_log_likelihood(msp, m, data) / datasets;
    }
  }
  for (std::size_t m = 0; m < msp.n_models(); ++m) {
    if (m == msp.star) continue;
    CHECK(mean[msp.star] >= mean[m] - 0.15);  // Gibbs inequality with MC slack
  }
}

TEST_CASE("build_scored_dmof packages exact losses and likelihoods") {
  const TabularMsp msp = gen_random_msp({2, 2, 2, 2, 3, 1.0}, 529);
  const TrajectoryDataset data =
      sample_dataset(msp, BehaviorSpec::trajectory(std::size_t{0}), 25, 77);
  const ScoredDmof scored = build_scored_dmof(msp, data);
  REQUIRE(scored.n_models() == msp.n_models());
  REQUIRE(scored.n_policies() == msp.n_policies());
  CHECK(*scored.star_index == msp.star);
  for (std::size_t m = 0; m < msp.n_models(); ++m) {
    CHECK(scored.models[m].rel_log_lik ==
          doctest::Approx(rel_log_likelihood(msp, m, data)));
    for (std::size_t p = 0; p < msp.n_policies(); ++p) {
      CHECK(scored.models[m].loss_row[p] == doctest::Approx(rl_loss(msp, m, p)));
    }
  }

  // single model: edd returns the argmin-loss policy
  TabularMsp lone = msp;
  lone.kernels.resize(1);
  lone.star = 0;
  const ScoredDmof lone_scored =
      build_scored_dmof(lone, sample_dataset(lone, BehaviorSpec::trajectory(std::size_t{0}), 10, 3));
  const EddResult decision = edd(lone_scored, 0.3, 1e-9);
  const auto& row = lone_scored.models[0].loss_row;
  const double best = *std::min_element(row.begin(), row.end());
  CHECK(mixture_loss(row, decision.policy) == doctest::Approx(best).epsilon(1e-7));
}

TEST_CASE("ope loss grid behaves like a clipped absolute error") {
  const TabularMsp msp = gen_random_msp({3, 2, 2, 2, 3, 1.0}, 530);
  const double value = evaluate_policy(msp, msp.star, std::size_t{1});
  const std::vector<double> grid{0.0, value, 0.9, 0.5};
  const auto loss = ope_loss(msp, 1, grid);
  REQUIRE(loss.size() == msp.n_models());
  CHECK(loss[msp.star][1] == 0.0);  // exact value present in the grid

  // the grid value nearest J_star minimizes the star row
  std::size_t nearest = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (std::abs(grid[i] - value) < std::abs(grid[nearest] - value)) nearest = i;
  }
  const double star_min =
      *std::min_element(loss[msp.star].begin(), loss[msp.star].end());
  CHECK(loss[msp.star][nearest] == doctest::Approx(star_min));

  for (std::size_t m = 0; m < msp.n_models(); ++m) {
    const double jm = evaluate_policy(msp, m, std::size_t{1});
    for (std::size_t i = 0; i < grid.size(); ++i) {
      CHECK(loss[m][i] ==
            doctest::Approx(std::min(std::abs(jm - grid[i]), msp.loss_bound)));
    }
  }
  CHECK_THROWS_AS(ope_loss(msp, 1, {}), Error);
}

TEST_CASE("refined simulation check: identical models and degenerate horizon") {
  const TabularMsp msp = gen_random_msp({3, 3, 2, 2, 3, 1.0}, 531);
  for (std::size_t p = 0; p < msp.n_policies(); ++p) {
    const CheckReport same = check_refined_simulation(msp, 1, 1, p);
    CHECK(same.pass);
    CHECK(same.rhs >= 3.0 * same.lhs - 1e-12);  // divergence term vanishes
  }
  const CheckReport cross = check_refined_simulation(msp, 0, 1, 0);
  CHECK(cross.pass);
}

TEST_CASE("rate sweep: degenerate instances and output shape") {
  // all rewards equal: every policy is optimal, losses identically zero
  TabularMsp flat = gen_random_msp({2, 2, 2, 2, 3, 1.0}, 532);
  for (auto& table : flat.rewards) {
    for (auto& row : table) row.assign(row.size(), 0.25);
  }
  validate(flat);
  const RateSweepResult result = rate_sweep(
      flat, BehaviorSpec::trajectory(std::size_t{0}), 0, {8, 16}, 0.1, 5, 99, 1e-9);
  REQUIRE(result.rows.size() == 10);
  CHECK(result.violations == 0);
  for (const auto& row : result.rows) {
    CHECK(row.edd_loss <= 1e-7);
    CHECK(row.lambda ==
          doctest::Approx(lambda_fast_sq(1.0, result.coverage, 2, row.n)));
  }

  // single model: EDD picks the star's argmin row everywhere
  TabularMsp lone = gen_random_msp({2, 2, 2, 1, 4, 1.0}, 533);
  const RateSweepResult lone_result = rate_sweep(
      lone, BehaviorSpec::trajectory(std::size_t{0}), 0, {8, 16}, 0.1, 4, 5, 1e-9);
  double best = kInf;
  for (std::size_t p = 0; p < lone.n_policies(); ++p) {
    best = std::min(best, rl_loss(lone, 0, p));
  }
  for (const auto& row : lone_result.rows) {
    CHECK(row.edd_loss == doctest::Approx(best).epsilon(1e-6));
  }

  // deterministic rows regardless of threading
  const RateSweepResult t1 = rate_sweep(
      lone, BehaviorSpec::trajectory(std::size_t{0}), 0, {8, 16}, 0.1, 4, 5, 1e-9, 1);
  const RateSweepResult t4 = rate_sweep(
      lone, BehaviorSpec::trajectory(std::size_t{0}), 0, {8, 16}, 0.1, 4, 5, 1e-9, 4);
  for (std::size_t i = 0; i < t1.rows.size(); ++i) {
    CHECK(t1.rows[i].edd_loss == t4.rows[i].edd_loss);
  }
}

TEST_CASE("deterministic policy enumeration covers the whole space") {
  const auto policies = all_deterministic_policies({2, 2, 2}, {2, 2});
  CHECK(policies.size() == 16);  // 2^(2+2)
  CHECK_THROWS_AS(all_deterministic_policies({100, 100, 100}, {10, 10}), Error);
}
