#include "dmof/generators.hpp"

#include <cmath>
#include <string>

#include "dmof/rng.hpp"

namespace dmof {

namespace {

std::vector<std::string> numbered_labels(const char* prefix, std::size_t count) {
  std::vector<std::string> labels;
  labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    labels.push_back(prefix + std::to_string(i));
  }
  return labels;
}

std::vector<double> uniform_row(Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<double> row(n);
  for (auto& v : row) v = rng.uniform(lo, hi);
  return row;
}

}  // namespace

ExplicitDmof gen_explicit_dmof(const ExplicitShape& shape, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0xE791u);
  ExplicitDmof problem;
  problem.n_obs = shape.n_obs;
  problem.loss_bound = shape.loss_bound;
  problem.policy_labels = numbered_labels("pi", shape.n_policies);

  FiniteDist shared = make_dist(rng.dirichlet(shape.n_obs));
  for (std::size_t m = 0; m < shape.n_models; ++m) {
    ExplicitModel model{uniform_dist(shape.n_obs), {}};
    switch (shape.style) {
      case ObsStyle::Dirichlet:
        model.obs_dist = make_dist(rng.dirichlet(shape.n_obs));
        break;
      case ObsStyle::PointMass:
        model.obs_dist = point_mass(shape.n_obs, m % shape.n_obs);
        break;
      case ObsStyle::Shared:
        model.obs_dist = shared;
        break;
    }
    model.loss_row = uniform_row(rng, shape.n_policies, 0.0, shape.loss_bound);
    problem.models.push_back(std::move(model));
  }
  validate(problem);
  return problem;
}

ScoredDmof gen_scored_dmof(const ScoredShape& shape, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0x5c03u);
  ScoredDmof problem;
  problem.loss_bound = shape.loss_bound;
  problem.policy_labels = numbered_labels("pi", shape.n_policies);
  problem.star_index = shape.n_models == 1 ? 0 : rng.below(shape.n_models);
  for (std::size_t m = 0; m < shape.n_models; ++m) {
    ScoredModel model;
    model.loss_row = uniform_row(rng, shape.n_policies, 0.0, shape.loss_bound);
    const bool impossible =
        m != *problem.star_index && rng.uniform01() < shape.p_impossible;
    model.rel_log_lik =
        impossible ? -kInf : rng.uniform(shape.rel_ll_lo, shape.rel_ll_hi);
    problem.models.push_back(std::move(model));
  }
  validate(problem);
  return problem;
}

TabularMsp gen_random_msp(const MspShape& shape, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0x3517u);
  TabularMsp msp;
  msp.horizon = shape.horizon;
  msp.state_sizes.assign(shape.horizon + 1, shape.n_states);
  msp.action_sizes.assign(shape.horizon, shape.n_actions);
  msp.init_dist = make_dist(rng.dirichlet(shape.n_states));
  msp.loss_bound = shape.loss_bound;
  msp.star = 0;

  msp.rewards.resize(shape.horizon);
  const double step_cap = shape.loss_bound / static_cast<double>(shape.horizon);
  for (auto& table : msp.rewards) {
    table.resize(shape.n_states);
    for (auto& row : table) row = uniform_row(rng, shape.n_actions, 0.0, step_cap);
  }

  msp.kernels.resize(shape.n_models);
  for (auto& model : msp.kernels) {
    model.resize(shape.horizon);
    for (std::size_t h = 0; h < shape.horizon; ++h) {
      model[h].reserve(shape.n_states * shape.n_actions);
      for (std::size_t i = 0; i < shape.n_states * shape.n_actions; ++i) {
        model[h].push_back(make_dist(rng.dirichlet(shape.n_states)));
      }
    }
  }

  msp.policies.reserve(shape.n_policies);
  for (std::size_t p = 0; p < shape.n_policies; ++p) {
    MarkovPolicy policy;
    policy.action_dists.resize(shape.horizon);
    for (std::size_t h = 0; h < shape.horizon; ++h) {
      for (std::size_t s = 0; s < shape.n_states; ++s) {
        policy.action_dists[h].push_back(make_dist(rng.dirichlet(shape.n_actions)));
      }
    }
    msp.policies.push_back(std::move(policy));
  }
  validate(msp);
  return msp;
}

SequentialTestbed gen_sequential_testbed(const SequentialTestbedConfig& config,
                                         std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0x7e57u);
  TabularMsp msp;
  msp.horizon = config.horizon;
  msp.state_sizes.assign(config.horizon + 1, config.n_states);
  msp.action_sizes.assign(config.horizon, config.n_actions);
  msp.init_dist = make_dist(rng.dirichlet(config.n_states));
  msp.loss_bound = config.loss_bound;
  msp.star = 0;

  msp.rewards.resize(config.horizon);
  const double step_cap = config.loss_bound / static_cast<double>(config.horizon);
  for (auto& table : msp.rewards) {
    table.resize(config.n_states);
    for (auto& row : table) row = uniform_row(rng, config.n_actions, 0.0, step_cap);
  }

  const std::size_t cells = config.n_states * config.n_actions;
  msp.kernels.resize(config.n_models);
  auto& star_kernels = msp.kernels[0];
  star_kernels.resize(config.horizon);
  for (std::size_t h = 0; h < config.horizon; ++h) {
    star_kernels[h].reserve(cells);
    for (std::size_t i = 0; i < cells; ++i) {
      star_kernels[h].push_back(make_dist(rng.dirichlet(config.n_states)));
    }
  }
  for (std::size_t m = 1; m < config.n_models; ++m) {
    const double beta = std::min(
        1.0, config.beta0 * std::pow(config.beta_growth,
                                     static_cast<double>(m - 1)));
    auto& model = msp.kernels[m];
    model.resize(config.horizon);
    for (std::size_t h = 0; h < config.horizon; ++h) {
      model[h].reserve(cells);
      for (std::size_t i = 0; i < cells; ++i) {
        const auto fresh = rng.dirichlet(config.n_states);
        std::vector<double> row(config.n_states);
        for (std::size_t t = 0; t < config.n_states; ++t) {
          row[t] = (1.0 - beta) * star_kernels[h][i][t] + beta * fresh[t];
        }
        model[h].push_back(make_dist(std::move(row)));
      }
    }
  }

  msp.policies = all_deterministic_policies(msp.state_sizes, msp.action_sizes);
  validate(msp);

  SequentialTestbed testbed;
  const MarkovPolicy optimal = optimal_value(msp, msp.star).second;
  std::size_t found = msp.policies.size();
  for (std::size_t p = 0; p < msp.policies.size(); ++p) {
    bool same = true;
    for (std::size_t h = 0; same && h < msp.horizon; ++h) {
      for (std::size_t s = 0; same && s < msp.state_sizes[h]; ++s) {
        for (std::size_t a = 0; a < msp.action_sizes[h]; ++a) {
          if (msp.policies[p].action_dists[h][s][a] !=
              optimal.action_dists[h][s][a]) {
            same = false;
            break;
          }
        }
      }
    }
    if (same) {
      found = p;
      break;
    }
  }
  require(found < msp.policies.size(), ErrorCode::AssertionFailed,
          "gen_sequential_testbed: optimal policy missing from the listing");
  testbed.optimal_policy_index = found;
  testbed.msp = std::move(msp);
  return testbed;
}

SlInstance gen_sl_testbed(const SlTestbedConfig& config, std::uint64_t seed) {
  Rng rng = Rng::stream(seed, 0x517Bu);
  SlInstance inst;
  inst.n_x = config.n_x;
  inst.hypothesis_labels = numbered_labels("h", config.n_hypotheses);
  inst.sample_count = config.sample_count;
  inst.loss_bound = config.loss_bound;
  inst.star = 0;

  inst.pointwise_loss.resize(config.n_x);
  for (auto& row : inst.pointwise_loss) {
    row = uniform_row(rng, config.n_hypotheses, 0.0, config.loss_bound);
  }

  const FiniteDist star = make_dist(rng.dirichlet(config.n_x));
  inst.model_dists.push_back(star);
  for (std::size_t m = 1; m < config.n_models; ++m) {
    const double beta = std::min(
        1.0, config.beta0 * std::pow(config.beta_growth,
                                     static_cast<double>(m - 1)));
    const auto fresh = rng.dirichlet(config.n_x);
    std::vector<double> row(config.n_x);
    for (std::size_t x = 0; x < config.n_x; ++x) {
      row[x] = (1.0 - beta) * star[x] + beta * fresh[x];
    }
    inst.model_dists.push_back(make_dist(std::move(row)));
  }
  validate(inst);
  return inst;
}

}  // namespace dmof
