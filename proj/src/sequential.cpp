#include "dmof/sequential.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <string>

#include "dmof/parallel.hpp"
#include "dmof/rng.hpp"
#include "json.hpp"

namespace dmof {

namespace {

void check_policy_shape(const TabularMsp& msp, const MarkovPolicy& policy,
                        const char* where) {
  require(policy.action_dists.size() == msp.horizon, ErrorCode::LengthMismatch,
          std::string(where) + ": policy horizon mismatch");
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    require(policy.action_dists[h].size() == msp.state_sizes[h],
            ErrorCode::LengthMismatch,
            std::string(where) + ": policy state count mismatch");
    for (const auto& dist : policy.action_dists[h]) {
      require(dist.size() == msp.action_sizes[h], ErrorCode::LengthMismatch,
              std::string(where) + ": policy action count mismatch");
    }
  }
}

// Exact extreme returns via min/max dynamic programming.
std::pair<double, double> return_range(const TabularMsp& msp, std::size_t model) {
  std::vector<double> lo(msp.state_sizes[msp.horizon], 0.0);
  std::vector<double> hi(msp.state_sizes[msp.horizon], 0.0);
  for (std::size_t h = msp.horizon; h-- > 0;) {
    std::vector<double> lo_next(msp.state_sizes[h], 0.0);
    std::vector<double> hi_next(msp.state_sizes[h], 0.0);
    for (std::size_t s = 0; s < msp.state_sizes[h]; ++s) {
      double best_lo = kInf, best_hi = -kInf;
      for (std::size_t a = 0; a < msp.action_sizes[h]; ++a) {
        const auto& next = msp.kernel(model, h, s, a);
        double elo = 0.0, ehi = 0.0;
        for (std::size_t t = 0; t < next.size(); ++t) {
          elo += next[t] * lo[t];
          ehi += next[t] * hi[t];
        }
        best_lo = std::min(best_lo, msp.rewards[h][s][a] + elo);
        best_hi = std::max(best_hi, msp.rewards[h][s][a] + ehi);
      }
      lo_next[s] = best_lo;
      hi_next[s] = best_hi;
    }
    lo = std::move(lo_next);
    hi = std::move(hi_next);
  }
  double lo_total = kInf, hi_total = -kInf;
  for (std::size_t s = 0; s < msp.state_sizes[0]; ++s) {
    lo_total = std::min(lo_total, lo[s]);
    hi_total = std::max(hi_total, hi[s]);
  }
  return {lo_total, hi_total};
}

std::uint64_t trajectory_space_size(const TabularMsp& msp) {
  std::uint64_t total = 1;
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    const std::uint64_t step = msp.state_sizes[h] * msp.action_sizes[h];
    if (total > kEnumerationCap / step) return UINT64_MAX;
    total *= step;
  }
  return total;
}

// Visits every positive-probability trajectory of (model, policy) with its
// probability.
template <typename Visit>
void enumerate_trajectories(const TabularMsp& msp, std::size_t model,
                            const MarkovPolicy& policy, Visit&& visit) {
  Trajectory traj(msp.horizon);
  auto recurse = [&](auto&& self, std::size_t h, std::size_t state, double prob) -> void {
    if (prob == 0.0) return;
    if (h == msp.horizon) {
      visit(traj, prob);
      return;
    }
    for (std::size_t a = 0; a < msp.action_sizes[h]; ++a) {
      const double pa = policy.action_dists[h][state][a];
      if (pa == 0.0) continue;
      traj[h] = {state, a};
      if (h + 1 == msp.horizon) {
        // the last transition marginalizes out: ell sees the pairs only
        visit(traj, prob * pa);
      } else {
        const auto& next = msp.kernel(model, h, state, a);
        for (std::size_t t = 0; t < next.size(); ++t) {
          if (next[t] == 0.0) continue;
          self(self, h + 1, t, prob * pa * next[t]);
        }
      }
    }
  };
  for (std::size_t s = 0; s < msp.state_sizes[0]; ++s) {
    recurse(recurse, 0, s, msp.init_dist[s]);
  }
}

}  // namespace

void validate(TabularMsp& msp, std::uint64_t cap) {
  require(msp.horizon >= 1, ErrorCode::Empty, "msp: horizon must be >= 1");
  require(msp.state_sizes.size() == msp.horizon + 1, ErrorCode::LengthMismatch,
          "msp: state_sizes must have H+1 entries");
  require(msp.action_sizes.size() == msp.horizon, ErrorCode::LengthMismatch,
          "msp: action_sizes must have H entries");
  for (std::size_t v : msp.state_sizes) {
    require(v >= 1, ErrorCode::Empty, "msp: empty state space");
  }
  for (std::size_t v : msp.action_sizes) {
    require(v >= 1, ErrorCode::Empty, "msp: empty action space");
  }
  require(msp.init_dist.size() == msp.state_sizes[0], ErrorCode::LengthMismatch,
          "msp: init_dist length != |S_1|");
  require(!msp.kernels.empty(), ErrorCode::Empty, "msp: no models");
  require(msp.star < msp.kernels.size(), ErrorCode::IndexOutOfRange,
          "msp: star out of range");
  require(msp.loss_bound > 0.0, ErrorCode::NonPositiveArgument,
          "msp: B must be positive");
  require(!msp.policies.empty(), ErrorCode::Empty, "msp: empty policy list");

  require(msp.rewards.size() == msp.horizon, ErrorCode::LengthMismatch,
          "msp: rewards must have H steps");
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    require(msp.rewards[h].size() == msp.state_sizes[h], ErrorCode::LengthMismatch,
            "msp: reward table state mismatch");
    for (const auto& row : msp.rewards[h]) {
      require(row.size() == msp.action_sizes[h], ErrorCode::LengthMismatch,
              "msp: reward table action mismatch");
      for (double r : row) {
        require(std::isfinite(r), ErrorCode::NonFinite, "msp: non-finite reward");
      }
    }
  }
  for (const auto& model : msp.kernels) {
    require(model.size() == msp.horizon, ErrorCode::LengthMismatch,
            "msp: kernel horizon mismatch");
    for (std::size_t h = 0; h < msp.horizon; ++h) {
      require(model[h].size() == msp.state_sizes[h] * msp.action_sizes[h],
              ErrorCode::LengthMismatch, "msp: kernel table size mismatch");
      for (const auto& row : model[h]) {
        require(row.size() == msp.state_sizes[h + 1], ErrorCode::LengthMismatch,
                "msp: kernel row length mismatch");
      }
    }
  }
  for (const auto& policy : msp.policies) check_policy_shape(msp, policy, "msp");

  if (!msp.episodic_loss) {
    // Default loss B - return stays in [0, B] iff every achievable return
    // does; the DP extremes are exact.
    for (std::size_t m = 0; m < msp.n_models(); ++m) {
      const auto [lo, hi] = return_range(msp, m);
      require(lo >= -1e-9 && hi <= msp.loss_bound + 1e-9, ErrorCode::RangeViolation,
              "msp: achievable returns leave [0, B]");
    }
  } else {
    const std::uint64_t space = trajectory_space_size(msp);
    if (space <= cap) {
      for (std::size_t m = 0; m < msp.n_models(); ++m) {
        for (std::size_t p = 0; p < msp.n_policies(); ++p) {
          enumerate_trajectories(msp, m, msp.policies[p], [&](const Trajectory& t, double) {
            const double v = msp.episodic_loss(t, p);
            require(v >= -1e-9 && v <= msp.loss_bound + 1e-9,
                    ErrorCode::RangeViolation, "msp: episodic loss leaves [0, B]");
          });
        }
      }
    } else {
      Rng rng(0x5e11u);
      for (int draw = 0; draw < 10'000; ++draw) {
        const std::size_t m = rng.below(msp.n_models());
        const std::size_t p = rng.below(msp.n_policies());
        Trajectory traj(msp.horizon);
        std::size_t s = rng.categorical(msp.init_dist.weights());
        for (std::size_t h = 0; h < msp.horizon; ++h) {
          const std::size_t a =
              rng.categorical(msp.policies[p].action_dists[h][s].weights());
          traj[h] = {s, a};
          if (h + 1 < msp.horizon) s = rng.categorical(msp.kernel(m, h, s, a).weights());
        }
        const double v = msp.episodic_loss(traj, p);
        if (v < -1e-9 || v > msp.loss_bound + 1e-9) msp.range_suspect = true;
      }
    }
  }
}

BehaviorSpec BehaviorSpec::trajectory(std::size_t policy_index) {
  BehaviorSpec spec;
  spec.mode = Mode::Trajectory;
  spec.policy_index = policy_index;
  return spec;
}

BehaviorSpec BehaviorSpec::trajectory(MarkovPolicy policy) {
  BehaviorSpec spec;
  spec.mode = Mode::Trajectory;
  spec.policy = std::move(policy);
  return spec;
}

BehaviorSpec BehaviorSpec::independent(std::vector<FiniteDist> margins) {
  BehaviorSpec spec;
  spec.mode = Mode::Independent;
  spec.margins = std::move(margins);
  return spec;
}

namespace {

const MarkovPolicy& behavior_policy(const TabularMsp& msp, const BehaviorSpec& spec) {
  require(spec.mode == BehaviorSpec::Mode::Trajectory, ErrorCode::InvalidArgument,
          "behavior: not in trajectory mode");
  if (spec.policy) return *spec.policy;
  require(spec.policy_index.has_value(), ErrorCode::InvalidArgument,
          "behavior: trajectory mode without a policy");
  require(*spec.policy_index < msp.n_policies(), ErrorCode::IndexOutOfRange,
          "behavior: policy index out of range");
  return msp.policies[*spec.policy_index];
}

}  // namespace

double evaluate_policy(const TabularMsp& msp, std::size_t model,
                       const MarkovPolicy& policy) {
  require(model < msp.n_models(), ErrorCode::IndexOutOfRange,
          "evaluate_policy: model out of range");
  check_policy_shape(msp, policy, "evaluate_policy");

  std::vector<double> value(msp.state_sizes[msp.horizon], 0.0);
  for (std::size_t h = msp.horizon; h-- > 0;) {
    std::vector<double> next(msp.state_sizes[h], 0.0);
    for (std::size_t s = 0; s < msp.state_sizes[h]; ++s) {
      double acc = 0.0;
      for (std::size_t a = 0; a < msp.action_sizes[h]; ++a) {
        const double pa = policy.action_dists[h][s][a];
        if (pa == 0.0) continue;
        const auto& kernel = msp.kernel(model, h, s, a);
        double cont = 0.0;
        for (std::size_t t = 0; t < kernel.size(); ++t) cont += kernel[t] * value[t];
        acc += pa * (msp.rewards[h][s][a] + cont);
      }
      next[s] = acc;
    }
    value = std::move(next);
  }
  double total = 0.0;
  for (std::size_t s = 0; s < msp.state_sizes[0]; ++s) {
    total += msp.init_dist[s] * value[s];
  }
  return total;
}

double evaluate_policy(const TabularMsp& msp, std::size_t model,
                       std::size_t policy_index) {
  require(policy_index < msp.n_policies(), ErrorCode::IndexOutOfRange,
          "evaluate_policy: policy index out of range");
  return evaluate_policy(msp, model, msp.policies[policy_index]);
}

std::pair<double, MarkovPolicy> optimal_value(const TabularMsp& msp,
                                              std::size_t model) {
  require(model < msp.n_models(), ErrorCode::IndexOutOfRange,
          "optimal_value: model out of range");
  require(!msp.episodic_loss, ErrorCode::NonDecomposableLoss,
          "optimal_value: requires the reward-decomposable loss");

  MarkovPolicy policy;
  policy.action_dists.resize(msp.horizon);
  std::vector<double> value(msp.state_sizes[msp.horizon], 0.0);
  for (std::size_t h = msp.horizon; h-- > 0;) {
    std::vector<double> next(msp.state_sizes[h], 0.0);
    policy.action_dists[h].reserve(msp.state_sizes[h]);
    std::vector<std::size_t> arg(msp.state_sizes[h], 0);
    for (std::size_t s = 0; s < msp.state_sizes[h]; ++s) {
      double best = -kInf;
      std::size_t best_action = 0;
      for (std::size_t a = 0; a < msp.action_sizes[h]; ++a) {
        const auto& kernel = msp.kernel(model, h, s, a);
        double q = msp.rewards[h][s][a];
        for (std::size_t t = 0; t < kernel.size(); ++t) q += kernel[t] * value[t];
        if (q > best) {
          best = q;
          best_action = a;
        }
      }
      next[s] = best;
      arg[s] = best_action;
    }
    for (std::size_t s = 0; s < msp.state_sizes[h]; ++s) {
      policy.action_dists[h].push_back(point_mass(msp.action_sizes[h], arg[s]));
    }
    value = std::move(next);
  }
  double total = 0.0;
  for (std::size_t s = 0; s < msp.state_sizes[0]; ++s) {
    total += msp.init_dist[s] * value[s];
  }
  return {total, std::move(policy)};
}

double rl_loss(const TabularMsp& msp, std::size_t model, std::size_t policy_index) {
  const double best = optimal_value(msp, model).first;
  const double value = evaluate_policy(msp, model, policy_index);
  const double loss = best - value;
  require(loss <= msp.loss_bound + 1e-9, ErrorCode::RangeViolation,
          "rl_loss: suboptimality exceeds B");
  return std::max(0.0, loss);
}

double expected_episodic_loss(const TabularMsp& msp, std::size_t model,
                              std::size_t policy_index, std::uint64_t cap) {
  require(policy_index < msp.n_policies(), ErrorCode::IndexOutOfRange,
          "expected_episodic_loss: policy index out of range");
  if (!msp.episodic_loss) {
    return msp.loss_bound - evaluate_policy(msp, model, policy_index);
  }
  require(trajectory_space_size(msp) <= cap, ErrorCode::EnumerationCapExceeded,
          "expected_episodic_loss: trajectory space exceeds cap");
  double acc = 0.0;
  enumerate_trajectories(msp, model, msp.policies[policy_index],
                         [&](const Trajectory& traj, double prob) {
                           acc += prob * msp.episodic_loss(traj, policy_index);
                         });
  return acc;
}

std::vector<FiniteDist> occupancy(const TabularMsp& msp, std::size_t model,
                                  const MarkovPolicy& policy) {
  require(model < msp.n_models(), ErrorCode::IndexOutOfRange,
          "occupancy: model out of range");
  check_policy_shape(msp, policy, "occupancy");

  std::vector<FiniteDist> margins;
  margins.reserve(msp.horizon);
  std::vector<double> state_margin(msp.init_dist.weights());
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    const std::size_t n_a = msp.action_sizes[h];
    std::vector<double> cells(msp.state_sizes[h] * n_a, 0.0);
    for (std::size_t s = 0; s < msp.state_sizes[h]; ++s) {
      for (std::size_t a = 0; a < n_a; ++a) {
        cells[s * n_a + a] = state_margin[s] * policy.action_dists[h][s][a];
      }
    }
    std::vector<double> next_margin(msp.state_sizes[h + 1], 0.0);
    for (std::size_t s = 0; s < msp.state_sizes[h]; ++s) {
      for (std::size_t a = 0; a < n_a; ++a) {
        const double mass = cells[s * n_a + a];
        if (mass == 0.0) continue;
        const auto& kernel = msp.kernel(model, h, s, a);
        for (std::size_t t = 0; t < kernel.size(); ++t) {
          next_margin[t] += mass * kernel[t];
        }
      }
    }
    margins.push_back(make_dist(std::move(cells)));
    state_margin = std::move(next_margin);
  }
  return margins;
}

std::vector<FiniteDist> behavior_margins(const TabularMsp& msp,
                                         const BehaviorSpec& spec) {
  if (spec.mode == BehaviorSpec::Mode::Trajectory) {
    return occupancy(msp, msp.star, behavior_policy(msp, spec));
  }
  require(spec.margins.size() == msp.horizon, ErrorCode::LengthMismatch,
          "behavior_margins: need one margin per step");
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    require(spec.margins[h].size() == msp.state_sizes[h] * msp.action_sizes[h],
            ErrorCode::LengthMismatch, "behavior_margins: margin size mismatch");
  }
  return spec.margins;
}

double coverage_coefficient(const TabularMsp& msp, std::size_t pi_bar,
                            const BehaviorSpec& spec) {
  require(pi_bar < msp.n_policies(), ErrorCode::IndexOutOfRange,
          "coverage_coefficient: policy index out of range");
  const auto target = occupancy(msp, msp.star, msp.policies[pi_bar]);
  const auto data = behavior_margins(msp, spec);
  double worst = 0.0;
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    for (std::size_t i = 0; i < target[h].size(); ++i) {
      const double num = target[h][i];
      if (num == 0.0) continue;
      if (data[h][i] == 0.0) return kInf;
      worst = std::max(worst, num / data[h][i]);
    }
  }
  return worst;
}

TrajectoryDataset sample_dataset(const TabularMsp& msp, const BehaviorSpec& spec,
                                 std::size_t n, std::uint64_t seed) {
  require(n >= 1, ErrorCode::InvalidArgument, "sample_dataset: N must be >= 1");
  TrajectoryDataset data;
  data.n_sequences = n;
  data.horizon = msp.horizon;
  data.states.resize(n * msp.horizon);
  data.actions.resize(n * msp.horizon);
  data.next_states.resize(n * msp.horizon);

  if (spec.mode == BehaviorSpec::Mode::Trajectory) {
    const MarkovPolicy& pi_b = behavior_policy(msp, spec);
    for (std::size_t seq = 0; seq < n; ++seq) {
      Rng rng = Rng::stream(seed, 0xdA7Au, seq);
      std::size_t s = rng.categorical(msp.init_dist.weights());
      for (std::size_t h = 0; h < msp.horizon; ++h) {
        const std::size_t a = rng.categorical(pi_b.action_dists[h][s].weights());
        const std::size_t next = rng.categorical(msp.kernel(msp.star, h, s, a).weights());
        const std::size_t at = seq * msp.horizon + h;
        data.states[at] = static_cast<std::uint32_t>(s);
        data.actions[at] = static_cast<std::uint32_t>(a);
        data.next_states[at] = static_cast<std::uint32_t>(next);
        s = next;  // s_{h+1} = s'_h
      }
    }
  } else {
    const auto margins = behavior_margins(msp, spec);
    for (std::size_t seq = 0; seq < n; ++seq) {
      Rng rng = Rng::stream(seed, 0xdA7Au, seq);
      for (std::size_t h = 0; h < msp.horizon; ++h) {
        const std::size_t cell = rng.categorical(margins[h].weights());
        const std::size_t s = cell / msp.action_sizes[h];
        const std::size_t a = cell % msp.action_sizes[h];
        const std::size_t next = rng.categorical(msp.kernel(msp.star, h, s, a).weights());
        const std::size_t at = seq * msp.horizon + h;
        data.states[at] = static_cast<std::uint32_t>(s);
        data.actions[at] = static_cast<std::uint32_t>(a);
        data.next_states[at] = static_cast<std::uint32_t>(next);
      }
    }
  }
  return data;
}

double rel_log_likelihood(const TabularMsp& msp, std::size_t model,
                          const TrajectoryDataset& data) {
  require(model < msp.n_models(), ErrorCode::IndexOutOfRange,
          "rel_log_likelihood: model out of range");
  require(data.horizon == msp.horizon, ErrorCode::LengthMismatch,
          "rel_log_likelihood: dataset horizon mismatch");
  double acc = 0.0;
  for (std::size_t seq = 0; seq < data.n_sequences; ++seq) {
    for (std::size_t h = 0; h < msp.horizon; ++h) {
      const std::size_t at = seq * msp.horizon + h;
      const double p =
          msp.kernel(model, h, data.states[at], data.actions[at])[data.next_states[at]];
      if (p == 0.0) return -kInf;
      acc += std::log(p);
    }
  }
  return acc;
}

ScoredDmof build_scored_dmof(const TabularMsp& msp, const TrajectoryDataset& data) {
  ScoredDmof scored;
  scored.loss_bound = msp.loss_bound;
  scored.star_index = msp.star;
  scored.policy_labels.reserve(msp.n_policies());
  for (std::size_t p = 0; p < msp.n_policies(); ++p) {
    scored.policy_labels.push_back("pi" + std::to_string(p));
  }
  scored.models.reserve(msp.n_models());
  for (std::size_t m = 0; m < msp.n_models(); ++m) {
    ScoredModel model;
    model.rel_log_lik = rel_log_likelihood(msp, m, data);
    model.loss_row.reserve(msp.n_policies());
    for (std::size_t p = 0; p < msp.n_policies(); ++p) {
      model.loss_row.push_back(rl_loss(msp, m, p));
    }
    scored.models.push_back(std::move(model));
  }
  return scored;
}

std::vector<std::vector<double>> ope_loss(const TabularMsp& msp,
                                          std::size_t pi_eval,
                                          const std::vector<double>& value_grid) {
  require(!value_grid.empty(), ErrorCode::EmptyGrid, "ope_loss: empty value grid");
  require(pi_eval < msp.n_policies(), ErrorCode::IndexOutOfRange,
          "ope_loss: policy index out of range");
  std::vector<std::vector<double>> loss(msp.n_models());
  for (std::size_t m = 0; m < msp.n_models(); ++m) {
    const double value = evaluate_policy(msp, m, pi_eval);
    loss[m].reserve(value_grid.size());
    for (double r : value_grid) {
      loss[m].push_back(std::clamp(std::abs(value - r), 0.0, msp.loss_bound));
    }
  }
  return loss;
}

CheckReport check_refined_simulation(const TabularMsp& msp, std::size_t m,
                                     std::size_t m_prime, std::size_t policy_index) {
  require(m < msp.n_models() && m_prime < msp.n_models(), ErrorCode::IndexOutOfRange,
          "check_refined_simulation: model out of range");

  const double lhs = expected_episodic_loss(msp, m, policy_index);
  const double rhs_loss = expected_episodic_loss(msp, m_prime, policy_index);

  // E over the trajectory law of m of the summed per-step kernel divergences
  // at the visited pairs; by linearity this is an occupancy-weighted sum.
  const auto margins = occupancy(msp, m, msp.policies[policy_index]);
  double divergence_term = 0.0;
  for (std::size_t h = 0; h < msp.horizon; ++h) {
    const std::size_t n_a = msp.action_sizes[h];
    for (std::size_t s = 0; s < msp.state_sizes[h]; ++s) {
      for (std::size_t a = 0; a < n_a; ++a) {
        const double mass = margins[h][s * n_a + a];
        if (mass == 0.0) continue;
        divergence_term +=
            mass * hellinger_sq(msp.kernel(m, h, s, a), msp.kernel(m_prime, h, s, a));
      }
    }
  }

  CheckReport report;
  report.name = "refined_simulation";
  report.lhs = lhs;
  report.rhs = 3.0 * rhs_loss +
               4.0 * msp.loss_bound * 100.0 *
                   std::log(2.0 * static_cast<double>(msp.horizon)) * divergence_term;
  report.tolerance = 1e-9;
  report.pass = report.lhs <= report.rhs + report.tolerance;
  if (!report.pass) {
    nlohmann::json dump;
    dump["m"] = m;
    dump["m_prime"] = m_prime;
    dump["policy"] = policy_index;
    dump["lhs"] = report.lhs;
    dump["rhs"] = report.rhs;
    report.detail = dump.dump();
  }
  return report;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, ErrorCode::InvalidArgument,
          "loglog_slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(std::max(y[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RateSweepResult rate_sweep(const TabularMsp& msp, const BehaviorSpec& spec,
                           std::size_t pi_bar, const std::vector<std::size_t>& n_grid,
                           double delta, std::uint64_t trials, std::uint64_t seed,
                           double eps, unsigned threads) {
  require(!n_grid.empty(), ErrorCode::EmptyGrid, "rate_sweep: empty N grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    require(n_grid[i] > n_grid[i - 1], ErrorCode::InvalidArgument,
            "rate_sweep: N grid must be strictly increasing");
  }
  require(delta > 0.0 && delta < 1.0, ErrorCode::InvalidArgument,
          "rate_sweep: delta outside (0,1)");
  require(trials >= 1, ErrorCode::InvalidArgument, "rate_sweep: no trials");

  const double coverage = coverage_coefficient(msp, pi_bar, spec);
  require(std::isfinite(coverage), ErrorCode::RangeViolation,
          "rate_sweep: coverage coefficient is infinite");

  // The loss matrix is dataset-independent; only log-likelihoods vary by trial.
  std::vector<ScoredModel> base_models(msp.n_models());
  for (std::size_t m = 0; m < msp.n_models(); ++m) {
    base_models[m].loss_row.reserve(msp.n_policies());
    for (std::size_t p = 0; p < msp.n_policies(); ++p) {
      base_models[m].loss_row.push_back(rl_loss(msp, m, p));
    }
  }
  std::vector<std::string> labels;
  labels.reserve(msp.n_policies());
  for (std::size_t p = 0; p < msp.n_policies(); ++p) {
    labels.push_back("pi" + std::to_string(p));
  }

  const double pi_bar_loss = base_models[msp.star].loss_row[pi_bar];
  const double h = static_cast<double>(msp.horizon);
  const double n_models = static_cast<double>(msp.n_models());

  RateSweepResult result;
  result.coverage = coverage;
  result.rows.resize(n_grid.size() * trials);

  parallel_for(result.rows.size(), threads, [&](std::size_t index) {
    const std::size_t n_idx = index / trials;
    const std::uint64_t trial = index % trials;
    const std::size_t n = n_grid[n_idx];

    const TrajectoryDataset data =
        sample_dataset(msp, spec, n, Rng::stream(seed, 0x57EEu, n, trial).next_u64());

    ScoredDmof scored;
    scored.loss_bound = msp.loss_bound;
    scored.star_index = msp.star;
    scored.policy_labels = labels;
    scored.models = base_models;
    for (std::size_t m = 0; m < msp.n_models(); ++m) {
      scored.models[m].rel_log_lik = rel_log_likelihood(msp, m, data);
    }

    RateRow row;
    row.n = n;
    row.trial = trial;
    row.lambda = lambda_fast_sq(msp.loss_bound, coverage, h, static_cast<double>(n));
    row.bound = 3.0 * pi_bar_loss +
                (1200.0 * msp.loss_bound * coverage * std::log(2.0 * h) /
                 static_cast<double>(n)) *
                    std::log(3.0 * h * n_models / delta);

    const EddResult decision = edd(scored, row.lambda, eps);
    row.edd_loss = mixture_loss(scored.models[msp.star].loss_row, decision.policy);
    row.violated = row.edd_loss > row.bound + 2.0 * eps;
    result.rows[index] = row;
  });

  std::vector<double> means;
  means.reserve(n_grid.size());
  for (std::size_t n_idx = 0; n_idx < n_grid.size(); ++n_idx) {
    std::vector<double> losses(trials);
    std::uint64_t violations = 0;
    double sum = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      const RateRow& row = result.rows[n_idx * trials + t];
      losses[t] = row.edd_loss;
      sum += row.edd_loss;
      if (row.violated) ++violations;
    }
    std::sort(losses.begin(), losses.end());
    auto quantile = [&](double q) {
      const double pos = q * static_cast<double>(losses.size() - 1);
      const std::size_t i = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(i);
      return i + 1 < losses.size() ? losses[i] * (1.0 - frac) + losses[i + 1] * frac
                                   : losses.back();
    };
    RateSummaryRow summary;
    summary.n = n_grid[n_idx];
    summary.mean = sum / static_cast<double>(trials);
    summary.q10 = quantile(0.10);
    summary.q50 = quantile(0.50);
    summary.q90 = quantile(0.90);
    summary.violations = violations;
    result.violations += violations;
    result.summary.push_back(summary);
    means.push_back(summary.mean);
  }

  std::vector<double> ns(n_grid.begin(), n_grid.end());
  result.slope_full = loglog_slope(ns, means);
  const std::size_t half = n_grid.size() / 2;
  if (n_grid.size() - half >= 2) {
    result.slope_upper_half =
        loglog_slope(std::vector<double>(ns.begin() + half, ns.end()),
                     std::vector<double>(means.begin() + half, means.end()));
  } else {
    result.slope_upper_half = result.slope_full;
  }
  return result;
}

std::vector<MarkovPolicy> all_deterministic_policies(
    const std::vector<std::size_t>& state_sizes,
    const std::vector<std::size_t>& action_sizes, std::size_t cap) {
  require(state_sizes.size() >= action_sizes.size() && !action_sizes.empty(),
          ErrorCode::LengthMismatch, "all_deterministic_policies: bad shape");
  const std::size_t horizon = action_sizes.size();

  std::size_t total = 1;
  std::vector<std::pair<std::size_t, std::size_t>> slots;  // (h, s)
  for (std::size_t h = 0; h < horizon; ++h) {
    for (std::size_t s = 0; s < state_sizes[h]; ++s) {
      require(total <= cap / action_sizes[h], ErrorCode::EnumerationCapExceeded,
              "all_deterministic_policies: policy space exceeds cap");
      total *= action_sizes[h];
      slots.emplace_back(h, s);
    }
  }

  std::vector<MarkovPolicy> out;
  out.reserve(total);
  std::vector<std::size_t> digits(slots.size(), 0);
  while (true) {
    MarkovPolicy policy;
    policy.action_dists.resize(horizon);
    for (std::size_t h = 0; h < horizon; ++h) {
      policy.action_dists[h].reserve(state_sizes[h]);
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
      const auto [h, s] = slots[i];
      policy.action_dists[h].push_back(point_mass(action_sizes[h], digits[i]));
    }
    out.push_back(std::move(policy));

    std::size_t pos = slots.size();
    while (pos > 0) {
      --pos;
      if (++digits[pos] < action_sizes[slots[pos].first]) break;
      digits[pos] = 0;
      if (pos == 0) return out;
    }
    if (slots.empty()) return out;
  }
}

}  // namespace dmof
