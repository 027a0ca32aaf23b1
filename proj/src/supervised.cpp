#include "dmof/supervised.hpp"

#include <algorithm>
#include <cmath>

#include "dmof/parallel.hpp"
#include "dmof/rng.hpp"
#include "dmof/sequential.hpp"  // loglog_slope

namespace dmof {

void validate(const SlInstance& inst) {
  require(inst.n_x >= 1, ErrorCode::Empty, "sl instance: empty sample space");
  require(!inst.hypothesis_labels.empty(), ErrorCode::Empty,
          "sl instance: no hypotheses");
  require(!inst.model_dists.empty(), ErrorCode::Empty, "sl instance: no models");
  require(inst.loss_bound > 0.0, ErrorCode::NonPositiveArgument,
          "sl instance: B must be positive");
  require(inst.sample_count >= 1, ErrorCode::InvalidArgument,
          "sl instance: N must be >= 1");
  require(inst.star < inst.model_dists.size(), ErrorCode::IndexOutOfRange,
          "sl instance: star out of range");
  require(inst.pointwise_loss.size() == inst.n_x, ErrorCode::LengthMismatch,
          "sl instance: pointwise loss must have one row per sample point");
  for (const auto& row : inst.pointwise_loss) {
    require(row.size() == inst.n_hypotheses(), ErrorCode::LengthMismatch,
            "sl instance: pointwise loss row length mismatch");
    for (double v : row) {
      require(std::isfinite(v) && v >= -1e-12 && v <= inst.loss_bound + 1e-9,
              ErrorCode::RangeViolation, "sl instance: loss entry outside [0, B]");
    }
  }
  for (const auto& dist : inst.model_dists) {
    require(dist.size() == inst.n_x, ErrorCode::LengthMismatch,
            "sl instance: model distribution length mismatch");
  }
}

double sl_loss(const SlInstance& inst, std::size_t model, std::size_t hypothesis) {
  require(model < inst.n_models(), ErrorCode::IndexOutOfRange,
          "sl_loss: model out of range");
  require(hypothesis < inst.n_hypotheses(), ErrorCode::IndexOutOfRange,
          "sl_loss: hypothesis out of range");
  double acc = 0.0;
  for (std::size_t x = 0; x < inst.n_x; ++x) {
    acc += inst.model_dists[model][x] * inst.pointwise_loss[x][hypothesis];
  }
  return acc;
}

std::vector<std::size_t> sample_sl_dataset(const SlInstance& inst, std::size_t n,
                                           std::uint64_t seed) {
  validate(inst);
  require(n >= 1, ErrorCode::InvalidArgument, "sample_sl_dataset: N must be >= 1");
  Rng rng(seed);
  std::vector<std::size_t> data(n);
  for (auto& x : data) x = rng.categorical(inst.model_dists[inst.star].weights());
  return data;
}

std::vector<std::vector<double>> sl_loss_matrix(const SlInstance& inst, bool centered) {
  std::vector<std::vector<double>> loss(inst.n_models());
  for (std::size_t m = 0; m < inst.n_models(); ++m) {
    loss[m].reserve(inst.n_hypotheses());
    for (std::size_t h = 0; h < inst.n_hypotheses(); ++h) {
      loss[m].push_back(sl_loss(inst, m, h));
    }
    if (centered) {
      const double lo = *std::min_element(loss[m].begin(), loss[m].end());
      for (auto& v : loss[m]) v -= lo;
    }
  }
  return loss;
}

namespace {

ScoredDmof package_sl(const SlInstance& inst, const std::vector<std::size_t>& dataset,
                      bool centered) {
  const auto loss = sl_loss_matrix(inst, centered);
  ScoredDmof scored;
  scored.loss_bound = inst.loss_bound;
  scored.policy_labels = inst.hypothesis_labels;
  scored.star_index = inst.star;
  scored.models.resize(inst.n_models());
  for (std::size_t m = 0; m < inst.n_models(); ++m) {
    scored.models[m].loss_row = loss[m];
    double ll = 0.0;
    for (std::size_t x : dataset) {
      require(x < inst.n_x, ErrorCode::IndexOutOfRange, "edd_sl: sample out of range");
      const double p = inst.model_dists[m][x];
      if (p == 0.0) {
        ll = -kInf;
        break;
      }
      ll += std::log(p);
    }
    scored.models[m].rel_log_lik = ll;
  }
  return scored;
}

}  // namespace

SlEddResult edd_sl(const SlInstance& inst, const std::vector<std::size_t>& dataset,
                   double eps, bool centered) {
  validate(inst);
  require(!dataset.empty(), ErrorCode::Empty, "edd_sl: empty dataset");
  SlEddResult result;
  result.scored = package_sl(inst, dataset, centered);
  const double lambda =
      lambda_fast_sl(inst.loss_bound, static_cast<double>(dataset.size()));
  EddResult inner = edd(result.scored, lambda, eps);
  result.policy = std::move(inner.policy);
  result.value = inner.value;
  return result;
}

MonteCarloReport check_fast_sl(const SlInstance& inst, double delta,
                               std::uint64_t trials, std::uint64_t seed,
                               bool centered, double eps) {
  validate(inst);
  require(delta > 0.0 && delta < 1.0, ErrorCode::InvalidArgument,
          "check_fast_sl: delta outside (0,1)");
  require(trials >= 1, ErrorCode::InvalidArgument, "check_fast_sl: no trials");

  const std::size_t n = inst.sample_count;
  const double lambda = lambda_fast_sl(inst.loss_bound, static_cast<double>(n));
  const double log_term = (8.0 * inst.loss_bound / static_cast<double>(n)) *
                          std::log(static_cast<double>(inst.n_models()) / delta);
  const auto raw_loss = sl_loss_matrix(inst, false);
  const double star_min =
      *std::min_element(raw_loss[inst.star].begin(), raw_loss[inst.star].end());
  const double tolerance = 2.0 * eps;

  MonteCarloReport report;
  report.name = centered ? "fast_sl_centered" : "fast_sl";
  report.trials = trials;
  report.delta = delta;
  report.worst_slack = kInf;

  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t stream = Rng::stream(seed, 0x51ABu, trial).next_u64();
    const auto dataset = sample_sl_dataset(inst, n, stream);
    const ScoredDmof scored = package_sl(inst, dataset, centered);

    bool violated = false;
    double slack = kInf;
    if (centered) {
      const EddResult decision = edd(scored, lambda, eps);
      const double regret =
          mixture_loss(scored.models[inst.star].loss_row, decision.policy);
      slack = log_term + tolerance - regret;
      violated = slack < 0.0;
    } else {
      const double bound = 3.0 * star_min + log_term;
      const double empirical = eoec(scored, lambda, eps).value;
      const EddResult decision = edd(scored, lambda, eps);
      const double realized =
          mixture_loss(scored.models[inst.star].loss_row, decision.policy);
      slack = std::min(bound + tolerance - empirical,
                       bound + 2.0 * tolerance - realized);
      violated = slack < 0.0;
    }
    report.worst_slack = std::min(report.worst_slack, slack);
    if (violated) ++report.violations;
  }

  report.threshold = three_sigma_threshold(delta, trials);
  report.pass = report.frequency() <= report.threshold;
  report.digest = fnv1a64("fast_sl:" + std::to_string(seed) + ":" +
                          std::to_string(trials) + (centered ? ":c" : ":u"));
  return report;
}

SlSweepResult sl_sweep(const SlInstance& inst, const std::vector<std::size_t>& n_grid,
                       double delta, std::uint64_t trials, std::uint64_t seed,
                       bool centered, double eps, unsigned threads) {
  validate(inst);
  require(!n_grid.empty(), ErrorCode::EmptyGrid, "sl_sweep: empty N grid");
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    require(n_grid[i] > n_grid[i - 1], ErrorCode::InvalidArgument,
            "sl_sweep: N grid must be strictly increasing");
  }
  require(trials >= 1, ErrorCode::InvalidArgument, "sl_sweep: no trials");

  const auto raw_loss = sl_loss_matrix(inst, false);
  const double star_min =
      *std::min_element(raw_loss[inst.star].begin(), raw_loss[inst.star].end());

  SlSweepResult result;
  result.n_grid = n_grid;
  result.rows.resize(n_grid.size() * trials);

  parallel_for(result.rows.size(), threads, [&](std::size_t index) {
    const std::size_t n_idx = index / trials;
    const std::uint64_t trial = index % trials;
    const std::size_t n = n_grid[n_idx];
    const std::uint64_t stream = Rng::stream(seed, 0x51EEu, n, trial).next_u64();

    const auto dataset = sample_sl_dataset(inst, n, stream);
    const ScoredDmof scored = package_sl(inst, dataset, centered);
    const double lambda = lambda_fast_sl(inst.loss_bound, static_cast<double>(n));
    const double log_term = (8.0 * inst.loss_bound / static_cast<double>(n)) *
                            std::log(static_cast<double>(inst.n_models()) / delta);

    SlSweepRow row;
    row.n = n;
    row.trial = trial;
    row.lambda = lambda;
    row.bound = centered ? log_term : 3.0 * star_min + log_term;

    const EddResult decision = edd(scored, lambda, eps);
    row.edd_loss = mixture_loss(scored.models[inst.star].loss_row, decision.policy);
    row.violated = row.edd_loss > row.bound + 2.0 * eps;
    result.rows[index] = row;
  });

  result.means.resize(n_grid.size(), 0.0);
  for (std::size_t n_idx = 0; n_idx < n_grid.size(); ++n_idx) {
    double sum = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
      const SlSweepRow& row = result.rows[n_idx * trials + t];
      sum += row.edd_loss;
      if (row.violated) ++result.violations;
    }
    result.means[n_idx] = sum / static_cast<double>(trials);
  }

  std::vector<double> ns(n_grid.begin(), n_grid.end());
  result.slope_full = loglog_slope(ns, result.means);
  const std::size_t half = n_grid.size() / 2;
  if (n_grid.size() - half >= 2) {
    result.slope_upper_half =
        loglog_slope(std::vector<double>(ns.begin() + half, ns.end()),
                     std::vector<double>(result.means.begin() + half,
                                         result.means.end()));
  } else {
    result.slope_upper_half = result.slope_full;
  }
  return result;
}

}  // namespace dmof
