#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "dmof/generators.hpp"
#include "dmof/rng.hpp"
#include "dmof/supervised.hpp"
#include "game_oracles.hpp"

using namespace dmof;
using dmof_test::grid_min_max;

namespace {

SlInstance toy_sl() {
  SlInstance inst;
  inst.n_x = 3;
  inst.hypothesis_labels = {"h0", "h1"};
  inst.pointwise_loss = {{0.0, 1.0}, {0.5, 0.2}, {1.0, 0.0}};
  inst.model_dists = {make_dist({0.2, 0.5, 0.3}), point_mass(3, 1)};
  inst.sample_count = 8;
  inst.loss_bound = 1.0;
  inst.star = 0;
  validate(inst);
  return inst;
}

}  // namespace

TEST_CASE("sl_loss: exact dot products and degenerate cases") {
  SlInstance inst = toy_sl();
  CHECK(sl_loss(inst, 1, 0) == doctest::Approx(0.5));  // point mass on x1
  CHECK(sl_loss(inst, 0, 1) == doctest::Approx(0.2 * 1.0 + 0.5 * 0.2 + 0.3 * 0.0));

  for (auto& row : inst.pointwise_loss) row.assign(row.size(), 0.0);
  CHECK(sl_loss(inst, 0, 0) == 0.0);
  CHECK_THROWS_AS(sl_loss(inst, 5, 0), Error);
}

TEST_CASE("sl_loss matches a Monte Carlo oracle") {
  const SlInstance inst = gen_sl_testbed({}, 42);
  Rng rng(13);
  const int n = 1'000'000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::size_t x = rng.categorical(inst.model_dists[2].weights());
    const double v = inst.pointwise_loss[x][1];
    sum += v;
    sum_sq += v * v;
  }
  const double mean = sum / n;
  const double sd = std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / n);
  CHECK(std::abs(sl_loss(inst, 2, 1) - mean) <= 3.0 * sd + 1e-6);
}

TEST_CASE("sl dataset sampling: determinism and frequencies") {
  SlInstance inst = toy_sl();

  // point-mass law: all draws identical
  inst.star = 1;
  const auto constant = sample_sl_dataset(inst, 20, 5);
  for (std::size_t x : constant) CHECK(x == 1);

  inst.star = 0;
  const auto a = sample_sl_dataset(inst, 50, 7);
  const auto b = sample_sl_dataset(inst, 50, 7);
  CHECK(a == b);
  CHECK(sample_sl_dataset(inst, 1, 3).size() == 1);

  const std::size_t n = 100'000;
  const auto big = sample_sl_dataset(inst, n, 11);
  std::vector<double> counts(inst.n_x, 0.0);
  for (std::size_t x : big) counts[x] += 1.0;
  for (std::size_t x = 0; x < inst.n_x; ++x) {
    const double expected = inst.model_dists[0][x];
    const double sigma =
        std::sqrt(expected * (1 - expected) / static_cast<double>(n));
    CHECK(std::abs(counts[x] / static_cast<double>(n) - expected) <=
          3.5 * sigma + 1e-4);
  }
}

TEST_CASE("centered loss matrix has a zero per row and stays in range") {
  const SlInstance inst = gen_sl_testbed({}, 99);
  const auto centered = sl_loss_matrix(inst, true);
  for (const auto& row : centered) {
    CHECK(*std::min_element(row.begin(), row.end()) == doctest::Approx(0.0));
    for (double v : row) {
      CHECK(v >= 0.0);
      CHECK(v <= inst.loss_bound + 1e-12);
    }
  }
}

TEST_CASE("edd_sl degenerate cases") {
  // singleton model class: point mass on the argmin hypothesis
  SlInstance lone = toy_sl();
  lone.model_dists.resize(1);
  const auto data = sample_sl_dataset(lone, 8, 21);
  const SlEddResult result = edd_sl(lone, data, 1e-9);
  std::size_t best = 0;
  for (std::size_t h = 1; h < lone.n_hypotheses(); ++h) {
    if (sl_loss(lone, 0, h) < sl_loss(lone, 0, best)) best = h;
  }
  CHECK(result.policy.dist[best] == doctest::Approx(1.0).epsilon(1e-7));

  // two models with identical sample laws: likelihood terms cancel, leaving
  // the plain loss game
  SlInstance twin = toy_sl();
  twin.model_dists = {twin.model_dists[0], twin.model_dists[0]};
  const auto twin_data = sample_sl_dataset(twin, 8, 22);
  const SlEddResult twin_result = edd_sl(twin, twin_data, 1e-9);
  std::vector<std::vector<double>> rows = sl_loss_matrix(twin, false);
  const double plain = solve_zero_sum(PayoffMatrix::from_rows(rows), 1e-10).value;
  const double lambda = lambda_fast_sl(twin.loss_bound, 8);
  const double shared = twin_result.scored.models[0].rel_log_lik;
  CHECK(twin_result.value - lambda * shared == doctest::Approx(plain).epsilon(1e-7));
}

TEST_CASE("edd_sl value matches a simplex-grid oracle") {
  SlTestbedConfig config;
  config.n_hypotheses = 3;
  config.n_models = 4;
  const SlInstance inst = gen_sl_testbed(config, 1234);
  const auto data = sample_sl_dataset(inst, 40, 77);
  const SlEddResult result = edd_sl(inst, data, 1e-10);

  const double lambda = lambda_fast_sl(inst.loss_bound, 40);
  std::vector<std::vector<double>> rows = sl_loss_matrix(inst, false);
  for (std::size_t m = 0; m < inst.n_models(); ++m) {
    for (auto& v : rows[m]) v += lambda * result.scored.models[m].rel_log_lik;
  }
  const double grid = grid_min_max(PayoffMatrix::from_rows(rows), 4000);
  CHECK(std::abs(result.value - grid) <= 1e-3);
}

TEST_CASE("fast supervised bound: degenerate cases never violate") {
  // singleton class
  SlInstance lone = toy_sl();
  lone.model_dists.resize(1);
  lone.star = 0;
  const MonteCarloReport single = check_fast_sl(lone, 0.1, 100, 5, false);
  CHECK(single.violations == 0);

  // all-zero pointwise loss
  SlInstance zero = toy_sl();
  for (auto& row : zero.pointwise_loss) row.assign(row.size(), 0.0);
  const MonteCarloReport flat = check_fast_sl(zero, 0.1, 100, 5, false);
  CHECK(flat.violations == 0);
  const MonteCarloReport flat_centered = check_fast_sl(zero, 0.1, 100, 5, true);
  CHECK(flat_centered.violations == 0);
}

TEST_CASE("edd_sl is invariant to relabeling of the sample space") {
  const SlInstance inst = gen_sl_testbed({}, 31);
  const auto data = sample_sl_dataset(inst, 30, 8);

  // permute X and the dataset consistently
  const std::size_t n_x = inst.n_x;
  std::vector<std::size_t> perm(n_x);
  for (std::size_t i = 0; i < n_x; ++i) perm[i] = (i + 2) % n_x;
  SlInstance relabeled = inst;
  for (std::size_t x = 0; x < n_x; ++x) {
    relabeled.pointwise_loss[perm[x]] = inst.pointwise_loss[x];
  }
  for (std::size_t m = 0; m < inst.n_models(); ++m) {
    std::vector<double> w(n_x);
    for (std::size_t x = 0; x < n_x; ++x) w[perm[x]] = inst.model_dists[m][x];
    relabeled.model_dists[m] = make_dist(std::move(w));
  }
  std::vector<std::size_t> mapped;
  for (std::size_t x : data) mapped.push_back(perm[x]);

  const SlEddResult original = edd_sl(inst, data, 1e-10);
  const SlEddResult twisted = edd_sl(relabeled, mapped, 1e-10);
  CHECK(original.value == doctest::Approx(twisted.value).epsilon(1e-9));
  for (std::size_t h = 0; h < inst.n_hypotheses(); ++h) {
    CHECK(original.policy.dist[h] ==
          doctest::Approx(twisted.policy.dist[h]).epsilon(1e-6));
  }
}
