#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dmof/divergence.hpp"
#include "dmof/games.hpp"
#include "dmof/report.hpp"

namespace dmof {

// --- instance types ---------------------------------------------------------

// Finite decision problem with an enumerable observation space: each model
// carries its data law over observations and one loss row over policies.
struct ExplicitModel {
  FiniteDist obs_dist;
  std::vector<double> loss_row;
};

struct ExplicitDmof {
  std::size_t n_obs = 0;
  std::vector<ExplicitModel> models;
  std::vector<std::string> policy_labels;
  double loss_bound = 0.0;  // B

  std::size_t n_models() const { return models.size(); }
  std::size_t n_policies() const { return policy_labels.size(); }
};

void validate(const ExplicitDmof& problem);

// Instance whose observation space is too large to enumerate: each model
// exposes the relative log-likelihood (nats, shared additive constant
// dropped) of the dataset under consideration plus its loss row. -infinity
// marks a model that assigns the dataset probability zero.
struct ScoredModel {
  std::vector<double> loss_row;
  double rel_log_lik = 0.0;
};

struct ScoredDmof {
  std::vector<ScoredModel> models;
  std::vector<std::string> policy_labels;
  double loss_bound = 0.0;  // B
  std::optional<std::size_t> star_index;

  std::size_t n_models() const { return models.size(); }
  std::size_t n_policies() const { return policy_labels.size(); }
};

void validate(const ScoredDmof& problem);

struct PolicyMixture {
  FiniteDist dist;
};

// The reference set A of the offline estimation coefficient.
using RefDistSet = std::vector<FiniteDist>;

enum class DivergenceKind { H2, TV, KL };

const char* divergence_kind_name(DivergenceKind kind);

// f-divergence together with its refined change-of-measure coefficients.
struct DivergenceSpec {
  DivergenceKind kind = DivergenceKind::H2;
  double gamma1 = 1.0 / 3.0;
  double gamma2 = 4.0;
};

// Standard coefficients: TV (1, 2), H2 (1/3, 4), KL (1/3, 4).
DivergenceSpec divergence_spec(DivergenceKind kind);
void validate(const DivergenceSpec& spec);

double divergence_value(DivergenceKind kind, const FiniteDist& p, const FiniteDist& q);

// --- empirical decision with divergence (EDD) -------------------------------

struct EddResult {
  PolicyMixture policy;
  double value = 0.0;
  GameSolution certificate;               // of the reduced game
  std::vector<std::size_t> active_models;  // surviving model indices
};

// Solves argmin_p max_M [ L(M, p) + lambda * rel_log_lik(M) ] with an
// eps-certified equilibrium. Models with -infinity log-likelihood are
// dropped when lambda > 0 (they never attain the max).
EddResult edd(const ScoredDmof& problem, double lambda, double eps);

struct EoecResult {
  double value = 0.0;
  EddResult solution;
};

// Empirical offline estimation coefficient
//   min_p max_M' [ L(M', p) + lambda * (rel_ll(M') - rel_ll(M*)) ].
EoecResult eoec(const ScoredDmof& problem, double lambda, double eps);

std::vector<std::pair<double, double>> eoec_lambda_sweep(
    const ScoredDmof& problem, const std::vector<double>& lambdas, double eps);

// Asserts L(M*, edd(lambda)) <= eoec(lambda) + 2 eps.
CheckReport check_edd_loss_bound(const ScoredDmof& problem, double lambda, double eps);

// --- offline estimation coefficient and lower bound -------------------------

struct OecResult {
  double value = -kInf;  // max over rho of the certified inner game value
  std::vector<double> per_ref_values;
  std::size_t argmax_ref = 0;
  bool any_empty_game = false;  // some rho dropped every model (KL only)
};

// sup_{rho in A} min_p max_M [ L(M, p) - lambda * D(rho, P_M) ]. Models with
// an infinite divergence offset are dropped per rho.
OecResult oec(const ExplicitDmof& problem, const RefDistSet& refs,
              const DivergenceSpec& spec, double lambda, double eps);

struct MinimaxResult {
  double value = 0.0;
  std::vector<FiniteDist> kernel;  // per observation, mixture over policies
  FiniteDist adversary;            // mixture over models
  double gap = 0.0;
};

// Exact value of inf over dataset-to-decision kernels of the worst-case
// expected loss, via column generation over deterministic kernels with
// closed-form best responses. Certified: gap <= eps.
MinimaxResult minimax_algorithm_value(const ExplicitDmof& problem, double eps,
                                      std::size_t cap = kEnumerationCap);

// Asserts minimax_algorithm_value >= gamma1 * OEC_{gamma2 * B} - 2 eps.
CheckReport check_minimax_lower_bound(const ExplicitDmof& problem,
                                      const RefDistSet& refs,
                                      const DivergenceSpec& spec, double eps);

// Builds the dataset view of an explicit instance after observing `obs`:
// rel_log_lik(M) = log P_M(obs).
ScoredDmof scored_from_observation(const ExplicitDmof& problem, std::size_t obs,
                                   std::size_t star);

// Monte Carlo check of the concentration bound
//   EOEC_lambda(M*, M, D) <= OEC_lambda(M, {P_M*}) + 2 lambda log(|M|/delta)
// over `trials` single-observation datasets drawn from P_M*.
MonteCarloReport check_eoec_concentration(const ExplicitDmof& problem,
                                          std::size_t star, double lambda,
                                          double delta, std::uint64_t trials,
                                          std::uint64_t seed, double eps);

// --- fast-rate schedules -----------------------------------------------------

// 400 B C log(2H) / N (natural log).
double lambda_fast_sq(double loss_bound, double coverage, double horizon, double n);

// 4 B / N.
double lambda_fast_sl(double loss_bound, double n);

// Loss of a mixture against one model's loss row.
double mixture_loss(const std::vector<double>& loss_row, const PolicyMixture& policy);

}  // namespace dmof
