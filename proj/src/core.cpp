#include "dmof/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "dmof/rng.hpp"
#include "json.hpp"

namespace dmof {

namespace {

using nlohmann::json;

void check_loss_row(const std::vector<double>& row, std::size_t n_policies,
                    double bound, const char* where) {
  require(row.size() == n_policies, ErrorCode::LengthMismatch,
          std::string(where) + ": loss row length != #policies");
  for (double v : row) {
    require(std::isfinite(v), ErrorCode::NonFinite,
            std::string(where) + ": non-finite loss entry");
    require(v >= -1e-12 && v <= bound + 1e-9, ErrorCode::RangeViolation,
            std::string(where) + ": loss entry outside [0, B]");
  }
}

}  // namespace

void validate(const ExplicitDmof& problem) {
  require(problem.n_obs >= 1, ErrorCode::Empty, "explicit instance: n_obs == 0");
  require(!problem.models.empty(), ErrorCode::Empty, "explicit instance: no models");
  require(!problem.policy_labels.empty(), ErrorCode::Empty,
          "explicit instance: no policies");
  require(problem.loss_bound > 0.0, ErrorCode::NonPositiveArgument,
          "explicit instance: B must be positive");
  for (const auto& model : problem.models) {
    require(model.obs_dist.size() == problem.n_obs, ErrorCode::LengthMismatch,
            "explicit instance: obs_dist length != n_obs");
    check_loss_row(model.loss_row, problem.n_policies(), problem.loss_bound,
                   "explicit instance");
  }
}

void validate(const ScoredDmof& problem) {
  require(!problem.models.empty(), ErrorCode::Empty, "scored instance: no models");
  require(!problem.policy_labels.empty(), ErrorCode::Empty,
          "scored instance: no policies");
  require(problem.loss_bound > 0.0, ErrorCode::NonPositiveArgument,
          "scored instance: B must be positive");
  for (const auto& model : problem.models) {
    check_loss_row(model.loss_row, problem.n_policies(), problem.loss_bound,
                   "scored instance");
    require(std::isfinite(model.rel_log_lik) || model.rel_log_lik == -kInf,
            ErrorCode::NonFinite,
            "scored instance: rel_log_lik must be finite or -infinity");
  }
  if (problem.star_index) {
    require(*problem.star_index < problem.models.size(), ErrorCode::IndexOutOfRange,
            "scored instance: star index out of range");
  }
}

const char* divergence_kind_name(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::H2: return "H2";
    case DivergenceKind::TV: return "TV";
    case DivergenceKind::KL: return "KL";
  }
  return "?";
}

DivergenceSpec divergence_spec(DivergenceKind kind) {
  switch (kind) {
    case DivergenceKind::TV: return {DivergenceKind::TV, 1.0, 2.0};
    case DivergenceKind::H2: return {DivergenceKind::H2, 1.0 / 3.0, 4.0};
    case DivergenceKind::KL: return {DivergenceKind::KL, 1.0 / 3.0, 4.0};
  }
  fail(ErrorCode::InvalidArgument, "divergence_spec: unknown kind");
}

void validate(const DivergenceSpec& spec) {
  const DivergenceSpec expected = divergence_spec(spec.kind);
  require(spec.gamma1 == expected.gamma1 && spec.gamma2 == expected.gamma2,
          ErrorCode::InvalidArgument,
          "DivergenceSpec: coefficients do not match the divergence kind");
}

double divergence_value(DivergenceKind kind, const FiniteDist& p, const FiniteDist& q) {
  switch (kind) {
    case DivergenceKind::H2: return hellinger_sq(p, q);
    case DivergenceKind::TV: return tv(p, q);
    case DivergenceKind::KL: return kl(p, q);
  }
  fail(ErrorCode::InvalidArgument, "divergence_value: unknown kind");
}

double mixture_loss(const std::vector<double>& loss_row, const PolicyMixture& policy) {
  require(loss_row.size() == policy.dist.size(), ErrorCode::LengthMismatch,
          "mixture_loss: length mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < loss_row.size(); ++j) {
    acc += loss_row[j] * policy.dist[j];
  }
  return acc;
}

EddResult edd(const ScoredDmof& problem, double lambda, double eps) {
  validate(problem);
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "edd: lambda must be >= 0");

  std::vector<std::size_t> active;
  for (std::size_t m = 0; m < problem.models.size(); ++m) {
    // 0 * (-inf) = 0: with lambda == 0 impossible models still compete on loss.
    if (lambda == 0.0 || std::isfinite(problem.models[m].rel_log_lik)) {
      active.push_back(m);
    }
  }
  require(!active.empty(), ErrorCode::AllModelsImpossible,
          "edd: every model assigns the dataset probability zero");

  const std::size_t n_policies = problem.n_policies();
  double shift = -kInf;  // conditioning: solve with payoffs shifted near zero
  for (std::size_t m : active) {
    const double s = lambda == 0.0 ? 0.0 : lambda * problem.models[m].rel_log_lik;
    shift = std::max(shift, s);
  }

  PayoffMatrix reduced;
  reduced.rows = active.size();
  reduced.cols = n_policies;
  reduced.entries.reserve(reduced.rows * reduced.cols);
  PayoffMatrix shifted = reduced;
  for (std::size_t m : active) {
    const auto& model = problem.models[m];
    const double offset = lambda == 0.0 ? 0.0 : lambda * model.rel_log_lik;
    for (std::size_t j = 0; j < n_policies; ++j) {
      reduced.entries.push_back(model.loss_row[j] + offset);
      shifted.entries.push_back(model.loss_row[j] + offset - shift);
    }
  }

  const GameSolution inner = solve_zero_sum(shifted, eps);
  GameSolution certificate =
      certified_from_mixtures(reduced, inner.col_mixture, inner.row_mixture);
  require(certificate.gap <= eps, ErrorCode::Timeout,
          "edd: certification failed on the unshifted game");

  EddResult result;
  result.policy = PolicyMixture{certificate.col_mixture};
  result.value = certificate.value;
  result.certificate = std::move(certificate);
  result.active_models = std::move(active);
  return result;
}

EoecResult eoec(const ScoredDmof& problem, double lambda, double eps) {
  validate(problem);
  require(problem.star_index.has_value(), ErrorCode::MissingStar,
          "eoec: star index not set");
  const double star_ll = problem.models[*problem.star_index].rel_log_lik;
  require(std::isfinite(star_ll), ErrorCode::MissingStar,
          "eoec: star model has -infinity log-likelihood");

  // The ratio form is the EDD game with every log-likelihood shifted by
  // -rel_ll(M*); solving the recentred instance keeps the certificate tight.
  ScoredDmof centered = problem;
  for (auto& model : centered.models) {
    if (std::isfinite(model.rel_log_lik)) model.rel_log_lik -= star_ll;
  }
  EddResult solution = edd(centered, lambda, eps);
  return EoecResult{solution.value, std::move(solution)};
}

std::vector<std::pair<double, double>> eoec_lambda_sweep(
    const ScoredDmof& problem, const std::vector<double>& lambdas, double eps) {
  std::vector<std::pair<double, double>> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    out.emplace_back(lambda, eoec(problem, lambda, eps).value);
  }
  return out;
}

CheckReport check_edd_loss_bound(const ScoredDmof& problem, double lambda, double eps) {
  require(problem.star_index.has_value(), ErrorCode::MissingStar,
          "check_edd_loss_bound: star index not set");
  const std::size_t star = *problem.star_index;

  const EddResult decision = edd(problem, lambda, eps);
  const EoecResult bound = eoec(problem, lambda, eps);

  CheckReport report;
  report.name = "edd_loss_bound";
  report.lhs = mixture_loss(problem.models[star].loss_row, decision.policy);
  report.rhs = bound.value;
  report.tolerance = 2.0 * eps;
  report.pass = report.lhs <= report.rhs + report.tolerance;
  if (!report.pass) {
    json dump;
    dump["lambda"] = lambda;
    dump["star"] = star;
    dump["lhs"] = report.lhs;
    dump["rhs"] = report.rhs;
    for (const auto& model : problem.models) {
      dump["loss_rows"].push_back(model.loss_row);
      dump["rel_log_lik"].push_back(model.rel_log_lik);
    }
    report.detail = dump.dump();
  }
  return report;
}

OecResult oec(const ExplicitDmof& problem, const RefDistSet& refs,
              const DivergenceSpec& spec, double lambda, double eps) {
  validate(problem);
  validate(spec);
  require(!refs.empty(), ErrorCode::Empty, "oec: reference set is empty");
  require(lambda >= 0.0, ErrorCode::InvalidArgument, "oec: lambda must be >= 0");

  OecResult result;
  result.per_ref_values.reserve(refs.size());
  for (std::size_t r = 0; r < refs.size(); ++r) {
    const FiniteDist& rho = refs[r];
    require(rho.size() == problem.n_obs, ErrorCode::LengthMismatch,
            "oec: reference distribution length != n_obs");

    std::vector<std::vector<double>> rows;
    for (const auto& model : problem.models) {
      const double offset =
          lambda == 0.0 ? 0.0
                        : lambda * divergence_value(spec.kind, rho, model.obs_dist);
      if (!std::isfinite(offset)) continue;  // KL: model unreachable from rho
      auto row = model.loss_row;
      for (auto& v : row) v -= offset;
      rows.push_back(std::move(row));
    }

    double value;
    if (rows.empty()) {
      result.any_empty_game = true;
      value = -kInf;
    } else {
      value = solve_zero_sum(PayoffMatrix::from_rows(rows), eps).value;
    }
    result.per_ref_values.push_back(value);
    if (value > result.value) {
      result.value = value;
      result.argmax_ref = r;
    }
  }
  return result;
}

namespace {

using Kernel = std::vector<std::size_t>;  // observation -> policy

// Best deterministic kernel against a model mixture, with its exact value
// sum_o min_pi sum_M q_M P_M(o) L(M, pi); ties to the lowest policy index.
std::pair<Kernel, double> best_kernel(const ExplicitDmof& problem,
                                      const FiniteDist& q) {
  const std::size_t n_p = problem.n_policies();
  Kernel kernel(problem.n_obs, 0);
  double total = 0.0;
  for (std::size_t o = 0; o < problem.n_obs; ++o) {
    double best = kInf;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < n_p; ++j) {
      double c = 0.0;
      for (std::size_t m = 0; m < problem.n_models(); ++m) {
        c += q[m] * problem.models[m].obs_dist[o] * problem.models[m].loss_row[j];
      }
      if (c < best) {
        best = c;
        arg = j;
      }
    }
    kernel[o] = arg;
    total += best;
  }
  return {std::move(kernel), total};
}

double kernel_payoff(const ExplicitDmof& problem, std::size_t model,
                     const Kernel& kernel) {
  const auto& m = problem.models[model];
  double acc = 0.0;
  for (std::size_t o = 0; o < problem.n_obs; ++o) {
    acc += m.obs_dist[o] * m.loss_row[kernel[o]];
  }
  return acc;
}

}  // namespace

MinimaxResult minimax_algorithm_value(const ExplicitDmof& problem, double eps,
                                      std::size_t cap) {
  validate(problem);
  require(problem.n_obs * problem.n_policies() <= cap,
          ErrorCode::EnumerationCapExceeded,
          "minimax_algorithm_value: kernel space exceeds enumeration cap");

  const std::size_t n_m = problem.n_models();
  const std::size_t n_o = problem.n_obs;
  const std::size_t n_p = problem.n_policies();

  // Column generation over deterministic kernels: the adversary mixes over
  // models, the column player over kernels; the per-observation closed form
  // generates a most-violating kernel for any adversary mixture.
  std::vector<Kernel> working;
  std::set<Kernel> seen;
  {
    auto [kernel, ignored] = best_kernel(problem, uniform_dist(n_m));
    seen.insert(kernel);
    working.push_back(std::move(kernel));
  }

  const int max_rounds = 100000;
  for (int round = 0; round < max_rounds; ++round) {
    PayoffMatrix restricted;
    restricted.rows = n_m;
    restricted.cols = working.size();
    restricted.entries.resize(n_m * working.size());
    for (std::size_t m = 0; m < n_m; ++m) {
      for (std::size_t w = 0; w < working.size(); ++w) {
        restricted.at(m, w) = kernel_payoff(problem, m, working[w]);
      }
    }
    const GameSolution sol = solve_zero_sum(restricted, std::min(eps / 4.0, 1e-9));

    auto [challenger, dual_value] = best_kernel(problem, sol.row_mixture);

    // Primal kernel: per-observation mixture over policies.
    std::vector<std::vector<double>> kernel_weights(n_o, std::vector<double>(n_p, 0.0));
    for (std::size_t w = 0; w < working.size(); ++w) {
      const double weight = sol.col_mixture[w];
      if (weight == 0.0) continue;
      for (std::size_t o = 0; o < n_o; ++o) {
        kernel_weights[o][working[w][o]] += weight;
      }
    }

    double primal_value = -kInf;
    for (std::size_t m = 0; m < n_m; ++m) {
      double acc = 0.0;
      for (std::size_t o = 0; o < n_o; ++o) {
        double row = 0.0;
        for (std::size_t j = 0; j < n_p; ++j) {
          row += kernel_weights[o][j] * problem.models[m].loss_row[j];
        }
        acc += problem.models[m].obs_dist[o] * row;
      }
      primal_value = std::max(primal_value, acc);
    }

    const double gap = primal_value - dual_value;
    if (gap <= eps) {
      MinimaxResult result;
      result.value = 0.5 * (primal_value + dual_value);
      result.gap = std::max(0.0, gap);
      result.adversary = sol.row_mixture;
      result.kernel.reserve(n_o);
      for (auto& weights : kernel_weights) {
        result.kernel.push_back(make_dist(std::move(weights)));
      }
      CertificationAudit::instance().record(result.gap, eps, true);
      return result;
    }
    if (!seen.insert(challenger).second) {
      fail(ErrorCode::Timeout,
           "minimax_algorithm_value: stalled before reaching the target gap");
    }
    working.push_back(std::move(challenger));
  }
  fail(ErrorCode::Timeout, "minimax_algorithm_value: round cap exceeded");
}

CheckReport check_minimax_lower_bound(const ExplicitDmof& problem,
                                      const RefDistSet& refs,
                                      const DivergenceSpec& spec, double eps) {
  validate(spec);
  const MinimaxResult algo = minimax_algorithm_value(problem, eps);
  const OecResult coefficient =
      oec(problem, refs, spec, spec.gamma2 * problem.loss_bound, eps);

  CheckReport report;
  report.name = std::string("minimax_lower_bound_") + divergence_kind_name(spec.kind);
  report.lhs = spec.gamma1 * coefficient.value;
  report.rhs = algo.value;
  report.tolerance = 2.0 * eps;
  report.pass = report.lhs <= report.rhs + report.tolerance;
  if (!report.pass) {
    json dump;
    dump["divergence"] = divergence_kind_name(spec.kind);
    dump["minimax_value"] = algo.value;
    dump["oec"] = coefficient.value;
    dump["B"] = problem.loss_bound;
    for (const auto& model : problem.models) {
      dump["obs_dists"].push_back(model.obs_dist.weights());
      dump["loss_rows"].push_back(model.loss_row);
    }
    report.detail = dump.dump();
  }
  return report;
}

ScoredDmof scored_from_observation(const ExplicitDmof& problem, std::size_t obs,
                                   std::size_t star) {
  validate(problem);
  require(obs < problem.n_obs, ErrorCode::IndexOutOfRange,
          "scored_from_observation: observation out of range");
  require(star < problem.n_models(), ErrorCode::IndexOutOfRange,
          "scored_from_observation: star out of range");

  ScoredDmof scored;
  scored.policy_labels = problem.policy_labels;
  scored.loss_bound = problem.loss_bound;
  scored.star_index = star;
  scored.models.reserve(problem.n_models());
  for (const auto& model : problem.models) {
    const double p = model.obs_dist[obs];
    scored.models.push_back(
        ScoredModel{model.loss_row, p > 0.0 ? std::log(p) : -kInf});
  }
  return scored;
}

MonteCarloReport check_eoec_concentration(const ExplicitDmof& problem,
                                          std::size_t star, double lambda,
                                          double delta, std::uint64_t trials,
                                          std::uint64_t seed, double eps) {
  validate(problem);
  require(star < problem.n_models(), ErrorCode::IndexOutOfRange,
          "check_eoec_concentration: star out of range");
  require(delta > 0.0 && delta < 1.0, ErrorCode::InvalidArgument,
          "check_eoec_concentration: delta outside (0,1)");
  require(trials >= 1, ErrorCode::InvalidArgument,
          "check_eoec_concentration: trials == 0");

  const RefDistSet refs{problem.models[star].obs_dist};
  const double oec_value =
      oec(problem, refs, divergence_spec(DivergenceKind::H2), lambda, eps).value;
  const double slack_term =
      2.0 * lambda * std::log(static_cast<double>(problem.n_models()) / delta);
  const double bound = oec_value + slack_term;
  const double tolerance = 2.0 * eps;

  MonteCarloReport report;
  report.name = "eoec_concentration";
  report.trials = trials;
  report.delta = delta;
  report.worst_slack = kInf;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(seed, 0xec01u, trial);
    const std::size_t obs =
        rng.categorical(problem.models[star].obs_dist.weights());
    const ScoredDmof scored = scored_from_observation(problem, obs, star);
    const double empirical = eoec(scored, lambda, eps).value;
    const double slack = bound + tolerance - empirical;
    report.worst_slack = std::min(report.worst_slack, slack);
    if (slack < 0.0) ++report.violations;
  }
  report.threshold = three_sigma_threshold(delta, trials);
  report.pass = report.frequency() <= report.threshold;
  report.digest = fnv1a64("eoec_concentration:" + std::to_string(seed) + ":" +
                          std::to_string(lambda) + ":" + std::to_string(trials));
  return report;
}

double lambda_fast_sq(double loss_bound, double coverage, double horizon, double n) {
  require(loss_bound > 0.0 && coverage > 0.0 && horizon > 0.0 && n > 0.0,
          ErrorCode::NonPositiveArgument, "lambda_fast_sq: arguments must be positive");
  return 400.0 * loss_bound * coverage * std::log(2.0 * horizon) / n;
}

double lambda_fast_sl(double loss_bound, double n) {
  require(loss_bound > 0.0 && n > 0.0, ErrorCode::NonPositiveArgument,
          "lambda_fast_sl: arguments must be positive");
  return 4.0 * loss_bound / n;
}

}  // namespace dmof
