#include "dmof/lemmalab.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmof/generators.hpp"
#include "dmof/rng.hpp"
#include "json.hpp"

namespace dmof {

namespace {

void check_range(const std::vector<double>& f, double lo, double hi, const char* where) {
  for (double v : f) {
    require(std::isfinite(v) && v >= lo - 1e-12 && v <= hi + 1e-12,
            ErrorCode::RangeViolation, std::string(where) + ": value outside range");
  }
}

std::string com_detail(const FiniteDist& p, const FiniteDist& q,
                       const std::vector<double>& f, double bound) {
  nlohmann::json dump;
  dump["p"] = p.weights();
  dump["q"] = q.weights();
  dump["f"] = f;
  dump["bound"] = bound;
  return dump.dump();
}

}  // namespace

void validate(const MarkovChainPair& pair, std::uint64_t cap) {
  require(pair.sizes.size() >= 2, ErrorCode::InvalidArgument,
          "chain pair: need at least two factors (log(1) = 0 is vacuous)");
  require(pair.p_kernels.size() == pair.sizes.size() &&
              pair.q_kernels.size() == pair.sizes.size(),
          ErrorCode::LengthMismatch, "chain pair: kernel count != factor count");
  std::uint64_t prefix = 1;
  for (std::size_t i = 0; i < pair.sizes.size(); ++i) {
    require(pair.sizes[i] >= 1, ErrorCode::Empty, "chain pair: empty alphabet");
    require(pair.p_kernels[i].size() == prefix && pair.q_kernels[i].size() == prefix,
            ErrorCode::LengthMismatch, "chain pair: kernel row count != prefix count");
    for (const auto& row : pair.p_kernels[i]) {
      require(row.size() == pair.sizes[i], ErrorCode::LengthMismatch,
              "chain pair: kernel row length mismatch");
    }
    for (const auto& row : pair.q_kernels[i]) {
      require(row.size() == pair.sizes[i], ErrorCode::LengthMismatch,
              "chain pair: kernel row length mismatch");
    }
    require(prefix <= cap / pair.sizes[i], ErrorCode::EnumerationCapExceeded,
            "chain pair: joint space exceeds enumeration cap");
    prefix *= pair.sizes[i];
  }
}

CheckReport check_tv_change_of_measure(const FiniteDist& p, const FiniteDist& q,
                                       const std::vector<double>& f, double beta) {
  require(beta > 0.0, ErrorCode::NonPositiveArgument, "tv com: beta must be positive");
  check_range(f, 0.0, beta, "tv com");
  CheckReport report;
  report.name = "tv_change_of_measure";
  report.lhs = std::abs(expectation(p, f) - expectation(q, f));
  report.rhs = 2.0 * beta * tv(p, q);
  report.tolerance = 1e-12;
  report.pass = report.lhs <= report.rhs + report.tolerance;
  if (!report.pass) report.detail = com_detail(p, q, f, beta);
  return report;
}

CheckReport check_h2_change_of_measure(const FiniteDist& p, const FiniteDist& q,
                                       const std::vector<double>& g, double bound) {
  require(bound > 0.0, ErrorCode::NonPositiveArgument, "h2 com: B must be positive");
  check_range(g, 0.0, bound, "h2 com");
  CheckReport report;
  report.name = "h2_change_of_measure";
  report.lhs = expectation(p, g);
  report.rhs = 3.0 * expectation(q, g) + 4.0 * bound * hellinger_sq(p, q);
  report.tolerance = 1e-12;
  report.pass = report.lhs <= report.rhs + report.tolerance;
  if (!report.pass) report.detail = com_detail(p, q, g, bound);
  return report;
}

CheckReport check_refined_change_of_measure(const DivergenceSpec& spec,
                                            const FiniteDist& p, const FiniteDist& q,
                                            const std::vector<double>& g, double bound) {
  validate(spec);
  require(bound > 0.0, ErrorCode::NonPositiveArgument, "refined com: B must be positive");
  check_range(g, 0.0, bound, "refined com");
  const double divergence = divergence_value(spec.kind, p, q);

  CheckReport report;
  report.name = std::string("refined_com_") + divergence_kind_name(spec.kind);
  report.tolerance = 1e-12;
  if (!std::isfinite(divergence)) {
    // KL infinite: the right side is -infinity and the inequality is vacuous.
    report.lhs = -kInf;
    report.rhs = expectation(p, g);
    report.pass = true;
    return report;
  }
  // Rearranged as lhs <= rhs: gamma1 (E_Q g - gamma2 B D) <= E_P g.
  report.lhs = spec.gamma1 * (expectation(q, g) - spec.gamma2 * bound * divergence);
  report.rhs = expectation(p, g);
  report.pass = report.lhs <= report.rhs + report.tolerance;
  if (!report.pass) report.detail = com_detail(p, q, g, bound);
  return report;
}

namespace {

struct JointExpansion {
  std::vector<double> p;
  std::vector<double> q;
  double conditional_term = 0.0;  // E_P sum_i H2(P_i(.|prefix), Q_i(.|prefix))
};

JointExpansion expand_chain(const MarkovChainPair& pair) {
  JointExpansion out;
  out.p = {1.0};
  out.q = {1.0};
  for (std::size_t i = 0; i < pair.n_factors(); ++i) {
    const std::size_t prefix_count = out.p.size();
    const std::size_t k = pair.sizes[i];
    for (std::size_t r = 0; r < prefix_count; ++r) {
      if (out.p[r] > 0.0) {
        out.conditional_term +=
            out.p[r] * hellinger_sq(pair.p_kernels[i][r], pair.q_kernels[i][r]);
      }
    }
    std::vector<double> p_next(prefix_count * k), q_next(prefix_count * k);
    for (std::size_t r = 0; r < prefix_count; ++r) {
      for (std::size_t x = 0; x < k; ++x) {
        p_next[r * k + x] = out.p[r] * pair.p_kernels[i][r][x];
        q_next[r * k + x] = out.q[r] * pair.q_kernels[i][r][x];
      }
    }
    out.p = std::move(p_next);
    out.q = std::move(q_next);
  }
  return out;
}

}  // namespace

CheckReport check_subadditivity(const MarkovChainPair& pair, std::uint64_t cap) {
  validate(pair, cap);
  const JointExpansion joint = expand_chain(pair);

  double joint_h2 = 0.0;
  for (std::size_t i = 0; i < joint.p.size(); ++i) {
    const double d = std::sqrt(joint.p[i]) - std::sqrt(joint.q[i]);
    joint_h2 += d * d;
  }

  CheckReport report;
  report.name = "h2_subadditivity";
  report.lhs = joint_h2;
  report.rhs = 100.0 * std::log(static_cast<double>(pair.n_factors())) *
               joint.conditional_term;
  report.tolerance = 1e-12;
  report.pass = report.lhs <= report.rhs + report.tolerance;
  if (!report.pass) {
    nlohmann::json dump;
    dump["sizes"] = pair.sizes;
    dump["lhs"] = report.lhs;
    dump["rhs"] = report.rhs;
    report.detail = dump.dump();
  }
  return report;
}

MonteCarloReport check_loglik_bound(const std::vector<FiniteDist>& dist_class,
                                    std::size_t star, double delta,
                                    std::uint64_t trials, std::uint64_t seed) {
  require(!dist_class.empty(), ErrorCode::Empty, "loglik bound: empty class");
  require(star < dist_class.size(), ErrorCode::IndexOutOfRange,
          "loglik bound: star out of range");
  require(delta > 0.0 && delta <= 1.0, ErrorCode::InvalidArgument,
          "loglik bound: delta outside (0,1]");
  const FiniteDist& true_dist = dist_class[star];
  const double budget =
      2.0 * std::log(static_cast<double>(dist_class.size()) / delta);

  std::vector<double> h2(dist_class.size());
  for (std::size_t i = 0; i < dist_class.size(); ++i) {
    h2[i] = hellinger_sq(true_dist, dist_class[i]);
  }

  MonteCarloReport report;
  report.name = "loglik_union_bound";
  report.trials = trials;
  report.delta = delta;
  report.worst_slack = kInf;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(seed, 0x11AAu, trial);
    const std::size_t x = rng.categorical(true_dist.weights());
    bool violated = false;
    for (std::size_t i = 0; i < dist_class.size(); ++i) {
      const double ratio =
          dist_class[i][x] == 0.0
              ? -kInf
              : std::log(dist_class[i][x]) - std::log(true_dist[x]);
      const double lhs = ratio + h2[i];  // -log(p*(x)/p(x)) = log(p(x)/p*(x))
      report.worst_slack = std::min(report.worst_slack, budget - lhs);
      if (lhs > budget) violated = true;
    }
    if (violated) ++report.violations;
  }
  report.threshold = three_sigma_threshold(delta, trials);
  report.pass = report.frequency() <= report.threshold;
  report.digest = fnv1a64("loglik_bound:" + std::to_string(seed) + ":" +
                          std::to_string(trials));
  return report;
}

MonteCarloReport check_loglik_iid(const std::vector<FiniteDist>& dist_class,
                                  std::size_t star, std::size_t n, double delta,
                                  std::uint64_t trials, std::uint64_t seed) {
  require(!dist_class.empty(), ErrorCode::Empty, "loglik iid: empty class");
  require(star < dist_class.size(), ErrorCode::IndexOutOfRange,
          "loglik iid: star out of range");
  require(n >= 1, ErrorCode::InvalidArgument, "loglik iid: N must be >= 1");
  const FiniteDist& true_dist = dist_class[star];
  const double budget =
      2.0 * std::log(static_cast<double>(dist_class.size()) / delta);

  std::vector<double> h2(dist_class.size());
  for (std::size_t i = 0; i < dist_class.size(); ++i) {
    h2[i] = hellinger_sq(true_dist, dist_class[i]);
  }

  MonteCarloReport report;
  report.name = "loglik_union_bound_iid";
  report.trials = trials;
  report.delta = delta;
  report.worst_slack = kInf;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(seed, 0x11ABu, trial);
    std::vector<double> log_ratio(dist_class.size(), 0.0);  // sum log(p'/p*)
    for (std::size_t draw = 0; draw < n; ++draw) {
      const std::size_t x = rng.categorical(true_dist.weights());
      for (std::size_t i = 0; i < dist_class.size(); ++i) {
        log_ratio[i] += dist_class[i][x] == 0.0
                            ? -kInf
                            : std::log(dist_class[i][x]) - std::log(true_dist[x]);
      }
    }
    bool violated = false;
    for (std::size_t i = 0; i < dist_class.size(); ++i) {
      const double lhs = log_ratio[i] + static_cast<double>(n) * h2[i];
      report.worst_slack = std::min(report.worst_slack, budget - lhs);
      if (lhs > budget) violated = true;
    }
    if (violated) ++report.violations;
  }
  report.threshold = three_sigma_threshold(delta, trials);
  report.pass = report.frequency() <= report.threshold;
  report.digest = fnv1a64("loglik_iid:" + std::to_string(seed) + ":" +
                          std::to_string(n) + ":" + std::to_string(trials));
  return report;
}

MonteCarloReport check_loglik_iid_cond(const std::vector<FiniteDist>& joint_class,
                                       std::size_t n1, std::size_t n2,
                                       std::size_t star, std::size_t n, double delta,
                                       std::uint64_t trials, std::uint64_t seed) {
  require(!joint_class.empty(), ErrorCode::Empty, "loglik cond: empty class");
  require(star < joint_class.size(), ErrorCode::IndexOutOfRange,
          "loglik cond: star out of range");
  require(n >= 1, ErrorCode::InvalidArgument, "loglik cond: N must be >= 1");
  for (const auto& joint : joint_class) {
    require(joint.size() == n1 * n2, ErrorCode::LengthMismatch,
            "loglik cond: joint size != n1 * n2");
  }

  // Conditionals p(x2 | x1) per model; rows with zero marginal fall back to
  // uniform (they are never reached from a positive-weight prefix below).
  const std::size_t n_models = joint_class.size();
  std::vector<std::vector<double>> marginal(n_models, std::vector<double>(n1, 0.0));
  std::vector<std::vector<double>> conditional(n_models,
                                               std::vector<double>(n1 * n2, 0.0));
  for (std::size_t i = 0; i < n_models; ++i) {
    for (std::size_t a = 0; a < n1; ++a) {
      double mass = 0.0;
      for (std::size_t b = 0; b < n2; ++b) mass += joint_class[i][a * n2 + b];
      marginal[i][a] = mass;
      for (std::size_t b = 0; b < n2; ++b) {
        conditional[i][a * n2 + b] =
            mass > 0.0 ? joint_class[i][a * n2 + b] / mass : 1.0 / n2;
      }
    }
  }

  // Per-sample conditional divergence term: expectation over the data law's
  // X1 marginal (the law the Chernoff argument integrates against) of the
  // conditional squared Hellinger distances.
  std::vector<double> cond_h2(n_models, 0.0);
  for (std::size_t i = 0; i < n_models; ++i) {
    for (std::size_t a = 0; a < n1; ++a) {
      if (marginal[star][a] == 0.0) continue;
      double h2 = 0.0;
      for (std::size_t b = 0; b < n2; ++b) {
        const double d = std::sqrt(conditional[star][a * n2 + b]) -
                         std::sqrt(conditional[i][a * n2 + b]);
        h2 += d * d;
      }
      cond_h2[i] += marginal[star][a] * h2;
    }
  }

  const double budget = 2.0 * std::log(static_cast<double>(n_models) / delta);

  MonteCarloReport report;
  report.name = "loglik_union_bound_iid_cond";
  report.trials = trials;
  report.delta = delta;
  report.worst_slack = kInf;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng = Rng::stream(seed, 0x11ACu, trial);
    std::vector<double> log_ratio(n_models, 0.0);
    for (std::size_t draw = 0; draw < n; ++draw) {
      const std::size_t cell = rng.categorical(joint_class[star].weights());
      for (std::size_t i = 0; i < n_models; ++i) {
        const double p_star = conditional[star][cell];
        const double p_alt = conditional[i][cell];
        log_ratio[i] +=
            p_alt == 0.0 ? -kInf : std::log(p_alt) - std::log(p_star);
      }
    }
    bool violated = false;
    for (std::size_t i = 0; i < n_models; ++i) {
      const double lhs = log_ratio[i] + static_cast<double>(n) * cond_h2[i];
      report.worst_slack = std::min(report.worst_slack, budget - lhs);
      if (lhs > budget) violated = true;
    }
    if (violated) ++report.violations;
  }
  report.threshold = three_sigma_threshold(delta, trials);
  report.pass = report.frequency() <= report.threshold;
  report.digest = fnv1a64("loglik_iid_cond:" + std::to_string(seed) + ":" +
                          std::to_string(n) + ":" + std::to_string(trials));
  return report;
}

CheckReport check_donsker_varadhan(const FiniteDist& pi, const std::vector<double>& h,
                                   const std::vector<FiniteDist>& rho_grid,
                                   double equality_tol) {
  require(pi.size() == h.size(), ErrorCode::LengthMismatch,
          "donsker_varadhan: h length mismatch");
  for (std::size_t i = 0; i < pi.size(); ++i) {
    require(pi[i] > 0.0, ErrorCode::InvalidArgument,
            "donsker_varadhan: pi must have full support");
  }

  double log_mgf = 0.0;
  {
    double acc = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) acc += pi[i] * std::exp(h[i]);
    log_mgf = std::log(acc);
  }

  CheckReport report;
  report.name = "donsker_varadhan";
  report.tolerance = 1e-9;
  report.pass = true;
  report.lhs = -kInf;  // worst (largest) violation of E_rho h - log mgf <= KL
  report.rhs = 0.0;

  auto inspect = [&](const FiniteDist& rho) {
    const double lower = expectation(rho, h) - log_mgf;
    const double divergence = kl(rho, pi);
    if (lower - divergence > report.lhs - report.rhs) {
      report.lhs = lower;
      report.rhs = divergence;
    }
    if (lower > divergence + report.tolerance) report.pass = false;
  };
  for (const auto& rho : rho_grid) {
    require(rho.size() == pi.size(), ErrorCode::LengthMismatch,
            "donsker_varadhan: rho length mismatch");
    inspect(rho);
  }

  // Gibbs measure rho(x) ~ pi(x) e^{h(x)} attains the supremum.
  std::vector<double> gibbs(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) gibbs[i] = pi[i] * std::exp(h[i]);
  const FiniteDist gibbs_dist = make_dist(std::move(gibbs));
  const double at_gibbs = expectation(gibbs_dist, h) - log_mgf;
  const double kl_gibbs = kl(gibbs_dist, pi);
  if (std::abs(at_gibbs - kl_gibbs) > equality_tol) report.pass = false;
  inspect(gibbs_dist);

  if (!report.pass) {
    nlohmann::json dump;
    dump["pi"] = pi.weights();
    dump["h"] = h;
    dump["gibbs_gap"] = at_gibbs - kl_gibbs;
    report.detail = dump.dump();
  }
  return report;
}

// --- corpora -----------------------------------------------------------------

namespace {

struct CorpusAccumulator {
  CorpusReport report;

  explicit CorpusAccumulator(std::string name, std::uint64_t digest) {
    report.name = std::move(name);
    report.digest = digest;
    report.worst_slack = kInf;
  }

  void add(const CheckReport& check) {
    ++report.cases;
    if (!check.pass) ++report.violations;
    report.worst_slack = std::min(report.worst_slack, check.slack());
    if (std::isfinite(check.lhs) && check.rhs > 1e-12) {
      report.worst_ratio = std::max(report.worst_ratio, check.lhs / check.rhs);
    }
  }
};

FiniteDist random_dist(Rng& rng, std::size_t n) { return make_dist(rng.dirichlet(n)); }

// Half the time Q is an independent draw, half the time a perturbation of P;
// close pairs probe the small-divergence corner where the inequalities are
// tightest.
FiniteDist random_partner(Rng& rng, const FiniteDist& p) {
  if (rng.uniform01() < 0.5) return random_dist(rng, p.size());
  const double mix = rng.uniform(0.0, 0.2);
  const auto fresh = rng.dirichlet(p.size());
  std::vector<double> w(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    w[i] = (1.0 - mix) * p[i] + mix * fresh[i];
  }
  return make_dist(std::move(w));
}

}  // namespace

CorpusReport run_tv_com_corpus(std::uint64_t cases, std::uint64_t seed) {
  CorpusAccumulator acc("tv_com_corpus", fnv1a64("tv:" + std::to_string(seed)));
  for (std::uint64_t c = 0; c < cases; ++c) {
    Rng rng = Rng::stream(seed, 0xc0A1u, c);
    const std::size_t n = 2 + rng.below(5);
    const FiniteDist p = random_dist(rng, n);
    const FiniteDist q = random_partner(rng, p);
    const double beta = rng.uniform(0.05, 2.0);
    std::vector<double> f(n);
    for (auto& v : f) v = rng.uniform(0.0, beta);
    acc.add(check_tv_change_of_measure(p, q, f, beta));
  }
  return acc.report;
}

CorpusReport run_h2_com_corpus(std::uint64_t cases, std::uint64_t seed) {
  CorpusAccumulator acc("h2_com_corpus", fnv1a64("h2:" + std::to_string(seed)));
  for (std::uint64_t c = 0; c < cases; ++c) {
    Rng rng = Rng::stream(seed, 0xc0A2u, c);
    const std::size_t n = 2 + rng.below(5);
    const FiniteDist p = random_dist(rng, n);
    const FiniteDist q = random_partner(rng, p);
    const double bound = rng.uniform(0.05, 2.0);
    std::vector<double> g(n);
    for (auto& v : g) v = rng.uniform(0.0, bound);
    acc.add(check_h2_change_of_measure(p, q, g, bound));
  }
  return acc.report;
}

CorpusReport run_refined_com_corpus(DivergenceKind kind, std::uint64_t cases,
                                    std::uint64_t seed) {
  const DivergenceSpec spec = divergence_spec(kind);
  CorpusAccumulator acc(std::string("refined_com_corpus_") + divergence_kind_name(kind),
                        fnv1a64("refined:" + std::to_string(seed)));
  for (std::uint64_t c = 0; c < cases; ++c) {
    Rng rng = Rng::stream(seed, 0xc0A3u, c);
    const std::size_t n = 2 + rng.below(5);
    const FiniteDist p = random_dist(rng, n);
    const FiniteDist q = random_partner(rng, p);
    const double bound = rng.uniform(0.05, 2.0);
    std::vector<double> g(n);
    for (auto& v : g) v = rng.uniform(0.0, bound);
    acc.add(check_refined_change_of_measure(spec, p, q, g, bound));
  }
  return acc.report;
}

CorpusReport run_subadditivity_corpus(std::uint64_t chains, std::uint64_t seed) {
  CorpusAccumulator acc("subadditivity_corpus", fnv1a64("sub:" + std::to_string(seed)));
  for (std::uint64_t c = 0; c < chains; ++c) {
    Rng rng = Rng::stream(seed, 0xc0A4u, c);
    const std::size_t n_factors = 2 + rng.below(5);
    MarkovChainPair pair;
    pair.sizes.resize(n_factors);
    for (auto& s : pair.sizes) s = 2 + rng.below(2);
    const bool close = rng.uniform01() < 0.5;
    std::size_t prefix = 1;
    pair.p_kernels.resize(n_factors);
    pair.q_kernels.resize(n_factors);
    for (std::size_t i = 0; i < n_factors; ++i) {
      for (std::size_t r = 0; r < prefix; ++r) {
        FiniteDist p_row = random_dist(rng, pair.sizes[i]);
        FiniteDist q_row = close ? random_partner(rng, p_row)
                                 : random_dist(rng, pair.sizes[i]);
        pair.p_kernels[i].push_back(std::move(p_row));
        pair.q_kernels[i].push_back(std::move(q_row));
      }
      prefix *= pair.sizes[i];
    }
    acc.add(check_subadditivity(pair));
  }
  return acc.report;
}

CorpusReport run_donsker_varadhan_corpus(std::uint64_t cases, std::uint64_t seed) {
  CorpusAccumulator acc("donsker_varadhan_corpus", fnv1a64("dv:" + std::to_string(seed)));
  for (std::uint64_t c = 0; c < cases; ++c) {
    Rng rng = Rng::stream(seed, 0xc0A5u, c);
    const std::size_t n = 2 + rng.below(5);
    const FiniteDist pi = random_dist(rng, n);
    std::vector<double> h(n);
    for (auto& v : h) v = rng.uniform(-3.0, 3.0);
    std::vector<FiniteDist> grid;
    for (int r = 0; r < 8; ++r) grid.push_back(random_dist(rng, n));
    acc.add(check_donsker_varadhan(pi, h, grid));
  }
  return acc.report;
}

CorpusReport run_refined_simulation_corpus(std::uint64_t triples, std::uint64_t seed) {
  CorpusAccumulator acc("refined_simulation_corpus",
                        fnv1a64("rsim:" + std::to_string(seed)));
  for (std::uint64_t c = 0; c < triples; ++c) {
    Rng rng = Rng::stream(seed, 0xc0A6u, c);
    MspShape shape;
    shape.horizon = 2 + rng.below(2);
    shape.n_states = 2 + rng.below(2);
    shape.n_actions = 2 + rng.below(2);
    shape.n_models = 2 + rng.below(2);
    shape.n_policies = 3;
    const TabularMsp msp = gen_random_msp(shape, rng.next_u64());
    const std::size_t m = rng.below(msp.n_models());
    const std::size_t m_prime = rng.below(msp.n_models());
    const std::size_t policy = rng.below(msp.n_policies());
    acc.add(check_refined_simulation(msp, m, m_prime, policy));
  }
  return acc.report;
}

}  // namespace dmof
