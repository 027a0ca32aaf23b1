#include <cmath>
#include <vector>

#include "doctest.h"
#include "dmof/lemmalab.hpp"
#include "dmof/rng.hpp"

using namespace dmof;

TEST_CASE("tv change of measure: trivial and random cases") {
  const FiniteDist p = make_dist({0.3, 0.7});
  CHECK(check_tv_change_of_measure(p, p, {0.1, 0.4}, 0.5).pass);
  CHECK(check_tv_change_of_measure(p, make_dist({0.9, 0.1}), {0.2, 0.2}, 0.25).pass);
  CHECK_THROWS_AS(check_tv_change_of_measure(p, p, {0.6, 0.1}, 0.5), Error);

  const CorpusReport corpus = run_tv_com_corpus(2000, 17);
  CHECK(corpus.violations == 0);
  CHECK(corpus.cases == 2000);
}

TEST_CASE("h2 change of measure: boundary case and corpus") {
  const FiniteDist p = make_dist({1.0, 0.0});
  const FiniteDist q = make_dist({0.0, 1.0});
  // g == B on disjoint supports: B <= 0 + 4B*2
  const CheckReport edge = check_h2_change_of_measure(p, q, {1.0, 1.0}, 1.0);
  CHECK(edge.pass);
  CHECK(edge.rhs == doctest::Approx(8.0 + 3.0));

  CHECK(run_h2_com_corpus(2000, 18).violations == 0);
}

TEST_CASE("refined change of measure: all three divergences") {
  const FiniteDist p = make_dist({0.4, 0.6});
  for (DivergenceKind kind :
       {DivergenceKind::TV, DivergenceKind::H2, DivergenceKind::KL}) {
    const DivergenceSpec spec = divergence_spec(kind);
    // P = Q: E g >= gamma1 E g since gamma1 <= 1
    CHECK(check_refined_change_of_measure(spec, p, p, {0.5, 0.5}, 1.0).pass);
    // g == 0: 0 >= gamma1 * (negative)
    CHECK(check_refined_change_of_measure(spec, p, make_dist({0.9, 0.1}),
                                          {0.0, 0.0}, 1.0)
              .pass);
    CHECK(run_refined_com_corpus(kind, 2000, 19).violations == 0);
  }

  // KL infinite: vacuous pass
  const DivergenceSpec klspec = divergence_spec(DivergenceKind::KL);
  CHECK(check_refined_change_of_measure(klspec, make_dist({1.0, 0.0}),
                                        make_dist({0.0, 1.0}), {0.3, 0.3}, 1.0)
            .pass);
}

TEST_CASE("refined H2 form is the h2 change of measure rearranged") {
  Rng rng(2077);
  const DivergenceSpec spec = divergence_spec(DivergenceKind::H2);
  for (int it = 0; it < 500; ++it) {
    const std::size_t n = 2 + rng.below(4);
    const FiniteDist p = make_dist(rng.dirichlet(n));
    const FiniteDist q = make_dist(rng.dirichlet(n));
    const double bound = rng.uniform(0.1, 2.0);
    std::vector<double> g(n);
    for (auto& v : g) v = rng.uniform(0.0, bound);

    const CheckReport refined = check_refined_change_of_measure(spec, p, q, g, bound);
    const CheckReport swapped = check_h2_change_of_measure(q, p, g, bound);
    CHECK(refined.pass == swapped.pass);
    // slacks agree up to the factor 3 from the rearrangement
    CHECK(swapped.slack() == doctest::Approx(3.0 * refined.slack()).epsilon(1e-9));
  }
}

TEST_CASE("subadditivity: trivial chains and corpus") {
  MarkovChainPair pair;
  pair.sizes = {2, 2};
  pair.p_kernels = {{uniform_dist(2)}, {uniform_dist(2), uniform_dist(2)}};
  pair.q_kernels = pair.p_kernels;
  const CheckReport same = check_subadditivity(pair);
  CHECK(same.pass);
  CHECK(same.lhs == 0.0);

  // first factors equal, second disjoint given every prefix
  MarkovChainPair split;
  split.sizes = {2, 2};
  split.p_kernels = {{uniform_dist(2)}, {point_mass(2, 0), point_mass(2, 0)}};
  split.q_kernels = {{uniform_dist(2)}, {point_mass(2, 1), point_mass(2, 1)}};
  const CheckReport disjoint = check_subadditivity(split);
  CHECK(disjoint.pass);
  CHECK(disjoint.lhs <= 2.0);
  CHECK(disjoint.rhs == doctest::Approx(100.0 * std::log(2.0) * 2.0));

  MarkovChainPair bad;
  bad.sizes = {2};
  bad.p_kernels = {{uniform_dist(2)}};
  bad.q_kernels = {{uniform_dist(2)}};
  CHECK_THROWS_AS(check_subadditivity(bad), Error);  // n = 1 is excluded

  CHECK(run_subadditivity_corpus(200, 20).violations == 0);
}

TEST_CASE("log-likelihood union bound: single draw") {
  Rng rng(3);
  // singleton class: never violated
  const std::vector<FiniteDist> lone{make_dist(rng.dirichlet(4))};
  CHECK(check_loglik_bound(lone, 0, 0.05, 500, 4).violations == 0);

  // delta = 1: the comparison still runs, report only
  std::vector<FiniteDist> family;
  for (int i = 0; i < 5; ++i) family.push_back(make_dist(rng.dirichlet(4)));
  const MonteCarloReport degenerate = check_loglik_bound(family, 0, 1.0, 200, 4);
  CHECK(degenerate.trials == 200);

  const MonteCarloReport report = check_loglik_bound(family, 1, 0.05, 3000, 5);
  CHECK(report.pass);
}

TEST_CASE("log-likelihood union bound: iid reduces to the single-draw form") {
  Rng rng(9);
  std::vector<FiniteDist> family;
  for (int i = 0; i < 4; ++i) family.push_back(make_dist(rng.dirichlet(3)));

  const MonteCarloReport one = check_loglik_iid(family, 0, 1, 0.05, 2000, 6);
  const MonteCarloReport single = check_loglik_bound(family, 0, 0.05, 2000, 6);
  CHECK(one.pass);
  CHECK(single.pass);

  CHECK(check_loglik_iid(family, 2, 10, 0.05, 3000, 7).pass);
  const std::vector<FiniteDist> lone{family[0]};
  CHECK(check_loglik_iid(lone, 0, 6, 0.05, 500, 8).violations == 0);
}

TEST_CASE("log-likelihood union bound with conditioning") {
  Rng rng(11);
  std::vector<FiniteDist> joints;
  for (int i = 0; i < 4; ++i) joints.push_back(make_dist(rng.dirichlet(9)));
  CHECK(check_loglik_iid_cond(joints, 3, 3, 0, 10, 0.05, 3000, 12).pass);

  // X1 a single point: reduces to the iid bound on the conditionals
  std::vector<FiniteDist> flat;
  for (int i = 0; i < 4; ++i) flat.push_back(make_dist(rng.dirichlet(4)));
  const MonteCarloReport cond = check_loglik_iid_cond(flat, 1, 4, 0, 6, 0.05, 2000, 13);
  const MonteCarloReport plain = check_loglik_iid(flat, 0, 6, 0.05, 2000, 13);
  CHECK(cond.pass);
  CHECK(plain.pass);

  const std::vector<FiniteDist> lone{joints[0]};
  CHECK(check_loglik_iid_cond(lone, 3, 3, 0, 5, 0.05, 500, 14).violations == 0);
}

TEST_CASE("Donsker-Varadhan: closed-form Gibbs case") {
  // pi uniform over 2, h = (0, ln 3): Gibbs rho = (0.25, 0.75)
  const FiniteDist pi = uniform_dist(2);
  const std::vector<double> h{0.0, std::log(3.0)};
  const FiniteDist gibbs = make_dist({0.25, 0.75});
  const double lower = expectation(gibbs, h) -
                       std::log(0.5 * std::exp(0.0) + 0.5 * std::exp(h[1]));
  CHECK(lower == doctest::Approx(kl(gibbs, pi)).epsilon(1e-12));

  const CheckReport report = check_donsker_varadhan(pi, h, {gibbs, uniform_dist(2)});
  CHECK(report.pass);

  // constant h: both sides zero at rho = pi
  const CheckReport constant = check_donsker_varadhan(pi, {0.7, 0.7}, {pi});
  CHECK(constant.pass);

  CHECK(run_donsker_varadhan_corpus(300, 21).violations == 0);
  CHECK_THROWS_AS(check_donsker_varadhan(make_dist({1.0, 0.0}), {0, 0}, {pi}), Error);
}

TEST_CASE("refined simulation corpus stays violation-free") {
  const CorpusReport corpus = run_refined_simulation_corpus(60, 22);
  CHECK(corpus.cases == 60);
  CHECK(corpus.violations == 0);
}
