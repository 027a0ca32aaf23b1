#pragma once

#include <cstdint>
#include <vector>

#include "dmof/core.hpp"
#include "dmof/sequential.hpp"

namespace dmof {

// Pair of laws over a product of small alphabets, each given by per-factor
// kernels conditioned on the full prefix. Factor i has `sizes[i]` letters and
// prod(sizes[0..i-1]) kernel rows.
struct MarkovChainPair {
  std::vector<std::size_t> sizes;
  std::vector<std::vector<FiniteDist>> p_kernels;
  std::vector<std::vector<FiniteDist>> q_kernels;

  std::size_t n_factors() const { return sizes.size(); }
};

void validate(const MarkovChainPair& pair, std::uint64_t cap = kEnumerationCap);

// |E_P f - E_Q f| <= 2 beta TV(P, Q) for f with range [0, beta].
CheckReport check_tv_change_of_measure(const FiniteDist& p, const FiniteDist& q,
                                       const std::vector<double>& f, double beta);

// E_P g <= 3 E_Q g + 4 B H2(P, Q) for g with range [0, B].
CheckReport check_h2_change_of_measure(const FiniteDist& p, const FiniteDist& q,
                                       const std::vector<double>& g, double bound);

// E_P g >= gamma1 (E_Q g - gamma2 B D(P, Q)); vacuous when D is infinite.
CheckReport check_refined_change_of_measure(const DivergenceSpec& spec,
                                            const FiniteDist& p, const FiniteDist& q,
                                            const std::vector<double>& g, double bound);

// H2(P, Q) <= 100 log(n) E_P [ sum_i H2 of the step-i conditionals ], n >= 2.
CheckReport check_subadditivity(const MarkovChainPair& pair,
                                std::uint64_t cap = kEnumerationCap);

// Union bound of the log-likelihood on a single draw: w.p. >= 1 - delta over
// x ~ p*, for all p:  -log(p*(x)/p(x)) + H2(p*, p) <= 2 log(|P|/delta).
MonteCarloReport check_loglik_bound(const std::vector<FiniteDist>& dist_class,
                                    std::size_t star, double delta,
                                    std::uint64_t trials, std::uint64_t seed);

// I.i.d. version over N draws; the per-sample H2 term enters N times.
MonteCarloReport check_loglik_iid(const std::vector<FiniteDist>& dist_class,
                                  std::size_t star, std::size_t n, double delta,
                                  std::uint64_t trials, std::uint64_t seed);

// Conditional version on joints over X1 x X2 (row-major, |X2| = n2 columns):
// the log-likelihood ratio of the X2|X1 conditionals plus N times the
// data-law expectation of the conditional H2 divergences.
MonteCarloReport check_loglik_iid_cond(const std::vector<FiniteDist>& joint_class,
                                       std::size_t n1, std::size_t n2,
                                       std::size_t star, std::size_t n, double delta,
                                       std::uint64_t trials, std::uint64_t seed);

// Variational formula: E_rho h - log E_pi e^h <= KL(rho || pi) on a seeded
// grid of rho, with equality at the Gibbs measure rho(x) ~ pi(x) e^{h(x)}.
CheckReport check_donsker_varadhan(const FiniteDist& pi, const std::vector<double>& h,
                                   const std::vector<FiniteDist>& rho_grid,
                                   double equality_tol = 1e-9);

// --- seeded corpora ----------------------------------------------------------

CorpusReport run_tv_com_corpus(std::uint64_t cases, std::uint64_t seed);
CorpusReport run_h2_com_corpus(std::uint64_t cases, std::uint64_t seed);
CorpusReport run_refined_com_corpus(DivergenceKind kind, std::uint64_t cases,
                                    std::uint64_t seed);
CorpusReport run_subadditivity_corpus(std::uint64_t chains, std::uint64_t seed);
CorpusReport run_donsker_varadhan_corpus(std::uint64_t cases, std::uint64_t seed);
CorpusReport run_refined_simulation_corpus(std::uint64_t triples, std::uint64_t seed);

}  // namespace dmof
