"""Offline decision making laboratory.

Thin python surface over the C++ core: discrete f-divergences, a certified
zero-sum game solver, the divergence-regularized decision rule with its
estimation coefficients, tabular sequential and supervised-learning
experiments, and the lemma-checking corpora.

Instances are plain dicts in the same schema as the on-disk JSON files; see
the repository README for the field layout.
"""

from ._dmof import (
    DmofError,
    check_fast_sl,
    check_lower_bound,
    edd,
    eoec,
    gen_explicit,
    gen_scored,
    gen_sequential_testbed,
    gen_sl_testbed,
    hellinger_sq,
    kl,
    load_instance,
    make_dist,
    minimax_algorithm_value,
    oec,
    product_dist,
    rate_sweep,
    run_lemma_corpus,
    save_instance,
    solve_zero_sum,
    tv,
)

__all__ = [
    "DmofError",
    "check_fast_sl",
    "check_lower_bound",
    "edd",
    "eoec",
    "gen_explicit",
    "gen_scored",
    "gen_sequential_testbed",
    "gen_sl_testbed",
    "hellinger_sq",
    "kl",
    "load_instance",
    "make_dist",
    "minimax_algorithm_value",
    "oec",
    "product_dist",
    "rate_sweep",
    "run_lemma_corpus",
    "save_instance",
    "solve_zero_sum",
    "tv",
]

__version__ = "0.1.0"
