"""Fair systemic-risk allocation for banks in disjoint or overlapping groups."""

import json as _json

from ._core import (
    Market,
    SysriskError,
    allocate_disjoint,
    allocate_overlap,
    best_response,
    brute_force_nash,
    budget_check,
    cov_from_sd_corr,
    distance_up_to_permutation,
    example_ids,
    example_market,
    is_nash_disjoint,
    is_nash_overlap,
    market_from_config,
    play_disjoint,
    play_overlap,
    printed_matrix,
    sample_X,
    tilted_moments,
    w_star,
)
from . import _core


def validate(market, weights, samples=1000000, seed=0, d_shift=0.0):
    return _json.loads(_core._validate(market, weights, samples, seed, d_shift))


def sensitivity(market, weights, shock="x", fd_check=False):
    return _json.loads(_core._sensitivity(market, weights, shock, fd_check))


def estimate(csv_text):
    return _json.loads(_core._estimate(csv_text))


def reproduce(example_id):
    return _json.loads(_core._reproduce(example_id))
