"""Shared fixtures: the four-overlap 2-D instance and seeded random instances."""

import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from ddm_core import ExtentSet, Kind  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-scale or timing-dependent checks (deselected by default)")


# Three subscriptions, two updates. S0 and S1 overlap each other; the
# subscription/update overlaps are exactly (S0,U0), (S1,U1), (S2,U0), (S2,U1).
FOUR_OVERLAP_SUBS = [
    ((1.0, 4.0), (1.0, 4.0)),
    ((3.0, 7.0), (3.0, 6.0)),
    ((1.5, 8.0), (1.5, 5.5)),
]
FOUR_OVERLAP_UPDS = [
    ((0.0, 2.0), (0.0, 2.0)),
    ((6.0, 9.0), (5.0, 8.0)),
]
FOUR_OVERLAP_PAIRS = frozenset({(0, 0), (1, 1), (2, 0), (2, 1)})


@pytest.fixture
def four_overlap():
    S = ExtentSet.from_boxes(Kind.SUBSCRIPTION, FOUR_OVERLAP_SUBS)
    U = ExtentSet.from_boxes(Kind.UPDATE, FOUR_OVERLAP_UPDS)
    return S, U, FOUR_OVERLAP_PAIRS


def make_random_instance(seed, n, m, dims=1, space=1000, max_len=60):
    """
    Integer-coordinate instance, so shared endpoints and zero-length
    extents occur often.
    """
    rng = np.random.default_rng(seed)

    def draw(count, kind):
        lows = rng.integers(0, space, size=(count, dims)).astype(float)
        lengths = rng.integers(0, max_len + 1, size=(count, dims)).astype(float)
        return ExtentSet(kind, lows, lows + lengths)

    return draw(n, Kind.SUBSCRIPTION), draw(m, Kind.UPDATE)


@pytest.fixture
def random_instance():
    return make_random_instance


def brute_force_pairs(S, U):
    """Plain double loop over the closed-interval predicate on every dimension."""
    pairs = set()
    for i in range(len(S)):
        for j in range(len(U)):
            if all(S.lows[i, k] <= U.highs[j, k] and U.lows[j, k] <= S.highs[i, k]
                   for k in range(S.dims)):
                pairs.add((i, j))
    return pairs
