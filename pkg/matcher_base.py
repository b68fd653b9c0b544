"""
Base Class for DDM Matchers
=============================
MatcherBase wraps one matching algorithm so every caller (CLI, bench
harness, dashboard, tests) drives it the same way:

  - run(S, U, mode, workers) times the matching call, keeps the last
    report, and lifts the 1-D matcher to d dimensions
  - get_summary() returns a plain dict for tables and logs

Subclasses only implement match_1d(). Algorithms that evaluate the full
d-dimensional predicate themselves set `native_dd = True`.

Usage:
    class Matcher_SBM(MatcherBase):
        def __init__(self, set_impl='sorted'):
            super().__init__('sbm')
            self.set_impl = set_impl

        def match_1d(self, S, U, mode, workers, dim):
            return match_sbm_seq(S, U, mode, dim, self.set_impl)
"""

import logging
import time
from typing import Dict, Optional, Sequence

import numpy as np

from ddm_config import get_algorithm_config
from ddm_core import ContractError, ExtentSet, Mode, PairReport, check_same_dims

logger = logging.getLogger(__name__)


class MatcherBase:
    """
    Base class for all matcher classes.

    Subclasses MUST implement:
      - match_1d(S, U, mode, workers, dim) -> PairReport

    Subclasses MAY set:
      - native_dd: match_1d(dim=None) already checks every dimension
      - OPTIONS: constructor keywords accepted by create_matcher()
    """

    native_dd = False
    OPTIONS: tuple = ()

    def __init__(self, code: str):
        """
        Args:
            code: algorithm code from ddm_config.ALGORITHM_CONFIGS
        """
        self.config = get_algorithm_config(code)
        self.code = self.config['code']
        self.name = self.config['name']
        self.parallel = self.config['parallel']

        self.last_report: Optional[PairReport] = None
        self.last_wct_seconds: Optional[float] = None
        self.last_workers: int = 1
        self.stats: Dict = {}

    def match_1d(self, S: ExtentSet, U: ExtentSet, mode: Mode, workers: int,
                 dim: Optional[int]) -> PairReport:
        raise NotImplementedError

    # -------------------------------------------------------------------------
    # PUBLIC
    # -------------------------------------------------------------------------

    def run(self, S: ExtentSet, U: ExtentSet, mode=Mode.LIST, workers: int = 1,
            dims: Optional[Sequence[int]] = None) -> PairReport:
        """
        Match S against U and time the call.

        Args:
            mode: Mode.LIST or Mode.COUNT (or their string values)
            workers: worker count P; serial algorithms ignore it
            dims: dimensions to match on, first one drives the 1-D matcher
                  (default: all dimensions of the extents)
        """
        d = check_same_dims(S, U)
        mode = Mode.parse(mode)
        if workers < 1:
            raise ContractError(f"Worker count must be >= 1, got {workers}")
        dims = list(range(d)) if dims is None else list(dims)
        if not dims or any(not 0 <= k < d for k in dims):
            raise ContractError(f"Matching dimensions {dims} out of range for d={d}")
        if workers > 1 and not self.parallel:
            logger.debug("%s is serial; ignoring workers=%d", self.code, workers)

        self.stats = {}
        start = time.perf_counter()
        report = self._match(S, U, mode, workers, dims)
        self.last_wct_seconds = time.perf_counter() - start

        self.last_report = report
        self.last_workers = workers
        return report

    def get_summary(self) -> Dict:
        return {
            'algorithm': self.code,
            'name': self.name,
            'P': self.last_workers,
            'mode': self.last_report.mode.value if self.last_report else None,
            'K': self.last_report.count if self.last_report else None,
            'wct_seconds': self.last_wct_seconds,
        }

    # -------------------------------------------------------------------------
    # INTERNAL
    # -------------------------------------------------------------------------

    def _match(self, S, U, mode, workers, dims) -> PairReport:
        if self.native_dd and dims == list(range(S.dims)):
            return self.match_1d(S, U, mode, workers, None)
        if len(dims) == 1:
            return self.match_1d(S, U, mode, workers, dims[0])

        candidates = self.match_1d(S, U, Mode.LIST, workers, dims[0])
        return filter_candidates(candidates, S, U, dims[1:], mode)


def filter_candidates(candidates: PairReport, S: ExtentSet, U: ExtentSet,
                      dims: Sequence[int], mode: Mode) -> PairReport:
    """Keep the candidate pairs that also intersect on every dimension in `dims`."""
    if candidates.count == 0:
        return PairReport.empty(mode)
    pairs = np.asarray(candidates.pairs, dtype=np.int64)
    s_idx, u_idx = pairs[:, 0], pairs[:, 1]

    keep = np.ones(len(pairs), dtype=bool)
    for k in dims:
        keep &= (S.lows[s_idx, k] <= U.highs[u_idx, k]) & (U.lows[u_idx, k] <= S.highs[s_idx, k])

    if mode is Mode.COUNT:
        return PairReport.from_count(int(np.count_nonzero(keep)))
    return PairReport.from_pairs(pairs[keep].tolist())


def match_dd(S: ExtentSet, U: ExtentSet, algorithm: str, mode=Mode.LIST,
             dims: Optional[Sequence[int]] = None, workers: int = 1, **options) -> PairReport:
    """
    d-dimensional matching with any registered algorithm.

    The 1-D matcher runs on the first matching dimension; candidates are
    filtered with the interval predicate on the others. d = 1 passes through.
    """
    from algorithms import create_matcher

    matcher = create_matcher(algorithm, **options)
    return matcher.run(S, U, mode, workers, dims)
