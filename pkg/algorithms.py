"""
Matcher Classes
===============
One MatcherBase subclass per algorithm code, plus the registry and the
create_matcher() factory used by the CLI, the bench harness and the
dashboard.

    matcher = create_matcher('sbm-par', backend='process')
    report = matcher.run(S, U, mode='count', workers=4)
"""

import logging
from typing import Dict, Optional, Tuple

from ddm_config import ALGORITHM_CONFIGS, BENCH_DEFAULTS, get_default_backend, get_worker_backend
from ddm_core import ConfigError
from matcher_base import MatcherBase
from matchers.brute_force import match_brute_force
from matchers.grid import match_grid
from matchers.interval_tree import match_interval_tree
from matchers.parallel_sbm import match_sbm_parallel
from matchers.sort_based import match_sbm_seq

logger = logging.getLogger(__name__)


# =============================================================================
# MATCHERS
# =============================================================================

class Matcher_BruteForce(MatcherBase):
    native_dd = True
    OPTIONS = ('backend',)

    def __init__(self, backend: Optional[str] = None):
        super().__init__('bf')
        self.backend = get_worker_backend(backend or get_default_backend(self.code))

    def match_1d(self, S, U, mode, workers, dim):
        return match_brute_force(S, U, mode, workers, dim, self.backend)


class Matcher_Grid(MatcherBase):
    OPTIONS = ('cell_count', 'bounds')

    def __init__(self, cell_count: int = BENCH_DEFAULTS['grid_cells'],
                 bounds: Optional[Tuple[float, float]] = None):
        """
        Args:
            cell_count: number of grid cells G
            bounds: routing-space (lower, upper); default (0, L)
        """
        super().__init__('grid')
        self.cell_count = cell_count
        self.bounds = bounds

    def match_1d(self, S, U, mode, workers, dim):
        return match_grid(S, U, self.cell_count, mode, self.bounds, dim)


class Matcher_IntervalTree(MatcherBase):
    OPTIONS = ('backend',)

    def __init__(self, backend: Optional[str] = None):
        super().__init__('itm')
        self.backend = get_worker_backend(backend or get_default_backend(self.code))

    def match_1d(self, S, U, mode, workers, dim):
        return match_interval_tree(S, U, mode, workers, dim, self.backend)


class Matcher_SBM(MatcherBase):
    OPTIONS = ('set_impl',)

    def __init__(self, set_impl: str = BENCH_DEFAULTS['set_impl']):
        super().__init__('sbm')
        self.set_impl = set_impl

    def match_1d(self, S, U, mode, workers, dim):
        return match_sbm_seq(S, U, mode, dim, self.set_impl)


class Matcher_ParallelSBM(MatcherBase):
    OPTIONS = ('backend', 'set_impl')

    def __init__(self, backend: Optional[str] = None,
                 set_impl: str = BENCH_DEFAULTS['set_impl']):
        """
        Args:
            backend: worker backend; None picks the registry default ('process')
            set_impl: sweep set representation for the final scans
        """
        super().__init__('sbm-par')
        self.backend = get_worker_backend(backend or get_default_backend(self.code))
        self.set_impl = set_impl

    def match_1d(self, S, U, mode, workers, dim):
        # phase timings and work counters land in self.stats
        return match_sbm_parallel(S, U, workers, mode, dim, self.backend,
                                  self.set_impl, self.stats)


# =============================================================================
# REGISTRY
# =============================================================================

ALGORITHM_CLASSES: Dict[str, type] = {
    'bf': Matcher_BruteForce,
    'grid': Matcher_Grid,
    'itm': Matcher_IntervalTree,
    'sbm': Matcher_SBM,
    'sbm-par': Matcher_ParallelSBM,
}


def create_matcher(code: str, **options) -> MatcherBase:
    """
    Factory function: build the matcher for an algorithm code.
    Options the algorithm does not take (e.g. cell_count for sbm) are ignored.
    """
    cls = ALGORITHM_CLASSES.get(str(code).lower())
    if cls is None:
        raise ConfigError(f"Unknown algorithm: {code}. Available: {list(ALGORITHM_CONFIGS.keys())}")
    accepted = {key: value for key, value in options.items()
                if key in cls.OPTIONS and value is not None}
    return cls(**accepted)


if __name__ == "__main__":
    for code, cls in ALGORITHM_CLASSES.items():
        matcher = create_matcher(code)
        print(f"{code:8s} {matcher.name:32s} options={list(cls.OPTIONS)}")
