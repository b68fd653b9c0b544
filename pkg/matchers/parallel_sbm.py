"""
Parallel Sort-Based Matcher
Contains: SegmentPlan, DeltaSets, SweepState, PartialScan, parallel_sort_endpoints,
          plan_segments, local_delta_scan, combine_deltas, final_scan, match_sbm_parallel

Pipeline over the sorted endpoint list T split into P segments:

  1. sample sort of T: every worker sorts one coordinate bucket,
     buckets are concatenated in order                          -- barrier 1
  2. every worker summarizes its segment as four delta sets
     Sadd/Sdel (subscriptions) and Uadd/Udel (updates)         -- barrier 2
  3. the coordinator turns the deltas into the initial sweep state of
     every segment: SubSet[0] = {} and
     SubSet[p] = (SubSet[p-1] | Sadd[p-1]) - Sdel[p-1]   (same for U)
  4. every worker re-sweeps its segment from that state into a private
     result buffer                                               -- barrier 3
  5. buffers are concatenated in segment order

All three parallel phases share one worker pool. Step 3 is the exclusive scan of the deltas under delta composition
(DeltaSets.compose); combine_deltas runs it sequentially on one running
set, prefix_scan.two_level_exclusive_scan runs the generic version.
"""

import logging
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ddm_core import (SUB, ContractError, EndpointList, ExtentSet, Mode, PairReport, endpoint_arrays,
                      sort_endpoints)
from matchers.sort_based import sbm_sweep
from matchers.sweep_sets import make_sweep_set
from matchers.worker_pool import worker_pool

logger = logging.getLogger(__name__)

EMPTY = frozenset()


# =============================================================================
# TYPES
# =============================================================================

@dataclass(frozen=True)
class SegmentPlan:
    boundaries: Tuple[int, ...]

    @property
    def segment_count(self) -> int:
        return len(self.boundaries) - 1

    def segments(self) -> List[Tuple[int, int]]:
        return list(zip(self.boundaries[:-1], self.boundaries[1:]))

    def sizes(self) -> List[int]:
        return [b - a for a, b in self.segments()]


@dataclass(frozen=True)
class DeltaSets:
    """How one segment changes the sweep sets: X -> (X - del) | add."""

    sadd: frozenset = EMPTY
    sdel: frozenset = EMPTY
    uadd: frozenset = EMPTY
    udel: frozenset = EMPTY

    @property
    def size(self) -> int:
        return len(self.sadd) + len(self.sdel) + len(self.uadd) + len(self.udel)

    def check(self, segment: int = -1) -> None:
        if self.sadd & self.sdel or self.uadd & self.udel:
            raise ContractError(f"Delta sets of segment {segment} are not disjoint")

    def apply(self, subs: frozenset, upds: frozenset) -> Tuple[frozenset, frozenset]:
        return (subs - self.sdel) | self.sadd, (upds - self.udel) | self.uadd

    @staticmethod
    def compose(first: 'DeltaSets', second: 'DeltaSets') -> 'DeltaSets':
        """The delta of `first` followed by `second` (associative, IDENTITY is neutral)."""
        sadd = (first.sadd - second.sdel) | second.sadd
        uadd = (first.uadd - second.udel) | second.uadd
        return DeltaSets(
            sadd=sadd,
            sdel=(first.sdel | second.sdel) - sadd,
            uadd=uadd,
            udel=(first.udel | second.udel) - uadd,
        )


DeltaSets.IDENTITY = DeltaSets()


@dataclass(frozen=True)
class SweepState:
    subs: frozenset = EMPTY
    upds: frozenset = EMPTY


SweepState.EMPTY = SweepState()


@dataclass(frozen=True)
class PartialScan:
    report: PairReport
    records_touched: int


# =============================================================================
# PARALLEL SORT
# =============================================================================

# regular-sample points per bucket when choosing splitters
SPLITTER_OVERSAMPLING = 64


def choose_splitters(coord: np.ndarray, parts: int) -> np.ndarray:
    """Up to parts - 1 increasing coordinates cutting `coord` into buckets of similar size."""
    if parts <= 1 or coord.size == 0:
        return coord[:0]
    stride = max(1, coord.size // (parts * SPLITTER_OVERSAMPLING))
    sample = np.sort(coord[::stride])
    picks = sample[(np.arange(1, parts) * sample.size) // parts]
    return np.unique(picks)


def _sort_bucket(coord: np.ndarray, is_lower: np.ndarray, kind: np.ndarray, owner_id: np.ndarray,
                 low: float, high: float) -> EndpointList:
    """Composite-key sort of the endpoints with low <= coord < high."""
    take = np.flatnonzero((coord >= low) & (coord < high))
    return sort_endpoints(coord[take], is_lower[take], kind[take], owner_id[take])


def parallel_sort_endpoints(S: ExtentSet, U: ExtentSet, dim: int = 0, pool=None,
                            workers: int = 1) -> EndpointList:
    """
    Sample sort of the endpoint list T over `workers` workers.

    Splitters cut the coordinate axis into half-open buckets; each worker
    sorts one bucket by the composite key and the buckets are concatenated
    in order. Equal coordinates share a bucket, so the result is identical
    to build_endpoint_list for every worker count.

    Args:
        pool: an open worker_pool to run on (a serial pool when None)
    """
    if workers < 1:
        raise ContractError(f"Worker count must be >= 1, got {workers}")
    columns = endpoint_arrays(S, U, dim)
    edges = np.concatenate([[-np.inf], choose_splitters(columns[0], workers), [np.inf]])
    lows, highs = edges[:-1].tolist(), edges[1:].tolist()
    buckets = len(lows)

    def sort_on(p):
        return p.map(_sort_bucket, *([column] * buckets for column in columns), lows, highs)

    if pool is None:
        with worker_pool('serial', workers) as serial:
            parts = sort_on(serial)
    else:
        parts = sort_on(pool)

    return EndpointList(
        np.concatenate([part.coord for part in parts]),
        np.concatenate([part.is_lower for part in parts]),
        np.concatenate([part.kind for part in parts]),
        np.concatenate([part.owner_id for part in parts]),
    )


# =============================================================================
# PHASES
# =============================================================================

def plan_segments(length: int, workers: int) -> SegmentPlan:
    """
    Split `length` records into `workers` contiguous segments.

    The first (length mod P) segments get one extra record; trailing
    segments may be empty when P > length.
    """
    if workers < 1:
        raise ContractError(f"Worker count must be >= 1, got {workers}")
    base, extra = divmod(length, workers)
    boundaries = [0]
    for p in range(workers):
        boundaries.append(boundaries[-1] + base + (1 if p < extra else 0))
    return SegmentPlan(tuple(boundaries))


def local_delta_scan(segment: EndpointList) -> DeltaSets:
    """
    Summarize one segment: a lower endpoint adds to the add-set; an upper
    endpoint cancels its own lower if that was seen here, otherwise it
    goes to the del-set.
    """
    sadd, sdel, uadd, udel = set(), set(), set(), set()
    for is_lower, kind, owner in segment.iter_events():
        add, delete = (sadd, sdel) if kind == SUB else (uadd, udel)
        if is_lower:
            add.add(owner)
        elif owner in add:
            add.remove(owner)
        else:
            delete.add(owner)
    return DeltaSets(frozenset(sadd), frozenset(sdel), frozenset(uadd), frozenset(udel))


def combine_deltas(deltas: Sequence[DeltaSets], stats: Optional[Dict] = None) -> List[SweepState]:
    """
    Coordinator step: initial sweep state of every segment.

    One running pair of sets is updated delta by delta, so every delta
    element is touched once; each state is a frozen snapshot.
    """
    for p, delta in enumerate(deltas):
        delta.check(p)
    if not deltas:
        return []

    subs, upds = set(), set()
    states = [SweepState.EMPTY]
    touched = 0
    for delta in deltas[:-1]:
        assert delta.sdel <= subs | delta.sadd and delta.udel <= upds | delta.uadd, \
            "delta removes extents that are not active"
        subs |= delta.sadd
        subs -= delta.sdel
        upds |= delta.uadd
        upds -= delta.udel
        touched += delta.size
        states.append(SweepState(frozenset(subs), frozenset(upds)))

    if stats is not None:
        stats['delta_elements_touched'] = touched
    return states


def final_scan(segment: EndpointList, init: SweepState, mode=Mode.LIST,
               set_impl: str = 'sorted', capacity: Tuple[int, int] = (0, 0)) -> PartialScan:
    """
    Re-sweep one segment starting from its initial state.

    Args:
        capacity: (n, m) id-space sizes, needed by the bitvector sets
    """
    mode = Mode.parse(mode)
    n_cap = max(capacity[0], max(init.subs, default=-1) + 1)
    m_cap = max(capacity[1], max(init.upds, default=-1) + 1)
    sub_set = make_sweep_set(set_impl, n_cap, init.subs)
    upd_set = make_sweep_set(set_impl, m_cap, init.upds)
    report, touched = sbm_sweep(segment, sub_set, upd_set, mode)
    return PartialScan(report, touched)


def match_sbm_parallel(S: ExtentSet, U: ExtentSet, workers: int, mode=Mode.LIST, dim: int = 0,
                       backend: str = 'thread', set_impl: str = 'sorted',
                       stats: Optional[Dict] = None) -> PairReport:
    """
    Parallel sort-based matching with P = `workers` segments.

    Args:
        backend: 'thread', 'process' or 'serial' (P workers on one thread)
        set_impl: sweep set representation for the final scans
        stats: optional dict receiving phase timings and work counters

    Returns:
        The same PairReport as match_sbm_seq for every P
    """
    if workers < 1:
        raise ContractError(f"Worker count must be >= 1, got {workers}")
    mode = Mode.parse(mode)
    stats = stats if stats is not None else {}

    P = workers
    with worker_pool(backend, P) as pool:
        t0 = time.perf_counter()
        endpoints = parallel_sort_endpoints(S, U, dim, pool, P)
        plan = plan_segments(len(endpoints), P)
        segments = [endpoints[a:b] for a, b in plan.segments()]
        t1 = time.perf_counter()

        deltas = pool.map(local_delta_scan, segments)
        t2 = time.perf_counter()

        states = combine_deltas(deltas, stats)
        assert deltas[-1].apply(states[-1].subs, states[-1].upds) == (EMPTY, EMPTY), \
            "extents still active after the last endpoint"
        t3 = time.perf_counter()

        partials = pool.map(final_scan, segments, states, [mode] * P,
                            [set_impl] * P, [(len(S), len(U))] * P)
        t4 = time.perf_counter()

    stats.update({
        'segment_sizes': plan.sizes(),
        'records_touched': [part.records_touched for part in partials],
        'sort_secs': t1 - t0,
        'delta_scan_secs': t2 - t1,
        'combine_secs': t3 - t2,
        'final_scan_secs': t4 - t3,
    })
    logger.debug("parallel SBM P=%d sort=%.4fs delta=%.4fs combine=%.4fs final=%.4fs",
                 P, t1 - t0, t2 - t1, t3 - t2, t4 - t3)
    return PairReport.merge([part.report for part in partials], mode)
