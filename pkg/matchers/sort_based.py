"""
Sort-Based Matcher (sequential)
Contains: sbm_sweep, match_sbm_seq, sweep_snapshots

All 2(n+m) endpoints are sorted, then swept left to right keeping the
active subscription set (SubSet) and update set (UpdSet). When an upper
endpoint is reached its extent leaves its set and is paired with every
member of the opposite set, so each intersecting pair is emitted exactly
once, at the earlier of the two upper endpoints. In count mode the
opposite set's size is added instead of iterating it.
"""

from typing import List, Sequence, Tuple

from ddm_core import SUB, EndpointList, ExtentSet, Mode, PairReport, build_endpoint_list
from matchers.sweep_sets import make_sweep_set


def sbm_sweep(segment: EndpointList, sub_set, upd_set, mode: Mode) -> Tuple[PairReport, int]:
    """
    Sweep `segment` in order, mutating sub_set / upd_set.

    Returns:
        (partial report, number of endpoint records processed)
    """
    emit = mode is Mode.LIST
    pairs = []
    count = 0
    touched = 0

    for is_lower, kind, owner in segment.iter_events():
        touched += 1
        if kind == SUB:
            if is_lower:
                sub_set.add(owner)
                continue
            sub_set.remove(owner)
            if emit:
                pairs.extend((owner, u) for u in upd_set)
            else:
                count += len(upd_set)
        else:
            if is_lower:
                upd_set.add(owner)
                continue
            upd_set.remove(owner)
            if emit:
                pairs.extend((s, owner) for s in sub_set)
            else:
                count += len(sub_set)

    if emit:
        return PairReport(Mode.LIST, len(pairs), tuple(pairs)), touched
    return PairReport.from_count(count), touched


def match_sbm_seq(S: ExtentSet, U: ExtentSet, mode=Mode.LIST, dim: int = 0,
                  set_impl: str = 'sorted') -> PairReport:
    """Sequential sort-based matching on one dimension."""
    mode = Mode.parse(mode)
    endpoints = build_endpoint_list(S, U, dim)
    sub_set = make_sweep_set(set_impl, len(S))
    upd_set = make_sweep_set(set_impl, len(U))

    report, _ = sbm_sweep(endpoints, sub_set, upd_set, mode)
    # every inserted extent has been removed again
    assert len(sub_set) == 0 and len(upd_set) == 0
    return report


def sweep_snapshots(endpoints: EndpointList, indices: Sequence[int]) -> List[Tuple[frozenset, frozenset]]:
    """
    Instrumented sequential sweep: the (SubSet, UpdSet) contents right
    before the record at each index in `indices` (non-decreasing) is
    processed. Index len(endpoints) gives the final state.
    """
    subs, upds = set(), set()
    snapshots = []
    targets = list(indices)
    t = 0

    for position, (is_lower, kind, owner) in enumerate(endpoints.iter_events()):
        while t < len(targets) and targets[t] == position:
            snapshots.append((frozenset(subs), frozenset(upds)))
            t += 1
        active = subs if kind == SUB else upds
        if is_lower:
            active.add(owner)
        else:
            active.remove(owner)

    while t < len(targets):
        snapshots.append((frozenset(subs), frozenset(upds)))
        t += 1
    return snapshots
