"""
Brute-Force Matcher
Contains: match_brute_force

Checks every subscription-update pair. Rows of the n x m predicate matrix
are evaluated in numpy blocks; subscription rows are split across workers,
each filling a private buffer.
"""

from typing import Optional, Sequence

import numpy as np

from ddm_core import ExtentSet, Mode, PairReport, check_same_dims
from matchers.worker_pool import split_range, worker_pool

# predicate-matrix elements evaluated per block
BLOCK_ELEMENTS = 1 << 16


def _scan_rows(S: ExtentSet, U: ExtentSet, start: int, stop: int,
               dims: Sequence[int], mode: Mode) -> PairReport:
    m = len(U)
    step = max(1, min(BLOCK_ELEMENTS // max(m, 1), stop - start))
    count = 0
    pairs = []

    # one mask and one scratch buffer per worker, reused by every block
    mask_buf = np.empty((step, m), dtype=bool)
    scratch_buf = np.empty((step, m), dtype=bool)
    for a in range(start, stop, step):
        b = min(a + step, stop)
        mask, scratch = mask_buf[:b - a], scratch_buf[:b - a]
        mask.fill(True)
        for k in dims:
            np.less_equal(S.lows[a:b, k, None], U.highs[:, k], out=scratch)
            mask &= scratch
            np.less_equal(U.lows[:, k], S.highs[a:b, k, None], out=scratch)
            mask &= scratch

        if mode is Mode.LIST:
            rows, cols = np.nonzero(mask)
            pairs.extend(zip((rows + a).tolist(), cols.tolist()))
        else:
            count += int(np.count_nonzero(mask))

    if mode is Mode.LIST:
        return PairReport(Mode.LIST, len(pairs), tuple(pairs))
    return PairReport.from_count(count)


def match_brute_force(S: ExtentSet, U: ExtentSet, mode=Mode.LIST, workers: int = 1,
                      dim: Optional[int] = None, backend: str = 'thread') -> PairReport:
    """
    Report every pair whose extents intersect.

    Args:
        S, U: subscription and update extents
        mode: Mode.LIST or Mode.COUNT
        workers: number of workers sharing the subscription rows
        dim: restrict the predicate to one dimension (None = all dimensions)
        backend: worker backend name (see ddm_config.WORKER_BACKENDS)

    Returns:
        PairReport with pairs in (subscription id, update id) row-major order
    """
    d = check_same_dims(S, U)
    mode = Mode.parse(mode)
    dims = list(range(d)) if dim is None else [dim]

    if len(S) == 0 or len(U) == 0:
        return PairReport.empty(mode)

    ranges = split_range(len(S), min(workers, len(S)))
    with worker_pool(backend, len(ranges)) as pool:
        partials = pool.map(
            _scan_rows,
            [S] * len(ranges),
            [U] * len(ranges),
            [a for a, _ in ranges],
            [b for _, b in ranges],
            [dims] * len(ranges),
            [mode] * len(ranges),
        )
    return PairReport.merge(partials, mode)
