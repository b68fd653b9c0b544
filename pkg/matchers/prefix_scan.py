"""
Prefix Scans
Contains: sequential_exclusive_scan, two_level_exclusive_scan

Exclusive scan of x_0..x_{N-1} under an associative operator with
identity e:  z_0 = e,  z_k = x_0 (+) ... (+) x_{k-1}.

The two-level variant runs in three steps:
  1. each worker computes the inclusive prefix of its block
  2. the coordinator scans the P block totals (exclusive)
  3. each worker combines its received offset with its local prefixes
Steps 1 and 3 cost O(N/P) per worker, step 2 costs O(P).
The operator is applied as op(earlier, later); it need not commute.
"""

from typing import Any, Callable, List, Sequence

from matchers.worker_pool import chunk, worker_pool

Operator = Callable[[Any, Any], Any]


def sequential_exclusive_scan(items: Sequence, op: Operator, identity) -> List:
    out = []
    acc = identity
    for item in items:
        out.append(acc)
        acc = op(acc, item)
    return out


def _local_inclusive(block: Sequence, op: Operator, identity) -> List:
    out = []
    acc = identity
    for item in block:
        acc = op(acc, item)
        out.append(acc)
    return out


def _apply_offset(offset, local_inclusive: List, op: Operator, identity) -> List:
    local_exclusive = [identity] + local_inclusive[:-1]
    return [op(offset, value) for value in local_exclusive]


def two_level_exclusive_scan(items: Sequence, op: Operator, identity, workers: int = 1,
                             pool=None, backend: str = 'serial') -> List:
    """
    Exclusive scan using the two-level (block / coordinator / block) scheme.

    Args:
        items: input sequence
        op: associative operator op(a, b); must be picklable for the process backend
        identity: neutral element of op
        workers: number of blocks P
        pool: an existing worker pool to reuse (see matchers.worker_pool)
        backend: backend for a fresh pool when `pool` is None
    """
    items = list(items)
    if not items:
        return []
    parts = max(1, min(workers, len(items)))
    blocks = chunk(items, parts)

    if pool is None:
        with worker_pool(backend, parts) as fresh:
            return _scan_blocks(fresh, blocks, op, identity)
    return _scan_blocks(pool, blocks, op, identity)


def _scan_blocks(pool, blocks: List[Sequence], op: Operator, identity) -> List:
    n = len(blocks)
    # step 1
    local = pool.map(_local_inclusive, blocks, [op] * n, [identity] * n)
    # step 2 (coordinator)
    totals = [values[-1] if values else identity for values in local]
    offsets = sequential_exclusive_scan(totals, op, identity)
    # step 3
    pieces = pool.map(_apply_offset, offsets, local, [op] * n, [identity] * n)

    out = []
    for piece in pieces:
        out.extend(piece)
    return out
