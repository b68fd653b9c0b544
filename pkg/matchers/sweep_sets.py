"""
Sweep Sets
==========
SubSet / UpdSet representations for the sort-based sweeps.

  - 'sorted':    sortedcontainers.SortedSet (ordered tree-like set,
                 O(log n) insert/delete, O(1) len)
  - 'bitvector': dense numpy boolean array indexed by extent id, with a
                 size counter so len() stays O(1)

Both support add, remove, membership, len and iteration in id order.
"""

from typing import Iterable, Iterator

import numpy as np
from sortedcontainers import SortedSet

from ddm_config import get_set_implementation


class BitVectorSet:
    def __init__(self, capacity: int, items: Iterable[int] = ()):
        self._bits = np.zeros(max(capacity, 0), dtype=bool)
        self._size = 0
        for item in items:
            self.add(item)

    def add(self, item: int) -> None:
        if not self._bits[item]:
            self._bits[item] = True
            self._size += 1

    def remove(self, item: int) -> None:
        if not self._bits[item]:
            raise KeyError(item)
        self._bits[item] = False
        self._size -= 1

    def __contains__(self, item: int) -> bool:
        return 0 <= item < self._bits.shape[0] and bool(self._bits[item])

    def __len__(self) -> int:
        return self._size

    def __iter__(self) -> Iterator[int]:
        return iter(np.flatnonzero(self._bits).tolist())


def make_sweep_set(impl: str, capacity: int, items: Iterable[int] = ()):
    """Create an empty (or pre-filled) sweep set of the configured implementation."""
    impl = get_set_implementation(impl)
    if impl == 'bitvector':
        return BitVectorSet(capacity, items)
    return SortedSet(items)
