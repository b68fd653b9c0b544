"""
DDM Core Types and Predicates
===============================
Domain types shared by every matcher:

1. Extent / ExtentSet: axis-parallel d-rectangles, one ExtentSet per kind
   (subscriptions, updates). Ids are dense row indices 0..count-1.
2. EndpointRecord / EndpointList: the sorted endpoint list T swept by SBM.
3. PairReport: either an explicit list of (subscription_id, update_id)
   pairs or just the match count K.

Plus the 1-D and d-dimensional closed-interval intersection predicates,
endpoint-list construction, and the extent text line format.

Usage:
    S = ExtentSet.from_intervals(Kind.SUBSCRIPTION, [(1, 3)])
    U = ExtentSet.from_intervals(Kind.UPDATE, [(2, 4)])
    T = build_endpoint_list(S, U, dim=0)
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np


# =============================================================================
# ERRORS
# =============================================================================

class DDMError(Exception):
    """Base class for all library errors."""


class ContractError(DDMError, ValueError):
    """A precondition or structural invariant was violated."""


class ConfigError(DDMError, ValueError):
    """Invalid configuration (unknown algorithm, infeasible workload, ...)."""


class ExtentFormatError(ConfigError):
    """Malformed line in an extent text file."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        self.detail = message
        super().__init__(f"line {line_number}: {message}")

    def __reduce__(self):
        return type(self), (self.line_number, self.detail)


class BudgetExceededError(DDMError):
    """A single timed run exceeded its time budget."""


# =============================================================================
# ENUMS
# =============================================================================

class Kind(Enum):
    SUBSCRIPTION = 'S'
    UPDATE = 'U'

    @property
    def code(self) -> int:
        """Integer code used in endpoint arrays (subscriptions sort first)."""
        return 0 if self is Kind.SUBSCRIPTION else 1


SUB = 0
UPD = 1


class Mode(Enum):
    COUNT = 'count'
    LIST = 'list'

    @classmethod
    def parse(cls, value) -> 'Mode':
        if isinstance(value, Mode):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigError(f"Unknown mode: {value}. Available: {[m.value for m in cls]}") from None


Interval = Tuple[float, float]


# =============================================================================
# EXTENTS
# =============================================================================

@dataclass(frozen=True)
class Extent:
    """One subscription or update region: d closed intervals."""

    id: int
    kind: Kind
    bounds: Tuple[Interval, ...]

    def __post_init__(self):
        if self.id < 0:
            raise ContractError(f"Extent id must be non-negative, got {self.id}")
        if len(self.bounds) < 1:
            raise ContractError("Extent needs at least one dimension")
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        for k, (lo, hi) in enumerate(bounds):
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ContractError(f"{self.kind.value}{self.id}: non-finite bound in dimension {k}")
            if lo > hi:
                raise ContractError(f"{self.kind.value}{self.id}: low {lo} > high {hi} in dimension {k}")
        object.__setattr__(self, 'bounds', bounds)

    @property
    def dims(self) -> int:
        return len(self.bounds)


class ExtentSet:
    """
    Columnar, read-only collection of all extents of one kind.

    lows/highs have shape (count, d); row i is the extent with id i.
    """

    def __init__(self, kind: Kind, lows, highs):
        lows = np.array(lows, dtype=np.float64)
        highs = np.array(highs, dtype=np.float64)
        if lows.ndim != 2 or lows.shape != highs.shape:
            raise ContractError(f"lows/highs must be matching (count, d) arrays, got {lows.shape} and {highs.shape}")
        if lows.shape[1] < 1:
            raise ContractError("Extents need at least one dimension")
        if not (np.isfinite(lows).all() and np.isfinite(highs).all()):
            raise ContractError(f"{kind.name}: non-finite coordinates")
        bad = np.argwhere(lows > highs)
        if len(bad):
            row, dim = bad[0]
            raise ContractError(f"{kind.value}{row}: low > high in dimension {dim}")

        lows.flags.writeable = False
        highs.flags.writeable = False
        self.kind = kind
        self.lows = lows
        self.highs = highs

    # --- constructors ---

    @classmethod
    def empty(cls, kind: Kind, dims: int = 1) -> 'ExtentSet':
        return cls(kind, np.empty((0, dims)), np.empty((0, dims)))

    @classmethod
    def from_intervals(cls, kind: Kind, intervals: Sequence[Interval]) -> 'ExtentSet':
        """1-D shortcut: intervals[i] is the extent with id i."""
        if not intervals:
            return cls.empty(kind, 1)
        arr = np.asarray(intervals, dtype=np.float64).reshape(-1, 2)
        return cls(kind, arr[:, :1], arr[:, 1:])

    @classmethod
    def from_boxes(cls, kind: Kind, boxes: Sequence[Sequence[Interval]]) -> 'ExtentSet':
        """boxes[i] is the tuple of per-dimension intervals of extent i."""
        if not boxes:
            return cls.empty(kind, 1)
        arr = np.asarray(boxes, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 2:
            raise ContractError("Every box needs the same number of (low, high) pairs")
        return cls(kind, arr[:, :, 0], arr[:, :, 1])

    @classmethod
    def from_extents(cls, kind: Kind, extents: Iterable[Extent], dims: Optional[int] = None) -> 'ExtentSet':
        """Build from Extent objects; ids must be exactly 0..count-1 (any order)."""
        extents = list(extents)
        if not extents:
            return cls.empty(kind, dims or 1)
        ordered = sorted(extents, key=lambda e: e.id)
        ids = [e.id for e in ordered]
        if ids != list(range(len(ordered))):
            raise ContractError(f"{kind.name} ids must be dense 0..{len(ordered) - 1}")
        for e in ordered:
            if e.kind is not kind:
                raise ContractError(f"Extent {e.kind.value}{e.id} mixed into {kind.name} set")
        d = ordered[0].dims
        if any(e.dims != d for e in ordered):
            raise ContractError(f"{kind.name} extents have inconsistent dimensionality")
        return cls.from_boxes(kind, [e.bounds for e in ordered])

    # --- access ---

    @property
    def dims(self) -> int:
        return self.lows.shape[1]

    def __len__(self) -> int:
        return self.lows.shape[0]

    def __getitem__(self, i: int) -> Extent:
        i = int(i)
        return Extent(i, self.kind, tuple(zip(self.lows[i].tolist(), self.highs[i].tolist())))

    def __iter__(self) -> Iterator[Extent]:
        for i in range(len(self)):
            yield self[i]

    def column(self, dim: int) -> Tuple[np.ndarray, np.ndarray]:
        """(lows, highs) of every extent on one dimension."""
        return self.lows[:, dim], self.highs[:, dim]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtentSet):
            return NotImplemented
        return (self.kind is other.kind
                and self.lows.shape == other.lows.shape
                and np.array_equal(self.lows, other.lows)
                and np.array_equal(self.highs, other.highs))

    __hash__ = None

    def __repr__(self) -> str:
        return f"ExtentSet({self.kind.name}, count={len(self)}, dims={self.dims})"


def check_same_dims(S: ExtentSet, U: ExtentSet) -> int:
    if S.dims != U.dims:
        raise ContractError(f"Dimensionality mismatch: subscriptions d={S.dims}, updates d={U.dims}")
    return S.dims


# =============================================================================
# PREDICATES
# =============================================================================

def intersect_1d(x: Interval, y: Interval) -> bool:
    """Closed intervals x and y share at least one point."""
    return x[0] <= y[1] and y[0] <= x[1]


def intersect_dd(a: Extent, b: Extent) -> bool:
    """Two d-rectangles overlap iff their projections overlap on every dimension."""
    if a.dims != b.dims:
        raise ContractError(f"Dimensionality mismatch: {a.dims} vs {b.dims}")
    return all(intersect_1d(x, y) for x, y in zip(a.bounds, b.bounds))


# =============================================================================
# ENDPOINT LIST
# =============================================================================

class EndpointRecord(NamedTuple):
    coord: float
    is_lower: bool
    owner_kind: Kind
    owner_id: int


_KINDS = (Kind.SUBSCRIPTION, Kind.UPDATE)


class EndpointList:
    """
    Sorted endpoint list T, stored as parallel numpy arrays.

    Slicing yields a segment (a view sharing the same arrays); integer
    indexing yields an EndpointRecord.
    """

    def __init__(self, coord: np.ndarray, is_lower: np.ndarray, kind: np.ndarray, owner_id: np.ndarray):
        self.coord = coord
        self.is_lower = is_lower
        self.kind = kind
        self.owner_id = owner_id

    def __len__(self) -> int:
        return self.coord.shape[0]

    def __getitem__(self, index):
        if isinstance(index, slice):
            return EndpointList(self.coord[index], self.is_lower[index],
                                self.kind[index], self.owner_id[index])
        return EndpointRecord(float(self.coord[index]), bool(self.is_lower[index]),
                              _KINDS[int(self.kind[index])], int(self.owner_id[index]))

    def __iter__(self) -> Iterator[EndpointRecord]:
        for coord, lower, kind, owner in zip(self.coord.tolist(), self.is_lower.tolist(),
                                             self.kind.tolist(), self.owner_id.tolist()):
            yield EndpointRecord(coord, lower, _KINDS[kind], owner)

    def iter_events(self) -> Iterator[Tuple[bool, int, int]]:
        """(is_lower, kind code, owner_id) triples in sweep order."""
        return zip(self.is_lower.tolist(), self.kind.tolist(), self.owner_id.tolist())


def endpoint_sort_key(record: EndpointRecord) -> Tuple[float, int, int, int]:
    """Composite key: coord, lower before upper, owner id, subscription before update."""
    return (record.coord, 0 if record.is_lower else 1, record.owner_id, record.owner_kind.code)


def endpoint_arrays(S: ExtentSet, U: ExtentSet, dim: int = 0) -> Tuple[np.ndarray, ...]:
    """Unsorted (coord, is_lower, kind, owner_id) columns of every bound on `dim`."""
    d = check_same_dims(S, U)
    if not 0 <= dim < d:
        raise ContractError(f"Matching dimension {dim} out of range for d={d}")

    n, m = len(S), len(U)
    s_low, s_high = S.column(dim)
    u_low, u_high = U.column(dim)

    coord = np.concatenate([s_low, s_high, u_low, u_high])
    is_lower = np.concatenate([np.ones(n, bool), np.zeros(n, bool),
                               np.ones(m, bool), np.zeros(m, bool)])
    kind = np.concatenate([np.full(2 * n, SUB, np.int8), np.full(2 * m, UPD, np.int8)])
    owner_id = np.concatenate([np.arange(n), np.arange(n), np.arange(m), np.arange(m)]).astype(np.int64)
    return coord, is_lower, kind, owner_id


def sort_endpoints(coord: np.ndarray, is_lower: np.ndarray, kind: np.ndarray,
                   owner_id: np.ndarray) -> EndpointList:
    """Order endpoint columns by the composite key."""
    # lexsort: last key is primary
    order = np.lexsort((kind, owner_id, ~is_lower, coord))
    return EndpointList(coord[order], is_lower[order], kind[order], owner_id[order])


def build_endpoint_list(S: ExtentSet, U: ExtentSet, dim: int = 0) -> EndpointList:
    """
    Insert the lower and upper bound of every extent on `dim` and sort them.

    Returns 2(n + m) records in composite-key order.
    """
    return sort_endpoints(*endpoint_arrays(S, U, dim))


# =============================================================================
# PAIR REPORT
# =============================================================================

Pair = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class PairReport:
    """Matching result: the count K, plus the pair list in List mode."""

    mode: Mode
    count: int
    pairs: Optional[Tuple[Pair, ...]] = field(default=None, repr=False)

    def __post_init__(self):
        if self.count < 0:
            raise ContractError(f"Negative match count {self.count}")
        if self.mode is Mode.LIST:
            if self.pairs is None:
                raise ContractError("List-mode report needs pairs")
            if self.count != len(self.pairs):
                raise ContractError(f"count {self.count} != {len(self.pairs)} listed pairs")
            if len(set(self.pairs)) != len(self.pairs):
                raise ContractError("Duplicate pairs in report")
        elif self.pairs is not None:
            raise ContractError("Count-mode report must not carry pairs")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Pair]) -> 'PairReport':
        pairs = tuple((int(s), int(u)) for s, u in pairs)
        return cls(Mode.LIST, len(pairs), pairs)

    @classmethod
    def from_count(cls, count: int) -> 'PairReport':
        return cls(Mode.COUNT, int(count))

    @classmethod
    def empty(cls, mode: Mode) -> 'PairReport':
        return cls.from_pairs(()) if mode is Mode.LIST else cls.from_count(0)

    @classmethod
    def merge(cls, reports: Sequence['PairReport'], mode: Mode) -> 'PairReport':
        """Concatenate partial reports in the given order."""
        if mode is Mode.LIST:
            pairs: List[Pair] = []
            for report in reports:
                pairs.extend(report.pairs)
            return cls(Mode.LIST, len(pairs), tuple(pairs))
        return cls.from_count(sum(r.count for r in reports))

    def pair_set(self) -> frozenset:
        if self.pairs is None:
            raise ContractError("Count-mode report has no pairs")
        return frozenset(self.pairs)

    def validate(self, n: int, m: int) -> None:
        if self.count > n * m:
            raise ContractError(f"K={self.count} exceeds n*m={n * m}")
        if self.pairs is not None:
            for s, u in self.pairs:
                if not (0 <= s < n and 0 <= u < m):
                    raise ContractError(f"Pair (S{s}, U{u}) references a missing extent")

    def __eq__(self, other) -> bool:
        if not isinstance(other, PairReport):
            return NotImplemented
        if self.mode is not other.mode or self.count != other.count:
            return False
        return self.pairs is None or set(self.pairs) == set(other.pairs)

    __hash__ = None


# =============================================================================
# EXTENT TEXT FORMAT
# =============================================================================

_KIND_TAGS = {'S': Kind.SUBSCRIPTION, 'U': Kind.UPDATE}


def format_extent_line(extent: Extent) -> str:
    """`kind id low_0 high_0 [low_1 high_1 ...]` with round-trip precision."""
    coords = ' '.join(f"{lo!r} {hi!r}" for lo, hi in extent.bounds)
    return f"{extent.kind.value} {extent.id} {coords}"


def parse_extent_line(line: str, line_number: int) -> Optional[Extent]:
    """Parse one line; returns None for blank and `#` comment lines."""
    text = line.strip()
    if not text or text.startswith('#'):
        return None

    fields = text.split()
    kind = _KIND_TAGS.get(fields[0])
    if kind is None:
        raise ExtentFormatError(line_number, f"invalid kind tag '{fields[0]}' (expected S or U)")
    if len(fields) < 4 or (len(fields) - 2) % 2 != 0:
        raise ExtentFormatError(line_number, "expected 'kind id low high [low high ...]'")
    try:
        ext_id = int(fields[1])
    except ValueError:
        raise ExtentFormatError(line_number, f"invalid id '{fields[1]}'") from None
    try:
        coords = [float(v) for v in fields[2:]]
    except ValueError:
        raise ExtentFormatError(line_number, "coordinates must be decimal numbers") from None

    bounds = tuple(zip(coords[0::2], coords[1::2]))
    try:
        return Extent(ext_id, kind, bounds)
    except ContractError as exc:
        raise ExtentFormatError(line_number, str(exc)) from None
