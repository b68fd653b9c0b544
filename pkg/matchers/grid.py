"""
Grid-Based Matcher
Contains: GridIndex, build_grid_index, match_grid

The matching dimension of the routing space is cut into G equal cells.
Every extent is registered in each cell it overlaps; brute force runs per
cell. A candidate pair is reported only by the cell holding
max(s.low, u.low), the leftmost point of the intersection, so each pair
comes out exactly once and spurious shared-cell candidates are filtered.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ddm_config import WORKLOAD_DEFAULTS
from ddm_core import ContractError, ExtentSet, Mode, PairReport, check_same_dims


@dataclass(frozen=True)
class GridIndex:
    cell_count: int
    lower: float
    upper: float
    sub_cells: List[np.ndarray]     # subscription ids per cell
    upd_cells: List[np.ndarray]     # update ids per cell

    @property
    def cell_width(self) -> float:
        return (self.upper - self.lower) / self.cell_count

    def cell_of(self, x):
        """Cell index of coordinate(s) x; out-of-range points clamp to the boundary cells."""
        idx = np.floor((np.asarray(x, dtype=np.float64) - self.lower) / self.cell_width)
        return np.clip(idx, 0, self.cell_count - 1).astype(np.int64)


def _bucket(first: np.ndarray, last: np.ndarray, cell_count: int) -> List[np.ndarray]:
    """Group ids by every cell in [first[i], last[i]]."""
    spans = last - first + 1
    ids = np.repeat(np.arange(first.shape[0]), spans)
    run_start = np.repeat(np.cumsum(spans) - spans, spans)
    cells = np.repeat(first, spans) + (np.arange(ids.shape[0]) - run_start)

    order = np.argsort(cells, kind='stable')
    cuts = np.searchsorted(cells[order], np.arange(1, cell_count))
    return np.split(ids[order], cuts)


def build_grid_index(S: ExtentSet, U: ExtentSet, cell_count: int,
                     bounds: Optional[Tuple[float, float]] = None, dim: int = 0) -> GridIndex:
    if cell_count < 1:
        raise ContractError(f"Grid cell count must be >= 1, got {cell_count}")
    lower, upper = bounds if bounds is not None else (0.0, WORKLOAD_DEFAULTS['L'])
    if not upper > lower:
        raise ContractError(f"Empty routing space [{lower}, {upper})")

    layout = GridIndex(cell_count, float(lower), float(upper), [], [])
    s_low, s_high = S.column(dim)
    u_low, u_high = U.column(dim)
    return GridIndex(
        cell_count, float(lower), float(upper),
        _bucket(layout.cell_of(s_low), layout.cell_of(s_high), cell_count),
        _bucket(layout.cell_of(u_low), layout.cell_of(u_high), cell_count),
    )


def match_grid(S: ExtentSet, U: ExtentSet, cell_count: int, mode=Mode.LIST,
               bounds: Optional[Tuple[float, float]] = None, dim: int = 0) -> PairReport:
    """
    Grid-based matching on one dimension.

    Args:
        cell_count: number of grid cells G (>= 1)
        bounds: routing-space (lower, upper); default (0, L)
        dim: matching dimension
    """
    check_same_dims(S, U)
    mode = Mode.parse(mode)
    grid = build_grid_index(S, U, cell_count, bounds, dim)

    s_low, s_high = S.column(dim)
    u_low, u_high = U.column(dim)
    count = 0
    pairs = []

    for cell, (subs, upds) in enumerate(zip(grid.sub_cells, grid.upd_cells)):
        if subs.size == 0 or upds.size == 0:
            continue
        sl, sh = s_low[subs][:, None], s_high[subs][:, None]
        ul, uh = u_low[upds][None, :], u_high[upds][None, :]
        mask = (sl <= uh) & (ul <= sh)
        mask &= grid.cell_of(np.maximum(sl, ul)) == cell

        if mode is Mode.LIST:
            rows, cols = np.nonzero(mask)
            pairs.extend(zip(subs[rows].tolist(), upds[cols].tolist()))
        else:
            count += int(np.count_nonzero(mask))

    if mode is Mode.LIST:
        return PairReport(Mode.LIST, len(pairs), tuple(pairs))
    return PairReport.from_count(count)
