"""
Interval-Tree Matcher
Contains: IntervalTreeNode, IntervalTree, interval_tree_build, interval_query,
          match_interval_tree

AVL tree keyed on interval lower bounds. Every node carries the minimum
lower bound and maximum upper bound of its subtree; insertions refresh
them (and the AVL heights) on the whole path back to the root.
The tree over the subscriptions is built serially, then the update queries
are split across workers.
"""

import logging
from typing import Callable, List, Optional

from ddm_core import ContractError, ExtentSet, Mode, PairReport, check_same_dims
from matchers.worker_pool import split_range, worker_pool

logger = logging.getLogger(__name__)


class IntervalTreeNode:
    __slots__ = ['low', 'high', 'owner_id', 'minlower', 'maxupper',
                 'left', 'right', 'parent', 'height']

    def __init__(self, low: float, high: float, owner_id: int):
        self.low = low
        self.high = high
        self.owner_id = owner_id
        self.minlower = low
        self.maxupper = high
        self.left: Optional['IntervalTreeNode'] = None
        self.right: Optional['IntervalTreeNode'] = None
        self.parent: Optional['IntervalTreeNode'] = None
        self.height = 1


def _height(node: Optional[IntervalTreeNode]) -> int:
    return node.height if node else 0


class IntervalTree:
    def __init__(self):
        self.root: Optional[IntervalTreeNode] = None
        self.size = 0

    # --- Internal Utilities ---

    def _update(self, node: IntervalTreeNode):
        node.height = 1 + max(_height(node.left), _height(node.right))
        lo, hi = node.low, node.high
        if node.left:
            lo = min(lo, node.left.minlower)
            hi = max(hi, node.left.maxupper)
        if node.right:
            lo = min(lo, node.right.minlower)
            hi = max(hi, node.right.maxupper)
        node.minlower = lo
        node.maxupper = hi

    def _replace_child(self, old: IntervalTreeNode, new: IntervalTreeNode):
        parent = old.parent
        new.parent = parent
        if parent is None:
            self.root = new
        elif parent.left is old:
            parent.left = new
        else:
            parent.right = new

    def _rotate_left(self, x: IntervalTreeNode):
        y = x.right
        x.right = y.left
        if y.left:
            y.left.parent = x
        self._replace_child(x, y)
        y.left = x
        x.parent = y
        self._update(x)
        self._update(y)

    def _rotate_right(self, y: IntervalTreeNode):
        x = y.left
        y.left = x.right
        if x.right:
            x.right.parent = y
        self._replace_child(y, x)
        x.right = y
        y.parent = x
        self._update(y)
        self._update(x)

    def _rebalance(self, node: Optional[IntervalTreeNode]):
        # walks to the root, so augmentation changes always reach it
        while node:
            self._update(node)
            balance = _height(node.left) - _height(node.right)
            if balance > 1:
                if _height(node.left.left) < _height(node.left.right):
                    self._rotate_left(node.left)
                self._rotate_right(node)
                node = node.parent
            elif balance < -1:
                if _height(node.right.right) < _height(node.right.left):
                    self._rotate_right(node.right)
                self._rotate_left(node)
                node = node.parent
            node = node.parent

    # --- Public API ---

    def insert(self, low: float, high: float, owner_id: int) -> IntervalTreeNode:
        if low > high:
            raise ContractError(f"Interval [{low}, {high}] has low > high")
        new_node = IntervalTreeNode(low, high, owner_id)
        self.size += 1
        if self.root is None:
            self.root = new_node
            return new_node

        curr = self.root
        parent = None
        while curr:
            parent = curr
            curr = curr.left if low < curr.low else curr.right

        new_node.parent = parent
        if low < parent.low:
            parent.left = new_node
        else:
            parent.right = new_node

        self._rebalance(parent)
        return new_node

    def query(self, low: float, high: float, sink: Callable[[int], None]) -> int:
        return interval_query(self.root, low, high, sink)

    @property
    def height(self) -> int:
        return _height(self.root)

    def in_order(self) -> List[IntervalTreeNode]:
        nodes, stack, node = [], [], self.root
        while stack or node:
            while node:
                stack.append(node)
                node = node.left
            node = stack.pop()
            nodes.append(node)
            node = node.right
        return nodes

    def verify(self) -> None:
        """Raise ContractError if ordering, augmentation or AVL balance is violated."""
        def _walk(node):
            if node is None:
                return 0, float('inf'), float('-inf')
            lh, lmin, lmax = _walk(node.left)
            rh, rmin, rmax = _walk(node.right)
            if abs(lh - rh) > 1:
                raise ContractError(f"AVL violation at node {node.owner_id}")
            if node.left and node.left.low > node.low:
                raise ContractError(f"Order violation at node {node.owner_id}")
            if node.right and node.right.low < node.low:
                raise ContractError(f"Order violation at node {node.owner_id}")
            expected_min = min(node.low, lmin, rmin)
            expected_max = max(node.high, lmax, rmax)
            if node.minlower != expected_min or node.maxupper != expected_max:
                raise ContractError(f"Augmentation violation at node {node.owner_id}")
            height = 1 + max(lh, rh)
            if node.height != height:
                raise ContractError(f"Stale height at node {node.owner_id}")
            return height, expected_min, expected_max

        _walk(self.root)
        lows = [node.low for node in self.in_order()]
        if any(a > b for a, b in zip(lows, lows[1:])):
            raise ContractError("In-order traversal is not sorted by lower bound")


def interval_tree_build(S: ExtentSet, dim: int = 0) -> IntervalTree:
    """Insert every subscription interval on `dim` into a fresh tree."""
    tree = IntervalTree()
    lows, highs = S.column(dim)
    for owner_id, (low, high) in enumerate(zip(lows.tolist(), highs.tolist())):
        tree.insert(low, high, owner_id)
    return tree


def interval_query(node: Optional[IntervalTreeNode], low: float, high: float,
                   sink: Callable[[int], None]) -> int:
    """
    Emit the owner id of every stored interval intersecting [low, high].

    Returns:
        Number of nodes visited (a subtree pruned at its root counts 1)
    """
    if node is None:
        return 0
    visits = 1
    if node.maxupper < low or node.minlower > high:
        return visits

    visits += interval_query(node.left, low, high, sink)
    if node.low <= high and low <= node.high:
        sink(node.owner_id)
    if high >= node.low:
        visits += interval_query(node.right, low, high, sink)
    return visits


def _query_block(tree, U: ExtentSet, start: int, stop: int,
                 dim: int, mode: Mode) -> PairReport:
    # process workers receive S and build their own copy of the tree
    if isinstance(tree, ExtentSet):
        tree = interval_tree_build(tree, dim)
    lows, highs = U.column(dim)
    pairs = []
    count = 0
    for j, (low, high) in enumerate(zip(lows[start:stop].tolist(), highs[start:stop].tolist()), start):
        hits: List[int] = []
        interval_query(tree.root, low, high, hits.append)
        if mode is Mode.LIST:
            pairs.extend((s, j) for s in hits)
        else:
            count += len(hits)

    if mode is Mode.LIST:
        return PairReport(Mode.LIST, len(pairs), tuple(pairs))
    return PairReport.from_count(count)


def match_interval_tree(S: ExtentSet, U: ExtentSet, mode=Mode.LIST, workers: int = 1,
                        dim: int = 0, backend: str = 'thread') -> PairReport:
    """
    Interval-tree matching: build over S serially, query each update.

    Args:
        workers: number of workers sharing the update queries
        backend: worker backend name; queries only read the shared tree
    """
    check_same_dims(S, U)
    mode = Mode.parse(mode)
    if workers < 1:
        raise ContractError(f"Worker count must be >= 1, got {workers}")
    if len(S) == 0 or len(U) == 0:
        return PairReport.empty(mode)

    ranges = split_range(len(U), min(workers, len(U)))
    if backend == 'process' and len(ranges) > 1:
        shared = S
    else:
        shared = interval_tree_build(S, dim)
        logger.debug("Interval tree built: %d nodes, height %d", shared.size, shared.height)

    with worker_pool(backend, len(ranges)) as pool:
        partials = pool.map(
            _query_block,
            [shared] * len(ranges),
            [U] * len(ranges),
            [a for a, _ in ranges],
            [b for _, b in ranges],
            [dim] * len(ranges),
            [mode] * len(ranges),
        )
    return PairReport.merge(partials, mode)
