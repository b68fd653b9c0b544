"""Interval tree structure and stabbing queries."""

import math

import numpy as np
import pytest

from ddm_core import ContractError, ExtentSet, Kind, intersect_1d
from matchers.interval_tree import IntervalTree, interval_query, interval_tree_build


def random_tree(seed, n, space=1000.0, max_len=50.0):
    rng = np.random.default_rng(seed)
    lows = rng.uniform(0, space, size=n)
    highs = lows + rng.uniform(0, max_len, size=n)
    S = ExtentSet.from_intervals(Kind.SUBSCRIPTION, list(zip(lows, highs)))
    return S, interval_tree_build(S)


def recompute(node):
    """(minlower, maxupper) of the subtree by full traversal."""
    lo, hi = node.low, node.high
    for child in (node.left, node.right):
        if child is not None:
            c_lo, c_hi = recompute(child)
            lo, hi = min(lo, c_lo), max(hi, c_hi)
    return lo, hi


class TestIntervalTreeBuild:
    """AVL insertion with subtree augmentation."""

    def test_empty(self):
        tree = interval_tree_build(ExtentSet.empty(Kind.SUBSCRIPTION))
        hits = []
        assert tree.root is None and tree.height == 0
        assert tree.query(0, 100, hits.append) == 0 and hits == []

    def test_structure_after_many_inserts(self):
        n = 10_000
        _, tree = random_tree(7, n)
        tree.verify()
        nodes = tree.in_order()
        assert len(nodes) == n == tree.size
        assert all(a.low <= b.low for a, b in zip(nodes, nodes[1:]))
        for node in nodes:
            assert (node.minlower, node.maxupper) == recompute(node)
        assert tree.height <= 1.44 * math.log2(n + 2)

    def test_sorted_inserts_stay_balanced(self):
        tree = IntervalTree()
        for i in range(2000):
            tree.insert(float(i), float(i) + 1.5, i)
        tree.verify()
        assert tree.height <= 1.44 * math.log2(2000 + 2)

    def test_equal_lower_bounds(self):
        tree = IntervalTree()
        for i in range(100):
            tree.insert(5.0, 5.0 + i, i)
        tree.verify()
        assert sorted(n.owner_id for n in tree.in_order()) == list(range(100))

    def test_verify_detects_stale_augmentation(self):
        _, tree = random_tree(1, 50)
        tree.root.maxupper = -1.0
        with pytest.raises(ContractError, match="Augmentation"):
            tree.verify()

    def test_insert_rejects_inverted_interval(self):
        with pytest.raises(ContractError):
            IntervalTree().insert(3.0, 1.0, 0)


class TestIntervalQuery:
    """Pruned stabbing queries."""

    def test_disjoint_query_visits_root_only(self):
        _, tree = random_tree(2, 500)
        hits = []
        assert interval_query(tree.root, 5000.0, 6000.0, hits.append) == 1
        assert hits == []

    def test_query_spanning_everything(self):
        S, tree = random_tree(3, 400)
        hits = []
        tree.query(-1.0, 2000.0, hits.append)
        assert sorted(hits) == list(range(len(S)))

    def test_equals_linear_scan(self):
        S, tree = random_tree(4, 800)
        rng = np.random.default_rng(44)
        intervals = [e.bounds[0] for e in S]
        for _ in range(200):
            lo = rng.uniform(-20, 1020)
            hi = lo + rng.uniform(0, 80)
            hits = []
            tree.query(lo, hi, hits.append)
            expected = [i for i, iv in enumerate(intervals) if intersect_1d(iv, (lo, hi))]
            assert sorted(hits) == expected

    def test_point_query_on_shared_endpoint(self):
        tree = IntervalTree()
        tree.insert(1.0, 3.0, 0)
        tree.insert(3.0, 4.0, 1)
        tree.insert(4.5, 6.0, 2)
        hits = []
        tree.query(3.0, 3.0, hits.append)
        assert sorted(hits) == [0, 1]
