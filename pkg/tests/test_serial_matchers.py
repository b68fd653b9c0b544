"""Tests for brute force, grid, interval tree, sequential SBM and d-dimensional matching."""

import pytest

from algorithms import create_matcher
from conftest import brute_force_pairs, make_random_instance
from ddm_core import ConfigError, ContractError, ExtentSet, Kind, Mode, PairReport
from matcher_base import match_dd
from matchers.brute_force import match_brute_force
from matchers.grid import build_grid_index, match_grid
from matchers.interval_tree import match_interval_tree
from matchers.sort_based import match_sbm_seq
from matchers.sweep_sets import BitVectorSet, make_sweep_set

ALPHA_LIKE = [(5, 1000), (40, 1000), (400, 1000)]     # (max_len, space): sparse, medium, dense


def one_dim(n_pairs_s, n_pairs_u):
    return (ExtentSet.from_intervals(Kind.SUBSCRIPTION, n_pairs_s),
            ExtentSet.from_intervals(Kind.UPDATE, n_pairs_u))


class TestBruteForce:
    """The oracle itself, checked against a plain double loop."""

    def test_four_overlap(self, four_overlap):
        S, U, expected = four_overlap
        assert match_brute_force(S, U).pair_set() == expected

    def test_empty_side(self):
        S, U = one_dim([(0, 1)], [])
        assert match_brute_force(S, U, Mode.COUNT).count == 0
        S, U = one_dim([], [(0, 1)])
        assert match_brute_force(S, U) == PairReport.empty(Mode.LIST)

    def test_identical_single_extents(self):
        S, U = one_dim([(2, 5)], [(2, 5)])
        assert match_brute_force(S, U).pairs == ((0, 0),)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_double_loop(self, seed):
        S, U = make_random_instance(seed, 60, 70, dims=2, space=200, max_len=40)
        assert match_brute_force(S, U).pair_set() == brute_force_pairs(S, U)

    def test_workers_do_not_change_output(self):
        S, U = make_random_instance(9, 300, 200)
        reference = match_brute_force(S, U)
        for workers in (2, 3, 8):
            assert match_brute_force(S, U, workers=workers, backend='serial').pairs == reference.pairs
        assert match_brute_force(S, U, workers=4, backend='thread').pairs == reference.pairs

    def test_count_mode(self):
        S, U = make_random_instance(4, 100, 100)
        assert match_brute_force(S, U, Mode.COUNT).count == match_brute_force(S, U).count


class TestGrid:
    """Grid-based matching with leftmost-cell deduplication."""

    def test_single_cell_equals_brute_force(self):
        S, U = make_random_instance(1, 150, 150)
        assert match_grid(S, U, 1, bounds=(0, 1100)) == match_brute_force(S, U)

    def test_shared_cell_without_overlap(self):
        # both extents fall into the first cell of width 25 but do not intersect
        S, U = one_dim([(10, 20)], [(22, 30)])
        grid = build_grid_index(S, U, 40, bounds=(0, 1000))
        assert grid.cell_width == 25
        assert list(grid.sub_cells[0]) == [0] and list(grid.upd_cells[0]) == [0]
        assert match_grid(S, U, 40, bounds=(0, 1000)).count == 0

    def test_pair_spanning_many_cells_reported_once(self):
        S, U = one_dim([(0, 900)], [(100, 800)])
        report = match_grid(S, U, 64, bounds=(0, 1000))
        assert report.pairs == ((0, 0),)

    @pytest.mark.parametrize("cells", [1, 4, 64])
    @pytest.mark.parametrize("max_len, space", ALPHA_LIKE)
    def test_equals_oracle(self, cells, max_len, space):
        for seed in range(10):
            S, U = make_random_instance(seed, 80, 80, space=space, max_len=max_len)
            assert match_grid(S, U, cells, bounds=(0, space)) == match_brute_force(S, U)

    def test_out_of_range_extents_clamp(self):
        S, U = one_dim([(-50, -10), (990, 1200)], [(-20, 0), (1100, 1300)])
        assert match_grid(S, U, 8, bounds=(0, 1000)).pair_set() == {(0, 0), (1, 1)}

    def test_zero_cells_rejected(self):
        S, U = one_dim([(0, 1)], [(0, 1)])
        with pytest.raises(ContractError):
            match_grid(S, U, 0)

    def test_count_mode(self):
        S, U = make_random_instance(6, 200, 200)
        assert match_grid(S, U, 16, Mode.COUNT, bounds=(0, 1000)).count == match_brute_force(S, U).count


class TestIntervalTreeMatcher:
    """Interval-tree matching over the update queries."""

    def test_four_overlap(self, four_overlap):
        S, U, expected = four_overlap
        assert create_matcher('itm').run(S, U).pair_set() == expected

    @pytest.mark.parametrize("max_len, space", ALPHA_LIKE)
    def test_equals_oracle(self, max_len, space):
        for seed in range(10):
            S, U = make_random_instance(seed, 100, 90, space=space, max_len=max_len)
            assert match_interval_tree(S, U) == match_brute_force(S, U)

    def test_workers_do_not_change_output(self):
        S, U = make_random_instance(12, 200, 200)
        reference = match_interval_tree(S, U)
        for workers in (2, 5, 16):
            assert match_interval_tree(S, U, workers=workers, backend='serial').pairs == reference.pairs
        assert match_interval_tree(S, U, workers=3, backend='thread').pairs == reference.pairs

    def test_empty_subscriptions(self):
        S = ExtentSet.empty(Kind.SUBSCRIPTION)
        U = ExtentSet.from_intervals(Kind.UPDATE, [(0, 1)])
        assert match_interval_tree(S, U, Mode.COUNT).count == 0


class TestSortBasedSequential:
    """Sequential sweep."""

    def test_four_overlap(self, four_overlap):
        S, U, expected = four_overlap
        assert create_matcher('sbm').run(S, U).pair_set() == expected

    def test_nested_pair_reported_once(self):
        S, U = one_dim([(0, 10)], [(2, 3)])
        assert match_sbm_seq(S, U).pairs == ((0, 0),)

    def test_touching_endpoints(self):
        S, U = one_dim([(5, 10)], [(10, 12)])
        assert match_sbm_seq(S, U).pairs == ((0, 0),)

    @pytest.mark.parametrize("set_impl", ['sorted', 'bitvector'])
    @pytest.mark.parametrize("max_len, space", ALPHA_LIKE)
    def test_equals_oracle(self, set_impl, max_len, space):
        for seed in range(10):
            S, U = make_random_instance(seed, 120, 100, space=space, max_len=max_len)
            oracle = match_brute_force(S, U)
            assert match_sbm_seq(S, U, set_impl=set_impl) == oracle
            assert match_sbm_seq(S, U, Mode.COUNT, set_impl=set_impl).count == oracle.count

    def test_empty_inputs(self):
        S = ExtentSet.empty(Kind.SUBSCRIPTION)
        U = ExtentSet.empty(Kind.UPDATE)
        assert match_sbm_seq(S, U) == PairReport.empty(Mode.LIST)


class TestSweepSets:
    """Both sweep-set representations behave like a set of ids."""

    @pytest.mark.parametrize("impl", ['sorted', 'bitvector'])
    def test_add_remove_len(self, impl):
        s = make_sweep_set(impl, 10, [3, 1])
        s.add(7)
        s.remove(1)
        assert len(s) == 2 and 7 in s and 1 not in s
        assert list(s) == [3, 7]
        with pytest.raises(KeyError):
            s.remove(1)

    def test_bitvector_out_of_range_membership(self):
        assert 50 not in BitVectorSet(10)

    def test_unknown_impl(self):
        with pytest.raises(ValueError):
            make_sweep_set('hash', 4)


class TestMatchDD:
    """Dimension-0 matching followed by filtering on the other dimensions."""

    @pytest.mark.parametrize("algorithm", ['bf', 'grid', 'itm', 'sbm', 'sbm-par'])
    def test_four_overlap_all_algorithms(self, four_overlap, algorithm):
        S, U, expected = four_overlap
        report = match_dd(S, U, algorithm, Mode.LIST, workers=2, backend='serial', bounds=(0, 10))
        assert report.pair_set() == expected
        assert match_dd(S, U, algorithm, Mode.COUNT, bounds=(0, 10)).count == 4

    def test_crossing_rectangles(self):
        S = ExtentSet.from_boxes(Kind.SUBSCRIPTION, [((0, 10), (0, 1))])
        U = ExtentSet.from_boxes(Kind.UPDATE, [((2, 3), (5, 9))])
        for algorithm in ('sbm', 'itm', 'grid'):
            assert match_dd(S, U, algorithm, Mode.COUNT).count == 0

    def test_one_dimension_passes_through(self):
        S, U = make_random_instance(5, 50, 50)
        assert match_dd(S, U, 'sbm') == match_sbm_seq(S, U)

    @pytest.mark.parametrize("dims", [2, 3])
    def test_equals_dd_oracle(self, dims):
        for seed in range(5):
            S, U = make_random_instance(seed, 70, 60, dims=dims, space=300, max_len=120)
            expected = brute_force_pairs(S, U)
            for algorithm in ('grid', 'itm', 'sbm', 'sbm-par'):
                report = match_dd(S, U, algorithm, workers=3, backend='serial', bounds=(0, 300))
                assert report.pair_set() == expected

    def test_explicit_dimension_subset(self):
        S = ExtentSet.from_boxes(Kind.SUBSCRIPTION, [((0, 1), (0, 1))])
        U = ExtentSet.from_boxes(Kind.UPDATE, [((5, 6), (0, 1))])
        assert match_dd(S, U, 'sbm', Mode.COUNT, dims=[1]).count == 1
        assert match_dd(S, U, 'sbm', Mode.COUNT).count == 0

    def test_unknown_algorithm(self):
        S, U = make_random_instance(0, 3, 3)
        with pytest.raises(ConfigError, match="Available"):
            match_dd(S, U, 'kd-tree')
