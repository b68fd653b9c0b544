"""Workload generation, the analytic match-count moments and extent files."""

import json

import numpy as np
import pytest

from ddm_config import RNG_IDENTITY
from ddm_core import ConfigError, ExtentFormatError, ExtentSet, Kind, Mode
from matchers.brute_force import match_brute_force
from workload import (WorkloadConfig, _overlap_moments, expected_matches, expected_matches_std,
                      generate_workload, load_extents, load_metadata, save_extents, save_workload)


class TestWorkloadConfig:

    @pytest.mark.parametrize("alpha, l", [(100, 100.0), (0.01, 0.01)])
    def test_extent_length(self, alpha, l):
        cfg = WorkloadConfig(N=10 ** 6, alpha=alpha, L=1e6)
        assert cfg.l == pytest.approx(l)
        assert cfg.n == cfg.m == 500_000

    def test_extent_longer_than_space(self):
        with pytest.raises(ConfigError, match="exceeds"):
            WorkloadConfig(N=10, alpha=20)

    def test_odd_N(self):
        with pytest.raises(ConfigError, match="even"):
            WorkloadConfig(N=11)

    def test_dict_round_trip(self):
        cfg = WorkloadConfig(N=100, alpha=2.5, seed=3, dims=2)
        assert WorkloadConfig.from_dict(cfg.to_dict()) == cfg
        with pytest.raises(ConfigError):
            WorkloadConfig.from_dict({'N': 10, 'beta': 1})


class TestGenerateWorkload:

    def test_deterministic(self):
        cfg = WorkloadConfig(N=2000, alpha=1.0, seed=5)
        S1, U1 = generate_workload(cfg)
        S2, U2 = generate_workload(cfg)
        assert S1 == S2 and U1 == U2
        S3, _ = generate_workload(cfg.with_seed(6))
        assert not np.array_equal(S1.lows, S3.lows)

    def test_geometry(self):
        cfg = WorkloadConfig(N=4000, alpha=100.0, seed=1, dims=2)
        S, U = generate_workload(cfg)
        assert len(S) == len(U) == 2000 and S.dims == U.dims == 2
        for extents in (S, U):
            assert extents.lows.min() >= 0 and extents.highs.max() <= cfg.L
            np.testing.assert_allclose(extents.highs - extents.lows, cfg.l, rtol=1e-9)

    def test_lower_bound_mean(self):
        cfg = WorkloadConfig(N=200_000, alpha=1.0, seed=8)
        S, _ = generate_workload(cfg)
        W = cfg.L - cfg.l
        sigma = W / np.sqrt(12 * len(S))
        assert abs(S.lows.mean() - W / 2) < 3 * sigma

    def test_full_length_extents(self):
        cfg = WorkloadConfig(N=10, alpha=10.0, L=100.0, seed=0)
        S, U = generate_workload(cfg)
        assert match_brute_force(S, U, Mode.COUNT).count == 25


class TestExpectedMatches:
    """Closed-form moments against numeric integration and sampled workloads."""

    @pytest.mark.parametrize("l, L", [(10.0, 1000.0), (300.0, 1000.0), (450.0, 1000.0), (0.01, 1e6)])
    def test_moments_match_integration(self, l, L):
        W = L - l
        x = (np.arange(400_000) + 0.5) * W / 400_000
        g = (np.minimum(x + l, W) - np.maximum(x - l, 0.0)) / W
        p, q = _overlap_moments(l, L)
        assert p == pytest.approx(g.mean(), rel=1e-6)
        assert q == pytest.approx((g ** 2).mean(), rel=1e-6)

    def test_dimensions_multiply(self):
        one = WorkloadConfig(N=1000, alpha=50.0, L=1000.0)
        two = WorkloadConfig(N=1000, alpha=50.0, L=1000.0, dims=2)
        p = expected_matches(one) / (one.n * one.m)
        assert expected_matches(two) == pytest.approx(two.n * two.m * p * p)

    @pytest.mark.parametrize("alpha", [0.01, 1.0, 100.0])
    def test_mean_K_within_three_sigma(self, alpha):
        seeds = 40
        cfg = WorkloadConfig(N=2000, alpha=alpha, seed=0)
        counts = [match_brute_force(*generate_workload(cfg.with_seed(s)), Mode.COUNT).count
                  for s in range(seeds)]
        sigma_mean = expected_matches_std(cfg) / np.sqrt(seeds)
        assert abs(np.mean(counts) - expected_matches(cfg)) <= 3 * sigma_mean

    @pytest.mark.slow
    @pytest.mark.parametrize("alpha", [0.01, 1.0, 100.0])
    def test_mean_K_full_scale(self, alpha):
        seeds = 200
        cfg = WorkloadConfig(N=10_000, alpha=alpha, seed=0)
        counts = np.array([match_brute_force(*generate_workload(cfg.with_seed(s)), Mode.COUNT).count
                           for s in range(seeds)])
        std = expected_matches_std(cfg)
        assert abs(counts.mean() - expected_matches(cfg)) <= 3 * std / np.sqrt(seeds)
        if alpha >= 1.0:
            assert counts.std(ddof=1) == pytest.approx(std, rel=0.25)


class TestExtentFiles:

    def test_round_trip(self, tmp_path, four_overlap):
        S, U, _ = four_overlap
        path = save_extents(S, U, tmp_path / "four.txt")
        S2, U2 = load_extents(path)
        assert S2 == S and U2 == U

    def test_generated_round_trip_is_exact(self, tmp_path):
        S, U = generate_workload(WorkloadConfig(N=200, alpha=3.0, seed=2, dims=3))
        S2, U2 = load_extents(save_extents(S, U, tmp_path / "w.txt"))
        assert S2 == S and U2 == U

    def test_empty_sets(self, tmp_path):
        S = ExtentSet.empty(Kind.SUBSCRIPTION, 2)
        U = ExtentSet.empty(Kind.UPDATE, 2)
        path = save_extents(S, U, tmp_path / "empty.txt")
        assert path.read_text().startswith("#")
        assert len(path.read_text().strip().splitlines()) == 1
        S2, U2 = load_extents(path)
        assert len(S2) == len(U2) == 0 and S2.dims == 2

    def test_bad_kind_tag(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("X 0 1 2\n")
        with pytest.raises(ExtentFormatError, match="line 1"):
            load_extents(path)

    def test_inconsistent_dimensions(self, tmp_path):
        path = tmp_path / "mixed.txt"
        path.write_text("# extents\nS 0 0 1 0 1\nU 0 0 1\n")
        with pytest.raises(ExtentFormatError, match="line 3"):
            load_extents(path)

    def test_duplicate_ids(self, tmp_path):
        path = tmp_path / "dup.txt"
        path.write_text("S 0 0 1\nS 0 2 3\n")
        with pytest.raises(ExtentFormatError, match="line 2"):
            load_extents(path)

    def test_sparse_ids(self, tmp_path):
        path = tmp_path / "sparse.txt"
        path.write_text("S 0 0 1\nS 2 2 3\n")
        with pytest.raises(ConfigError, match="dense"):
            load_extents(path)

    def test_workload_sidecar(self, tmp_path):
        cfg = WorkloadConfig(N=100, alpha=1.0, seed=9)
        S, U = generate_workload(cfg)
        path = save_workload(cfg, S, U, tmp_path / "w.txt")
        raw = json.loads((tmp_path / "w.txt.meta.json").read_text())
        assert raw['rng'] == RNG_IDENTITY
        meta = load_metadata(path)
        assert meta['config'] == cfg
        assert meta['expected_K'] == pytest.approx(expected_matches(cfg))

    def test_missing_sidecar(self, tmp_path):
        with pytest.raises(ConfigError):
            load_metadata(tmp_path / "nothing.txt")
