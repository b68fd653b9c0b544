"""Command-line entry points and their exit codes."""

import os
import re
import time

import pandas as pd
import pytest

import algorithms
from algorithms import create_matcher
from cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_OK, main
from ddm_config import CSV_COLUMNS
from ddm_core import PairReport
from matchers.brute_force import match_brute_force
from workload import load_extents, save_extents


def k_from(output):
    return int(re.search(r"K=(\d+)", output).group(1))


class TestGenAndMatch:

    def test_generated_file_matches_across_algorithms(self, tmp_path, capsys):
        path = tmp_path / "w.txt"
        assert main(['gen', '--n', '400', '--alpha', '2', '--seed', '7', '--out', str(path)]) == EXIT_OK
        assert (tmp_path / "w.txt.meta.json").exists()
        capsys.readouterr()

        S, U = load_extents(path)
        expected = match_brute_force(S, U).count
        for algo, threads in [('bf', '1'), ('grid', '1'), ('itm', '2'), ('sbm', '1'), ('sbm-par', '3')]:
            assert main(['match', '--algo', algo, '--threads', threads, '--input', str(path)]) == EXIT_OK
            line = capsys.readouterr().out.strip()
            assert line.startswith(f"algorithm={algo} P={threads} ")
            assert k_from(line) == expected

    def test_generated_workload_without_file(self, capsys):
        assert main(['match', '--algo', 'sbm', '--n', '200', '--alpha', '1']) == EXIT_OK
        assert "wct_seconds=" in capsys.readouterr().out

    def test_list_mode_writes_pairs(self, tmp_path, four_overlap, capsys):
        S, U, expected = four_overlap
        extents = save_extents(S, U, tmp_path / "four.txt")
        out = tmp_path / "pairs.csv"
        assert main(['match', '--algo', 'itm', '--mode', 'list', '--input', str(extents),
                     '--out', str(out)]) == EXIT_OK
        pairs = pd.read_csv(out)
        assert list(pairs.columns) == ['subscription_id', 'update_id']
        assert set(map(tuple, pairs.values.tolist())) == expected
        assert k_from(capsys.readouterr().out) == 4


class TestBenchAndScaling:

    def test_bench_then_scaling(self, tmp_path, capsys):
        raw_path, agg_path, scaling_path = tmp_path / "raw.csv", tmp_path / "agg.csv", tmp_path / "s.csv"
        code = main(['bench', '--algo', 'sbm-par', '--algo', 'sbm', '--n', '500', '--alpha', '1',
                     '--threads', '1', '--threads', '2', '--reps', '2', '--backend', 'serial',
                     '--out', str(raw_path), '--agg-out', str(agg_path)])
        assert code == EXIT_OK
        assert raw_path.read_text().splitlines()[0] == ','.join(CSV_COLUMNS)
        raw = pd.read_csv(raw_path)
        assert len(raw) == 2 * 2 + 2
        assert raw.K.nunique() == 1
        assert set(pd.read_csv(agg_path).reps) == {2}

        assert main(['scaling', '--input', str(raw_path), '--out', str(scaling_path)]) == EXIT_OK
        summary = pd.read_csv(scaling_path)
        baseline = summary[(summary.algorithm == 'sbm-par') & (summary.P == 1)].iloc[0]
        assert baseline.speedup == pytest.approx(1.0)

    def test_bench_budget_exceeded(self, tmp_path):
        code = main(['bench', '--n', '200', '--alpha', '1', '--reps', '1',
                     '--time-budget-secs', '1e-12', '--out', str(tmp_path / "raw.csv")])
        assert code == EXIT_BUDGET

    def test_bench_nothing_feasible(self, tmp_path):
        code = main(['bench', '--n', '10', '--alpha', '50', '--out', str(tmp_path / "raw.csv")])
        assert code == EXIT_CONFIG


class TestExitCodes:

    def test_match_budget_exceeded(self, capsys):
        assert main(['match', '--n', '200', '--time-budget-secs', '1e-12']) == EXIT_BUDGET
        assert "budget exceeded" in capsys.readouterr().err

    def test_unknown_algorithm(self):
        with pytest.raises(SystemExit) as exc:
            main(['match', '--algo', 'kd-tree'])
        assert exc.value.code == EXIT_CONFIG

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == EXIT_CONFIG

    def test_infeasible_workload(self, capsys):
        assert main(['match', '--n', '10', '--alpha', '20']) == EXIT_CONFIG
        assert "exceeds" in capsys.readouterr().err

    def test_bad_extent_file(self, tmp_path, capsys):
        path = tmp_path / "bad.txt"
        path.write_text("S 0 0 1\nQ 1 2 3\n")
        assert main(['match', '--input', str(path)]) == EXIT_CONFIG
        assert "line 2" in capsys.readouterr().err

    def test_missing_input(self, tmp_path):
        assert main(['scaling', '--input', str(tmp_path / "none.csv"), '--out', str(tmp_path / "o.csv")]) \
            == EXIT_CONFIG

    def test_zero_threads(self):
        assert main(['match', '--algo', 'sbm-par', '--threads', '0', '--n', '100']) == EXIT_CONFIG


class TestDefaultBackend:
    """Without --backend every algorithm runs on its registry backend."""

    def test_parallel_sort_based_uses_processes(self, monkeypatch, capsys):
        seen = []
        original = algorithms.match_sbm_parallel

        def recording(S, U, workers, mode, dim, backend, set_impl, stats):
            seen.append(backend)
            return original(S, U, workers, mode, dim, 'serial', set_impl, stats)

        monkeypatch.setattr(algorithms, 'match_sbm_parallel', recording)
        monkeypatch.delattr(os, 'fork', raising=False)
        assert main(['match', '--algo', 'sbm-par', '--threads', '4', '--n', '400']) == EXIT_OK
        assert seen == ['process']
        assert "algorithm=sbm-par P=4" in capsys.readouterr().out

    def test_explicit_backend_wins(self, monkeypatch):
        seen = []

        def recording(S, U, workers, mode, dim, backend, *rest):
            seen.append(backend)
            return PairReport.from_count(0)

        monkeypatch.setattr(algorithms, 'match_sbm_parallel', recording)
        monkeypatch.delattr(os, 'fork', raising=False)
        assert main(['match', '--algo', 'sbm-par', '--backend', 'thread', '--n', '100']) == EXIT_OK
        assert seen == ['thread']

    @pytest.mark.parametrize("code, backend", [('sbm-par', 'process'), ('itm', 'process'), ('bf', 'thread')])
    def test_registry_defaults(self, code, backend):
        assert create_matcher(code).backend == backend
        assert create_matcher(code, backend=None).backend == backend


class TestMatchDeadline:

    @pytest.mark.skipif(not hasattr(os, 'fork'), reason="needs fork")
    def test_slow_match_is_killed(self, monkeypatch, capsys):
        monkeypatch.setattr(algorithms.Matcher_SBM, 'match_1d',
                            lambda self, *args: time.sleep(5) or PairReport.from_count(0))
        start = time.perf_counter()
        code = main(['match', '--algo', 'sbm', '--n', '100', '--time-budget-secs', '0.2'])
        assert time.perf_counter() - start < 3.0
        assert code == EXIT_BUDGET
        assert "budget exceeded" in capsys.readouterr().err

    def test_nonpositive_budget(self):
        assert main(['match', '--n', '100', '--time-budget-secs', '-1']) == EXIT_CONFIG
