"""
DDM Command Line
================
    python cli.py gen     --n 10000 --alpha 1 --seed 7 --out w.txt
    python cli.py match   --algo sbm-par --threads 4 --input w.txt
    python cli.py bench   --algo sbm --algo itm --n 100000 --alpha 0.01 --alpha 100 --out raw.csv
    python cli.py scaling --input raw.csv --out scaling.csv

Exit codes: 0 success, 1 configuration/argument error, 2 runtime error,
3 time budget exceeded.
"""

import argparse
import logging
import sys
from typing import List, Optional

import pandas as pd

from algorithms import create_matcher
from bench import (SuiteConfig, check_budget, compute_scaling, measure_run_memory, read_records_csv,
                   run_suite_frame, run_with_deadline, write_records_csv, write_table_csv)
from ddm_config import (ALGORITHM_CONFIGS, BENCH_DEFAULTS, SET_IMPLEMENTATIONS, WORKER_BACKENDS,
                        WORKLOAD_DEFAULTS, configure_logging, get_default_budget)
from ddm_core import BudgetExceededError, ConfigError, ContractError, Mode
from workload import WorkloadConfig, expected_matches, generate_workload, load_extents, save_workload

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_BUDGET = 3


class DDMArgumentParser(argparse.ArgumentParser):
    """Argument errors exit with the configuration-error code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# =============================================================================
# ARGUMENTS
# =============================================================================

def _add_workload_args(parser, repeatable: bool):
    action = 'append' if repeatable else 'store'
    parser.add_argument('--n', type=int, action=action,
                        help=f"total extent count N (default {WORKLOAD_DEFAULTS['N']})")
    parser.add_argument('--alpha', type=float, action=action,
                        help=f"overlapping degree (default {WORKLOAD_DEFAULTS['alpha']})")
    parser.add_argument('--seed', type=int, default=WORKLOAD_DEFAULTS['seed'])
    parser.add_argument('--dims', type=int, default=WORKLOAD_DEFAULTS['dims'])
    parser.add_argument('--space-length', type=float, default=WORKLOAD_DEFAULTS['L'],
                        help="routing-space length L")


def _add_matcher_args(parser, default_mode: str):
    parser.add_argument('--mode', choices=[m.value for m in Mode], default=default_mode)
    parser.add_argument('--grid-cells', type=int, default=BENCH_DEFAULTS['grid_cells'])
    parser.add_argument('--backend', choices=list(WORKER_BACKENDS),
                        help="worker backend (default: per algorithm, see ddm_config)")
    parser.add_argument('--set-impl', choices=list(SET_IMPLEMENTATIONS), default=BENCH_DEFAULTS['set_impl'])
    parser.add_argument('--time-budget-secs', type=float,
                        help="kill a run after this many seconds (default: per algorithm)")
    parser.add_argument('--memory', action='store_true', help="record peak RSS per run")


def build_parser() -> argparse.ArgumentParser:
    parser = DDMArgumentParser(prog='ddm', description="DDM extent matching and benchmarks")
    parser.add_argument('--log-level', default=None, help="DEBUG, INFO, WARNING (default: $DDM_LOG_LEVEL)")
    sub = parser.add_subparsers(dest='command', required=True)

    gen = sub.add_parser('gen', help="generate a workload file")
    _add_workload_args(gen, repeatable=False)
    gen.add_argument('--out', required=True, help="extent file (sidecar written next to it)")

    match = sub.add_parser('match', help="run one algorithm, print K and WCT")
    _add_workload_args(match, repeatable=False)
    match.add_argument('--algo', choices=list(ALGORITHM_CONFIGS), default='sbm')
    match.add_argument('--threads', type=int, default=1)
    match.add_argument('--input', help="extent file to match instead of a generated workload")
    match.add_argument('--out', help="list mode: write the pairs as CSV")
    _add_matcher_args(match, default_mode='count')

    bench = sub.add_parser('bench', help="run a benchmark suite to CSV")
    _add_workload_args(bench, repeatable=True)
    bench.add_argument('--algo', choices=list(ALGORITHM_CONFIGS), action='append')
    bench.add_argument('--threads', type=int, action='append')
    bench.add_argument('--reps', type=int, default=BENCH_DEFAULTS['reps'])
    bench.add_argument('--warmup', type=int, default=BENCH_DEFAULTS['warmup'])
    bench.add_argument('--fresh-seeds', action='store_true',
                       help="draw a new workload (seed + rep) for every repetition")
    bench.add_argument('--out', required=True, help="raw records CSV")
    bench.add_argument('--agg-out', help="aggregated (mean/std) CSV")
    _add_matcher_args(bench, default_mode=BENCH_DEFAULTS['mode'])

    scaling = sub.add_parser('scaling', help="speedup and efficiencies from a records CSV")
    scaling.add_argument('--input', required=True)
    scaling.add_argument('--out', required=True)

    return parser


# =============================================================================
# COMMANDS
# =============================================================================

def _workload_config(args) -> WorkloadConfig:
    return WorkloadConfig(
        N=args.n if args.n is not None else WORKLOAD_DEFAULTS['N'],
        alpha=args.alpha if args.alpha is not None else WORKLOAD_DEFAULTS['alpha'],
        L=args.space_length,
        seed=args.seed,
        dims=args.dims,
    )


def cmd_gen(args) -> int:
    cfg = _workload_config(args)
    S, U = generate_workload(cfg)
    path = save_workload(cfg, S, U, args.out)
    print(f"wrote {path}: n={cfg.n} m={cfg.m} l={cfg.l:g} expected_K={expected_matches(cfg):.6g}")
    return EXIT_OK


def cmd_match(args) -> int:
    if args.input:
        S, U = load_extents(args.input)
        lows = [a.min() for a in (S.lows[:, 0], U.lows[:, 0]) if a.size]
        highs = [a.max() for a in (S.highs[:, 0], U.highs[:, 0]) if a.size]
        bounds = (min(lows), max(highs)) if lows and max(highs) > min(lows) else None
    else:
        S, U = generate_workload(_workload_config(args))
        bounds = (0.0, args.space_length)

    matcher = create_matcher(args.algo, backend=args.backend, set_impl=args.set_impl,
                             cell_count=args.grid_cells, bounds=bounds)
    if args.time_budget_secs is not None and not args.time_budget_secs > 0:
        raise ConfigError(f"Time budget must be positive, got {args.time_budget_secs}")
    budget = args.time_budget_secs or get_default_budget(args.algo)

    def match_runs(clock):
        clock.started()
        report = matcher.run(S, U, args.mode, args.threads)
        check_budget(matcher.last_wct_seconds, budget, args.algo)
        clock.finished()

        summary = matcher.get_summary()
        line = f"algorithm={summary['algorithm']} P={summary['P']} K={summary['K']} wct_seconds={summary['wct_seconds']:.6f}"
        if args.memory:
            clock.started()
            peak = measure_run_memory(lambda: matcher.run(S, U, args.mode, args.threads))
            clock.finished()
            line += f" peak_rss_bytes={peak}" if peak is not None else " peak_rss_bytes=unavailable"

        if args.out and report.pairs is not None:
            pairs = pd.DataFrame(list(report.pairs), columns=['subscription_id', 'update_id'])
            write_table_csv(pairs.sort_values(['subscription_id', 'update_id']), args.out)
        yield line

    for line in run_with_deadline(match_runs, budget):
        print(line)
    return EXIT_OK


def cmd_bench(args) -> int:
    config = SuiteConfig(
        algorithms=args.algo or ['sbm'],
        Ns=args.n or [WORKLOAD_DEFAULTS['N']],
        alphas=args.alpha or list(BENCH_DEFAULTS['alphas']),
        threads=args.threads or [1],
        reps=args.reps,
        seed=args.seed,
        mode=args.mode,
        grid_cells=args.grid_cells,
        dims=args.dims,
        L=args.space_length,
        time_budget_secs=args.time_budget_secs,
        fresh_seeds=args.fresh_seeds,
        backend=args.backend,
        set_impl=args.set_impl,
        warmup=args.warmup,
        memory=args.memory,
    )
    raw, agg, skipped = run_suite_frame(config)
    write_records_csv(raw, args.out)
    if args.agg_out:
        write_table_csv(agg, args.agg_out)
    if not agg.empty:
        print(agg.to_string(index=False))

    if raw.empty and not skipped.empty:
        if skipped['reason'].str.startswith('time budget').all():
            logger.error("Every combination exceeded the time budget")
            return EXIT_BUDGET
        logger.error("No feasible combination in the suite")
        return EXIT_CONFIG
    return EXIT_OK


def cmd_scaling(args) -> int:
    records = read_records_csv(args.input)
    summary, missing = compute_scaling(records)
    write_table_csv(summary, args.out)
    if not summary.empty:
        print(summary.to_string(index=False))
    if missing:
        print(f"{len(missing)} cell(s) lack a baseline; see log", file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    'gen': cmd_gen,
    'match': cmd_match,
    'bench': cmd_bench,
    'scaling': cmd_scaling,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return COMMANDS[args.command](args)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, ContractError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        logger.exception("Unexpected failure")
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
