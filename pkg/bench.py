"""
Benchmark Harness
=================
Runs matchers over generated workloads and turns the timings into tables:

1. run_suite: (N, alpha) x algorithm x P combinations, one warmup plus
   `reps` timed runs each; the timer covers the matching call only.
   Every combination runs in a forked child under run_with_deadline, so
   a run that outlives the time budget is killed, not waited for
2. aggregate_records / compute_scaling: mean/std WCT per combination,
   speedup T(N,1)/T(N,P), strong efficiency S/P, weak efficiency
   T(N,1)/T(P*N,P)
3. measure_peak_memory / measure_run_memory: peak RSS via `resource`
4. CSV I/O with a fixed column order

Usage:
    config = SuiteConfig(algorithms=['sbm', 'sbm-par'], Ns=[100_000], threads=[1, 2, 4])
    raw, agg, skipped = run_suite_frame(config)
    summary, missing = compute_scaling(raw)
"""

import logging
import math
import multiprocessing
import os
import signal
import sys
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple

import pandas as pd

from algorithms import create_matcher
from ddm_config import (ALGORITHM_CONFIGS, BENCH_DEFAULTS, CSV_COLUMNS, MEMORY_COLUMN,
                        WORKLOAD_DEFAULTS, get_default_budget, get_set_implementation, get_worker_backend)
from ddm_core import BudgetExceededError, ConfigError, DDMError, Mode
from workload import WorkloadConfig, generate_workload

logger = logging.getLogger(__name__)

GROUP_COLUMNS = ['algorithm', 'N', 'alpha', 'P', 'mode']


# =============================================================================
# TYPES
# =============================================================================

@dataclass
class BenchRecord:
    algorithm: str
    N: int
    alpha: float
    P: int
    rep: int
    seed: int
    mode: str
    wct_seconds: float
    K: int
    peak_rss_bytes: Optional[int] = None

    def to_dict(self) -> Dict:
        row = asdict(self)
        if row[MEMORY_COLUMN] is None:
            del row[MEMORY_COLUMN]
        return row


@dataclass
class SuiteConfig:
    algorithms: List[str] = field(default_factory=lambda: ['sbm'])
    Ns: List[int] = field(default_factory=lambda: [WORKLOAD_DEFAULTS['N']])
    alphas: List[float] = field(default_factory=lambda: list(BENCH_DEFAULTS['alphas']))
    threads: List[int] = field(default_factory=lambda: [1])
    reps: int = BENCH_DEFAULTS['reps']
    seed: int = WORKLOAD_DEFAULTS['seed']
    mode: str = BENCH_DEFAULTS['mode']
    grid_cells: int = BENCH_DEFAULTS['grid_cells']
    dims: int = WORKLOAD_DEFAULTS['dims']
    L: float = WORKLOAD_DEFAULTS['L']
    # None: the per-algorithm defaults from ALGORITHM_CONFIGS
    time_budget_secs: Optional[float] = None
    fresh_seeds: bool = False
    backend: Optional[str] = None
    set_impl: str = BENCH_DEFAULTS['set_impl']
    warmup: int = BENCH_DEFAULTS['warmup']
    memory: bool = False

    def __post_init__(self):
        unknown = [a for a in self.algorithms if a not in ALGORITHM_CONFIGS]
        if unknown or not self.algorithms:
            raise ConfigError(f"Unknown algorithm(s): {unknown}. Available: {list(ALGORITHM_CONFIGS.keys())}")
        if not self.Ns or not self.alphas or not self.threads:
            raise ConfigError("N, alpha and thread lists must not be empty")
        if any(p < 1 for p in self.threads):
            raise ConfigError(f"Thread counts must be >= 1, got {self.threads}")
        if self.reps < 1 or self.warmup < 0:
            raise ConfigError(f"Need reps >= 1 and warmup >= 0, got {self.reps}, {self.warmup}")
        if self.time_budget_secs is not None and not self.time_budget_secs > 0:
            raise ConfigError(f"Time budget must be positive, got {self.time_budget_secs}")
        self.mode = Mode.parse(self.mode).value
        try:
            if self.backend is not None:
                get_worker_backend(self.backend)
            get_set_implementation(self.set_impl)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


@dataclass
class SuiteResult:
    records: List[BenchRecord] = field(default_factory=list)
    skipped: List[Dict] = field(default_factory=list)


# =============================================================================
# PEAK MEMORY
# =============================================================================

def measure_peak_memory() -> Optional[int]:
    """Peak resident set size of this process in bytes, or None where unsupported."""
    try:
        import resource
    except ImportError:
        return None
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # KiB on Linux, bytes on macOS
    return int(peak) if sys.platform == 'darwin' else int(peak) * 1024


def reset_peak_memory() -> bool:
    """Lower this process's RSS high-water mark to its current RSS (Linux only)."""
    try:
        with open('/proc/self/clear_refs', 'w') as fh:
            fh.write('5')
    except OSError:
        return False
    return True


def measure_run_memory(fn: Callable[[], object]) -> Optional[int]:
    """
    Run `fn` in a forked child and return the child's peak RSS in bytes.

    The child inherits the harness's pages, so its high-water mark is reset
    to the current RSS first where the kernel allows it; the result is the
    harness footprint plus what `fn` allocates. None when fork or resource
    is missing.
    """
    if not hasattr(os, 'fork') or measure_peak_memory() is None:
        return None

    read_fd, write_fd = os.pipe()
    pid = os.fork()
    if pid == 0:
        os.close(read_fd)
        status = 0
        try:
            reset_peak_memory()
            fn()
            payload = str(measure_peak_memory())
        except BaseException as exc:
            payload = f"error:{type(exc).__name__}: {exc}"
            status = 1
        with os.fdopen(write_fd, 'w') as fh:
            fh.write(payload)
        os._exit(status)

    os.close(write_fd)
    with os.fdopen(read_fd) as fh:
        payload = fh.read()
    os.waitpid(pid, 0)
    if not payload:
        raise DDMError("Memory measurement child exited without reporting")
    if payload.startswith('error:'):
        raise DDMError(f"Memory measurement failed: {payload[len('error:'):]}")
    return int(payload)


# =============================================================================
# DEADLINE
# =============================================================================

class RunClock:
    """Marks where a budgeted run starts and ends; no-op when runs are inline."""

    def __init__(self, send: Callable[[Tuple], None] = lambda message: None):
        self._send = send

    def started(self) -> None:
        self._send(('start', None))

    def finished(self) -> None:
        self._send(('stop', None))


def check_budget(wct_seconds: float, budget: float, what: str) -> None:
    if wct_seconds > budget:
        raise BudgetExceededError(f"{what} took {wct_seconds:.1f}s > budget {budget:g}s")


def run_with_deadline(runs: Callable[[RunClock], Iterable], budget: float) -> Iterator:
    """
    Drive the generator `runs(clock)` in a forked child and yield its items.

    Between clock.started() and clock.finished() every message must arrive
    within `budget` seconds; otherwise the child's process group is killed
    and BudgetExceededError is raised. Exceptions raised in the child are
    re-raised here with their original type. Without fork the generator
    runs inline and only the callers' after-the-fact checks apply.
    """
    if not hasattr(os, 'fork'):
        yield from runs(RunClock())
        return

    reader, writer = multiprocessing.Pipe(duplex=False)
    pid = os.fork()
    if pid == 0:
        reader.close()
        status = 0
        try:
            os.setpgid(0, 0)
            for item in runs(RunClock(writer.send)):
                writer.send(('item', item))
            writer.send(('end', None))
        except BaseException as exc:
            status = 1
            try:
                writer.send(('error', exc))
            except Exception:
                writer.send(('error', DDMError(f"{type(exc).__name__}: {exc}")))
        finally:
            writer.close()
            os._exit(status)

    writer.close()
    try:
        os.setpgid(pid, pid)
    except OSError:
        pass
    try:
        running = False
        while True:
            if running and not reader.poll(budget):
                raise BudgetExceededError(f"run still going after the {budget:g}s budget")
            try:
                tag, value = reader.recv()
            except EOFError:
                raise DDMError("Run child exited without reporting") from None
            if tag == 'start':
                running = True
            elif tag == 'stop':
                running = False
            elif tag == 'item':
                yield value
            elif tag == 'end':
                return
            else:
                raise value
    finally:
        reader.close()
        _stop_child(pid)


def _stop_child(pid: int) -> None:
    try:
        os.killpg(pid, signal.SIGKILL)
    except OSError:
        # no process group of its own
        try:
            os.kill(pid, signal.SIGKILL)
        except OSError:
            pass
    os.waitpid(pid, 0)


# =============================================================================
# SUITE
# =============================================================================

def _skip(result: SuiteResult, reason: str, **where) -> None:
    entry = dict(where, reason=reason)
    result.skipped.append(entry)
    logger.warning("Skipping %s: %s", ', '.join(f"{k}={v}" for k, v in where.items()), reason)


def _timed_runs(matcher, workload_for, config: SuiteConfig, P: int, budget: float,
                clock: RunClock) -> Iterator[Tuple[int, int, int, float, Optional[int]]]:
    """Warmups, the optional memory run, then (rep, seed, K, wct, peak) per timed rep."""
    mode = Mode.parse(config.mode)

    S, U = workload_for(0)[1:]
    for _ in range(config.warmup):
        clock.started()
        matcher.run(S, U, mode, P)
        check_budget(matcher.last_wct_seconds, budget, "warmup")
        clock.finished()

    peak = None
    if config.memory:
        clock.started()
        peak = measure_run_memory(lambda: matcher.run(S, U, mode, P))
        clock.finished()

    for rep in range(config.reps):
        seed, S, U = workload_for(rep)
        clock.started()
        report = matcher.run(S, U, mode, P)
        check_budget(matcher.last_wct_seconds, budget, f"rep {rep}")
        clock.finished()
        yield rep, seed, report.count, matcher.last_wct_seconds, peak


def _time_combination(matcher, workload_for, config: SuiteConfig, N: int, alpha: float,
                      P: int) -> List[BenchRecord]:
    budget = config.time_budget_secs or get_default_budget(matcher.code)
    mode = Mode.parse(config.mode).value
    # cached before the fork so every child inherits it
    workload_for(0)
    runs = run_with_deadline(lambda clock: _timed_runs(matcher, workload_for, config, P, budget, clock),
                             budget)
    return [BenchRecord(matcher.code, N, alpha, P, rep, seed, mode, wct, K, peak)
            for rep, seed, K, wct, peak in runs]


def run_suite(config: SuiteConfig, result: Optional[SuiteResult] = None) -> Iterator[BenchRecord]:
    """
    Yield BenchRecords for every feasible combination in `config`.

    Skipped combinations (infeasible workload, time budget) are logged and
    appended to `result.skipped`. Raises DDMError if two algorithms report
    different K on the same workload.
    """
    result = result if result is not None else SuiteResult()

    for N in config.Ns:
        for alpha in config.alphas:
            try:
                base = WorkloadConfig(N, alpha, config.L, config.seed, config.dims)
            except ConfigError as exc:
                _skip(result, str(exc), N=N, alpha=alpha)
                continue

            cache: Dict[int, Tuple] = {}

            def workload_for(rep: int, base=base, cache=cache):
                seed = base.seed + rep if config.fresh_seeds else base.seed
                if seed not in cache:
                    cache[seed] = generate_workload(base.with_seed(seed))
                return (seed,) + cache[seed]

            reference_K: Dict[int, Tuple[str, int]] = {}
            for code in config.algorithms:
                matcher = create_matcher(code, backend=config.backend, set_impl=config.set_impl,
                                         cell_count=config.grid_cells, bounds=(0.0, config.L))
                threads = sorted(set(config.threads)) if matcher.parallel else [1]
                for P in threads:
                    logger.info("Running %s N=%d alpha=%g P=%d reps=%d", code, N, alpha, P, config.reps)
                    try:
                        records = _time_combination(matcher, workload_for, config, N, alpha, P)
                    except BudgetExceededError as exc:
                        _skip(result, f"time budget exceeded ({exc})", algorithm=code, N=N, alpha=alpha, P=P)
                        continue

                    for record in records:
                        first = reference_K.setdefault(record.seed, (code, record.K))
                        if first[1] != record.K:
                            raise DDMError(
                                f"K mismatch on N={N} alpha={alpha} seed={record.seed}: "
                                f"{first[0]} reported {first[1]}, {code} (P={P}) reported {record.K}")
                    result.records.extend(records)
                    yield from records


def aggregate_records(raw: pd.DataFrame) -> pd.DataFrame:
    """Mean and standard deviation of wct_seconds per (algorithm, N, alpha, P, mode)."""
    if raw.empty:
        return pd.DataFrame(columns=GROUP_COLUMNS + ['reps', 'wct_mean', 'wct_std', 'K'])
    grouped = raw.groupby(GROUP_COLUMNS, sort=True)
    agg = grouped.agg(
        reps=('wct_seconds', 'size'),
        wct_mean=('wct_seconds', 'mean'),
        wct_std=('wct_seconds', 'std'),
        K=('K', 'first'),
    ).reset_index()
    if MEMORY_COLUMN in raw.columns:
        agg[MEMORY_COLUMN] = grouped[MEMORY_COLUMN].max().values
    return agg


def run_suite_frame(config: SuiteConfig) -> Tuple[pd.DataFrame, pd.DataFrame, pd.DataFrame]:
    """Run the suite to completion; returns (raw records, aggregates, skipped combinations)."""
    result = SuiteResult()
    rows = [record.to_dict() for record in run_suite(config, result)]
    raw = pd.DataFrame(rows, columns=_columns_for(rows))
    return raw, aggregate_records(raw), pd.DataFrame(result.skipped)


def _columns_for(rows: List[Dict]) -> List[str]:
    if any(MEMORY_COLUMN in row for row in rows):
        return CSV_COLUMNS + [MEMORY_COLUMN]
    return list(CSV_COLUMNS)


# =============================================================================
# SCALING
# =============================================================================

def compute_scaling(records: pd.DataFrame) -> Tuple[pd.DataFrame, List[Dict]]:
    """
    Speedup and efficiencies from mean WCTs.

    Returns:
        (summary rows: algorithm, N, alpha, P, speedup, strong_efficiency,
         weak_efficiency; list of missing baselines)
        weak_efficiency is NaN when the (P*N, P) cell was not measured.
    """
    columns = ['algorithm', 'N', 'alpha', 'P', 'speedup', 'strong_efficiency', 'weak_efficiency']
    missing: List[Dict] = []
    if records.empty:
        return pd.DataFrame(columns=columns), missing

    if 'wct_mean' in records.columns:
        means = records
    else:
        means = records.groupby(['algorithm', 'N', 'alpha', 'P'], sort=True)['wct_seconds'] \
            .mean().rename('wct_mean').reset_index()
    T = {(row.algorithm, int(row.N), float(row.alpha), int(row.P)): float(row.wct_mean)
         for row in means.itertuples(index=False)}

    rows = []
    for (algorithm, N, alpha, P), t_p in sorted(T.items()):
        t_1 = T.get((algorithm, N, alpha, 1))
        if t_1 is None:
            missing.append({'algorithm': algorithm, 'N': N, 'alpha': alpha, 'P': P,
                            'needs': f"T(N={N}, P=1)"})
            continue
        speedup = t_1 / t_p
        t_weak = T.get((algorithm, P * N, alpha, P))
        if t_weak is None:
            weak = math.nan
            if P > 1:
                missing.append({'algorithm': algorithm, 'N': N, 'alpha': alpha, 'P': P,
                                'needs': f"T(N={P * N}, P={P})"})
        else:
            weak = t_1 / t_weak
        rows.append({'algorithm': algorithm, 'N': N, 'alpha': alpha, 'P': P,
                     'speedup': speedup, 'strong_efficiency': speedup / P,
                     'weak_efficiency': weak})

    for entry in missing:
        logger.warning("Scaling cell %s N=%d alpha=%g P=%d needs %s",
                       entry['algorithm'], entry['N'], entry['alpha'], entry['P'], entry['needs'])
    return pd.DataFrame(rows, columns=columns), missing


# =============================================================================
# CSV
# =============================================================================

def write_records_csv(df: pd.DataFrame, path) -> None:
    """
    Write raw records with the fixed column order (memory column only when
    measured). Floats are written with repr, so read_records_csv gets the
    exact values back.
    """
    columns = list(CSV_COLUMNS)
    if MEMORY_COLUMN in df.columns and df[MEMORY_COLUMN].notna().any():
        columns.append(MEMORY_COLUMN)
    df.reindex(columns=columns).to_csv(path, index=False)
    logger.info("Wrote %d records to %s", len(df), path)


def read_records_csv(path) -> pd.DataFrame:
    df = pd.read_csv(path, float_precision='round_trip')
    absent = [c for c in CSV_COLUMNS if c not in df.columns]
    if absent:
        raise ConfigError(f"{path}: missing columns {absent}")
    return df


def write_table_csv(df: pd.DataFrame, path) -> None:
    df.to_csv(path, index=False)
    logger.info("Wrote %d rows to %s", len(df), path)
