"""
DDM Configuration Dictionary
==============================
Central configuration for the matching library and the benchmark harness.

Each registry entry defines:
  - ALGORITHM_CONFIGS: which matchers exist and their metadata
  - WORKLOAD_DEFAULTS: routing space and generator defaults
  - BENCH_DEFAULTS: suite defaults (reps, warmup, alpha sweep)
  - SET_IMPLEMENTATIONS: SubSet/UpdSet representations for the SBM sweeps
  - WORKER_BACKENDS: how P logical workers are executed

Adding a new matcher requires ONLY adding a block here plus its function
in matchers/ and its class in algorithms.py. No changes to base classes.

Current algorithms:
  - bf:      Brute-Force
  - grid:    Grid-Based
  - itm:     Interval-Tree Matching
  - sbm:     Sort-Based Matching (sequential)
  - sbm-par: Sort-Based Matching (parallel, two-level scan)
"""

import logging
import os
from typing import Dict, List


# =============================================================================
# ALGORITHMS
# =============================================================================

# default_backend applies when no backend is given. Pure-Python phases (itm
# queries, sbm-par scans) hold the GIL and only scale on 'process'.
ALGORITHM_CONFIGS = {
    'bf': {
        'code': 'bf',
        'name': 'Brute-Force',
        'parallel': True,            # rows split across workers
        'output_sensitive': False,
        'complexity': 'O(nm)',
        'default_backend': 'thread',
        'default_budget_secs': 300.0,
    },
    'grid': {
        'code': 'grid',
        'name': 'Grid-Based',
        'parallel': False,
        'output_sensitive': False,
        'complexity': 'O(nm / G) for evenly spread extents',
        'default_backend': 'serial',
        'default_budget_secs': 300.0,
    },
    'itm': {
        'code': 'itm',
        'name': 'Interval-Tree Matching',
        'parallel': True,            # queries split across workers
        'output_sensitive': True,
        'complexity': 'O(n log n + min(nm, (K+1) log n))',
        'default_backend': 'process',
        'default_budget_secs': 300.0,
    },
    'sbm': {
        'code': 'sbm',
        'name': 'Sort-Based Matching',
        'parallel': False,
        'output_sensitive': False,   # in count mode
        'complexity': 'O(N log N + K)',
        'default_backend': 'serial',
        'default_budget_secs': 300.0,
    },
    'sbm-par': {
        'code': 'sbm-par',
        'name': 'Parallel Sort-Based Matching',
        'parallel': True,
        'output_sensitive': False,
        'complexity': 'O(N log N / P + N/P + P)',
        'default_backend': 'process',
        'default_budget_secs': 300.0,
    },
}


# =============================================================================
# WORKLOAD / BENCH DEFAULTS
# =============================================================================

WORKLOAD_DEFAULTS = {
    'N': 10_000,
    'alpha': 1.0,
    'L': 1e6,          # routing space length
    'seed': 42,
    'dims': 1,
}

BENCH_DEFAULTS = {
    'reps': 30,
    'warmup': 1,
    'mode': 'count',
    'alphas': [0.01, 1.0, 100.0],
    'grid_cells': 1024,
    'set_impl': 'sorted',
}

# Pinned in every workload sidecar so runs are reproducible across machines
RNG_IDENTITY = {
    'bit_generator': 'PCG64',
    'library': 'numpy',
    'stream_version': 1,
}


# =============================================================================
# SWEEP SETS / WORKER BACKENDS
# =============================================================================

SET_IMPLEMENTATIONS = {
    'sorted': 'Ordered tree set with O(log n) insert/delete and O(1) size',
    'bitvector': 'Dense boolean array over extent ids with a size counter',
}

WORKER_BACKENDS = {
    'thread': 'concurrent.futures.ThreadPoolExecutor',
    'process': 'concurrent.futures.ProcessPoolExecutor',
    'serial': 'P logical workers multiplexed on the calling thread',
}

CSV_COLUMNS = ['algorithm', 'N', 'alpha', 'P', 'rep', 'seed', 'mode', 'wct_seconds', 'K']
MEMORY_COLUMN = 'peak_rss_bytes'


# =============================================================================
# LOOKUPS
# =============================================================================

def get_algorithm_config(code: str) -> Dict:
    """Get configuration for a specific algorithm code."""
    config = ALGORITHM_CONFIGS.get(code.lower())
    if config is None:
        raise ValueError(f"Unknown algorithm: {code}. Available: {list(ALGORITHM_CONFIGS.keys())}")
    return config


def get_available_algorithms() -> List[Dict]:
    """Get list of available algorithms with basic info."""
    return [
        {
            'code': config['code'],
            'name': config['name'],
            'parallel': config['parallel'],
            'complexity': config['complexity'],
            'output_sensitive': config['output_sensitive'],
            'default_backend': config['default_backend'],
        }
        for config in ALGORITHM_CONFIGS.values()
    ]


def get_default_backend(code: str) -> str:
    """Worker backend used for `code` when the caller names none."""
    return get_algorithm_config(code)['default_backend']


def get_default_budget(code: str) -> float:
    return get_algorithm_config(code)['default_budget_secs']


def get_set_implementation(name: str) -> str:
    if name not in SET_IMPLEMENTATIONS:
        raise ValueError(f"Unknown set implementation: {name}. Available: {list(SET_IMPLEMENTATIONS.keys())}")
    return name


def get_worker_backend(name: str) -> str:
    if name not in WORKER_BACKENDS:
        raise ValueError(f"Unknown worker backend: {name}. Available: {list(WORKER_BACKENDS.keys())}")
    return name


def physical_core_count() -> int:
    """Best-effort physical core count (logical count halved when SMT is likely)."""
    logical = os.cpu_count() or 1
    try:
        with open('/proc/cpuinfo') as fh:
            text = fh.read()
    except OSError:
        return max(1, logical // 2) if logical > 1 else 1

    cores = set()
    socket = '0'
    for line in text.splitlines():
        if line.startswith('physical id'):
            socket = line.split(':')[1].strip()
        elif line.startswith('core id'):
            cores.add((socket, line.split(':')[1].strip()))
    return len(cores) if cores else logical


def default_thread_counts() -> List[int]:
    """Worker-count sweep {1, 2, 4, ...} never exceeding twice the physical cores."""
    limit = 2 * physical_core_count()
    counts = []
    p = 1
    while p <= limit:
        counts.append(p)
        p *= 2
    return counts


def configure_logging(level: str = None) -> None:
    """Configure root logging once; level from argument or DDM_LOG_LEVEL."""
    level_name = (level or os.environ.get('DDM_LOG_LEVEL', 'WARNING')).upper()
    logging.basicConfig(
        level=getattr(logging, level_name, logging.WARNING),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )


if __name__ == "__main__":
    print("=" * 70)
    print("DDM ALGORITHM REGISTRY")
    print("=" * 70)

    for info in get_available_algorithms():
        mode = "parallel" if info['parallel'] else "serial"
        print(f"\n  {info['code']}: {info['name']}")
        print(f"    Execution: {mode}")
        print(f"    Cost: {info['complexity']}")
        print(f"    Default backend: {info['default_backend']}")

    print("\n" + "-" * 70)
    print(f"Default thread sweep: {default_thread_counts()}")
