"""
Workload Generation and Extent Files
=====================================
Seeded synthetic workloads for the matchers:

  - N extents split into n = N/2 subscriptions and m = N/2 updates
  - every extent has length l = alpha * L / N on each dimension
  - lower bounds uniform on [0, L - l], so extents stay inside the space
  - numpy Generator(PCG64), subscriptions drawn before updates

Plus the analytic expectation (and standard deviation) of the match count
K, and the extent text files with their JSON metadata sidecar.

Usage:
    cfg = WorkloadConfig(N=10_000, alpha=1.0, seed=7)
    S, U = generate_workload(cfg)
    save_workload(cfg, S, U, "w.txt")        # writes w.txt and w.txt.meta.json
"""

import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, Tuple

import numpy as np

from ddm_config import RNG_IDENTITY, WORKLOAD_DEFAULTS
from ddm_core import (ConfigError, ExtentFormatError, ExtentSet, Kind,
                      format_extent_line, parse_extent_line)

logger = logging.getLogger(__name__)

META_SUFFIX = '.meta.json'


# =============================================================================
# CONFIG
# =============================================================================

@dataclass(frozen=True)
class WorkloadConfig:
    N: int = WORKLOAD_DEFAULTS['N']
    alpha: float = WORKLOAD_DEFAULTS['alpha']
    L: float = WORKLOAD_DEFAULTS['L']
    seed: int = WORKLOAD_DEFAULTS['seed']
    dims: int = WORKLOAD_DEFAULTS['dims']

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ConfigError(f"N must be a positive even number, got {self.N}")
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if not self.L > 0:
            raise ConfigError(f"L must be positive, got {self.L}")
        if self.dims < 1:
            raise ConfigError(f"dims must be >= 1, got {self.dims}")
        if self.l > self.L:
            raise ConfigError(
                f"Extent length alpha*L/N = {self.l:g} exceeds the routing space L = {self.L:g}")

    @property
    def n(self) -> int:
        return self.N // 2

    @property
    def m(self) -> int:
        return self.N // 2

    @property
    def l(self) -> float:
        return self.alpha * self.L / self.N

    def with_seed(self, seed: int) -> 'WorkloadConfig':
        return WorkloadConfig(self.N, self.alpha, self.L, seed, self.dims)

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict) -> 'WorkloadConfig':
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"Unknown workload fields: {sorted(unknown)}")
        return cls(**data)


# =============================================================================
# GENERATION
# =============================================================================

def generate_workload(cfg: WorkloadConfig) -> Tuple[ExtentSet, ExtentSet]:
    """Draw (S, U) for `cfg`; bit-identical for a fixed seed."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    l = cfg.l
    span = cfg.L - l

    s_low = rng.uniform(0.0, span, size=(cfg.n, cfg.dims))
    u_low = rng.uniform(0.0, span, size=(cfg.m, cfg.dims))
    S = ExtentSet(Kind.SUBSCRIPTION, s_low, s_low + l)
    U = ExtentSet(Kind.UPDATE, u_low, u_low + l)
    logger.debug("Generated workload N=%d alpha=%g l=%g seed=%d", cfg.N, cfg.alpha, l, cfg.seed)
    return S, U


def _overlap_moments(l: float, L: float) -> Tuple[float, float]:
    """
    (p, q) for two length-l segments with lower bounds uniform on [0, W], W = L - l.

    p = P(overlap); q = E[g(X)^2] where g(x) is the overlap probability
    given one lower bound at x.
    """
    W = L - l
    if l >= W:
        return 1.0, 1.0
    p = 1.0 - (1.0 - l / W) ** 2
    if 2 * l <= W:
        q = (14 * l ** 3 / 3 + 4 * l ** 2 * (W - 2 * l)) / W ** 3
    else:
        q = (2 * (W ** 3 - l ** 3) / (3 * W ** 2) + (2 * l - W)) / W
    return p, q


def expected_matches(cfg: WorkloadConfig) -> float:
    """Analytic E[K] = n * m * p, p multiplied across dimensions."""
    p, _ = _overlap_moments(cfg.l, cfg.L)
    return cfg.n * cfg.m * p ** cfg.dims


def expected_matches_std(cfg: WorkloadConfig) -> float:
    """
    Exact standard deviation of K.

    Pair indicators sharing a subscription (or an update) are correlated
    through that extent's position; pairs sharing nothing are independent.
    """
    p1, q1 = _overlap_moments(cfg.l, cfg.L)
    p, q = p1 ** cfg.dims, q1 ** cfg.dims
    n, m = cfg.n, cfg.m
    var = n * m * p * (1 - p) + (n * m * (m - 1) + m * n * (n - 1)) * (q - p * p)
    return float(np.sqrt(max(var, 0.0)))


# =============================================================================
# EXTENT FILES
# =============================================================================

HEADER = "# ddm-extents v1 dims={dims} subscriptions={n} updates={m}"


def save_extents(S: ExtentSet, U: ExtentSet, path) -> Path:
    """Write S then U in the extent text format, one extent per line."""
    if len(S) and len(U) and S.dims != U.dims:
        raise ConfigError(f"Dimensionality mismatch: {S.dims} vs {U.dims}")
    dims = S.dims if len(S) else U.dims
    path = Path(path)
    with path.open('w', encoding='utf-8') as fh:
        fh.write(HEADER.format(dims=dims, n=len(S), m=len(U)) + "\n")
        for extent_set in (S, U):
            for extent in extent_set:
                fh.write(format_extent_line(extent) + "\n")
    logger.info("Wrote %d subscriptions and %d updates to %s", len(S), len(U), path)
    return path


def _header_dims(line: str) -> int:
    for token in line.split():
        if token.startswith('dims='):
            try:
                return int(token[len('dims='):])
            except ValueError:
                break
    return 1


def load_extents(path) -> Tuple[ExtentSet, ExtentSet]:
    """Read an extent file; errors name the offending line."""
    by_kind = {Kind.SUBSCRIPTION: [], Kind.UPDATE: []}
    dims = None
    header_dims = 1

    with Path(path).open(encoding='utf-8') as fh:
        for line_number, line in enumerate(fh, 1):
            if line_number == 1 and line.startswith('# ddm-extents'):
                header_dims = _header_dims(line)
            extent = parse_extent_line(line, line_number)
            if extent is None:
                continue
            if dims is None:
                dims = extent.dims
            elif extent.dims != dims:
                raise ExtentFormatError(line_number, f"expected {dims} dimensions, got {extent.dims}")
            by_kind[extent.kind].append((line_number, extent))

    dims = dims or header_dims
    sets = []
    for kind, entries in by_kind.items():
        seen = {}
        for line_number, extent in entries:
            if extent.id in seen:
                raise ExtentFormatError(line_number, f"duplicate id {kind.value}{extent.id} "
                                                     f"(first on line {seen[extent.id]})")
            seen[extent.id] = line_number
        missing = set(range(len(entries))) - set(seen)
        if missing:
            raise ConfigError(f"{path}: {kind.name} ids are not dense, missing {min(missing)}")
        sets.append(ExtentSet.from_extents(kind, [e for _, e in entries], dims))
    return sets[0], sets[1]


def save_workload(cfg: WorkloadConfig, S: ExtentSet, U: ExtentSet, path) -> Path:
    """Write the extents plus `<path>.meta.json` with the config and RNG identity."""
    path = save_extents(S, U, path)
    meta = {
        'config': cfg.to_dict(),
        'rng': RNG_IDENTITY,
        'numpy_version': np.__version__,
        'n': len(S),
        'm': len(U),
        'l': cfg.l,
        'expected_K': expected_matches(cfg),
    }
    meta_path = path.with_name(path.name + META_SUFFIX)
    meta_path.write_text(json.dumps(meta, indent=2), encoding='utf-8')
    logger.info("Wrote workload metadata to %s", meta_path)
    return path


def load_metadata(path) -> Dict:
    """Read the sidecar of a saved workload; 'config' comes back as a WorkloadConfig."""
    path = Path(path)
    meta_path = path if path.name.endswith(META_SUFFIX) else path.with_name(path.name + META_SUFFIX)
    try:
        meta = json.loads(meta_path.read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise ConfigError(f"No workload metadata at {meta_path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Corrupt workload metadata {meta_path}: {exc}") from None
    meta['config'] = WorkloadConfig.from_dict(meta['config'])
    return meta
