"""Coverage and expected-length simulations over (distribution, n, rho, method) grids.

Randomness is keyed, never sequential: the data of chunk ``c`` of a cell come
from the stream ``(seed, hash(cell), "data", c)`` and the inner draws of a
Monte Carlo method from ``(seed, hash(cell), "inner", method, c)``. A table is
therefore the same whatever the number of worker processes or the order in
which cells are run.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import ALL_METHODS, DomainError, MethodId
from .distributions import (
    CovMatrix2,
    RngStream,
    mix64,
    sample_bvlognormal,
    sample_bvnormal,
    sample_bvt,
)
from .methods import batch_bounds, compute_interval
from .montecarlo import MCConfig
from .summary import SuffStats, suff_stats

log = logging.getLogger(__name__)

DISTS = ("normal", "t", "lognormal")
CSV_COLUMNS = ("dist", "n", "rho", "target", "method", "coverage", "mean_length", "failures", "reps")


@dataclass(frozen=True)
class SimConfig:
    """One simulation study. ``expensive_reps`` caps the replicates given to
    Exact and the two likelihood-ratio methods unless ``full_reps`` is set."""

    dist: str = "normal"
    mu: tuple[float, float] = (0.0, 0.0)
    sigma: tuple[float, float] = (1.0, 1.0)
    df: float = 5.0
    rho_grid: tuple[float, ...] = tuple(round(0.1 * i, 1) for i in range(10))
    n_grid: tuple[int, ...] = (5, 10, 15, 20)
    reps: int = 10_000
    level: float = 0.95
    methods: tuple[MethodId, ...] = ALL_METHODS
    inner_m: int = 10_000
    seed: int = 0
    expensive_reps: int = 2_000
    full_reps: bool = False
    failures_as_misses: bool = False
    chunk: int = 1_000
    threads: int = 1

    def __post_init__(self):
        if self.dist not in DISTS:
            raise DomainError(f"dist must be one of {DISTS}, got {self.dist!r}")
        if self.reps < 100:
            raise DomainError(f"need reps >= 100, got {self.reps}")
        if not all(-1.0 < r < 1.0 for r in self.rho_grid):
            raise DomainError("every rho must lie in (-1, 1)")
        if not all(int(n) == n and n >= 2 for n in self.n_grid):
            raise DomainError("every n must be an integer >= 2")
        if not 0.0 < self.level < 1.0:
            raise DomainError(f"level must lie in (0, 1), got {self.level}")
        if min(self.sigma) <= 0:
            raise DomainError("sigma entries must be positive")
        if self.dist == "t" and not self.df > 0:
            raise DomainError("t needs df > 0")
        if self.inner_m < 100:
            raise DomainError(f"need inner_m >= 100, got {self.inner_m}")
        if self.chunk < 1 or self.threads < 1 or self.expensive_reps < 1:
            raise DomainError("chunk, threads and expensive_reps must be positive")
        object.__setattr__(self, "methods", tuple(MethodId.parse(str(m)) for m in self.methods))

    @property
    def alpha(self) -> float:
        return 1.0 - self.level

    def reps_for(self, method: MethodId) -> int:
        if method.is_expensive and not self.full_reps:
            return min(self.reps, self.expensive_reps)
        return self.reps

    def cells(self):
        return [(self.dist, int(n), float(rho)) for n in self.n_grid for rho in self.rho_grid]


@dataclass(frozen=True)
class SimResult:
    dist: str
    n: int
    rho: float
    target: float
    method: MethodId
    coverage: float
    mean_length: float
    length_sd: float
    failures: int
    reps: int
    applicable: bool = True

    @property
    def key(self):
        return (self.dist, self.n, self.rho, self.method)


def lognormal_rho_star(rho: float, sigma1: float, sigma2: float) -> float:
    """Pearson correlation of (exp X1, exp X2) when (X1, X2) is normal with correlation ``rho``."""
    if sigma1 <= 0 or sigma2 <= 0:
        raise DomainError("sigmas must be positive")
    if not -1.0 < rho < 1.0:
        raise DomainError(f"|rho| must be < 1, got {rho}")
    return math.expm1(rho * sigma1 * sigma2) / math.sqrt(math.expm1(sigma1**2) * math.expm1(sigma2**2))


def target_for(cfg: SimConfig, rho: float) -> float:
    if cfg.dist == "lognormal":
        return lognormal_rho_star(rho, *cfg.sigma)
    return rho


def cell_stream(cfg: SimConfig, cell) -> RngStream:
    dist, n, rho = cell
    return RngStream(cfg.seed, mix64(dist, int(n), round(float(rho), 12)))


def sample_cell(cfg: SimConfig, n: int, rho: float, size: int, rng) -> np.ndarray:
    cov = CovMatrix2.from_params(cfg.sigma[0], cfg.sigma[1], rho)
    if cfg.dist == "normal":
        return sample_bvnormal(rng, cfg.mu, cov, n, size)
    if cfg.dist == "t":
        return sample_bvt(rng, cfg.mu, cov, cfg.df, n, size)
    return sample_bvlognormal(rng, cfg.mu, cov, n, size)


def _take(stats: SuffStats, k: int) -> SuffStats:
    return SuffStats(stats.n, *(getattr(stats, f)[:k] for f in
                                ("mean1", "mean2", "s1sq", "s2sq", "s12", "r", "b", "dplus", "dminus")))


def _one(stats: SuffStats, i: int) -> SuffStats:
    return SuffStats(stats.n, *(float(getattr(stats, f)[i]) for f in
                                ("mean1", "mean2", "s1sq", "s2sq", "s12", "r", "b", "dplus", "dminus")))


def _robust_bounds(method, stats, alpha, stream: RngStream, m):
    """Batch evaluation; if the batch raises, retry replicate by replicate."""
    try:
        b = batch_bounds(method, stats, alpha, stream.generator(), m)
        return b.lower, b.upper
    except (ValueError, ArithmeticError) as exc:
        log.debug("batch %s failed (%s); evaluating replicates one at a time", method, exc)
    k = len(stats.r)
    lo, hi = np.full(k, np.nan), np.full(k, np.nan)
    for i in range(k):
        try:
            ci = compute_interval(method, _one(stats, i), alpha, MCConfig(m, stream.substream(i)))
            lo[i], hi[i] = ci.lower, ci.upper
        except (ValueError, ArithmeticError):
            pass
    return lo, hi


def run_cell(cfg: SimConfig, cell) -> list[SimResult]:
    """Simulate one (dist, n, rho) cell for every configured method."""
    dist, n, rho = cell
    if dist != cfg.dist:
        raise DomainError(f"cell distribution {dist!r} does not match the config")
    target = target_for(cfg, rho)
    base = cell_stream(cfg, cell)
    methods = [m for m in cfg.methods if n >= m.min_n]
    need = max([cfg.reps_for(m) for m in methods], default=0)

    hits = {m: [] for m in methods}
    lengths = {m: [] for m in methods}
    for c, start in enumerate(range(0, need, cfg.chunk)):
        k = min(cfg.chunk, need - start)
        data = sample_cell(cfg, n, rho, k, base.substream("data", c).generator())
        stats = suff_stats(data)
        for m in methods:
            take = min(k, cfg.reps_for(m) - start)
            if take <= 0:
                continue
            st = stats if take == k else _take(stats, take)
            lo, hi = _robust_bounds(m, st, cfg.alpha, base.substream("inner", m.value, c), cfg.inner_m)
            hits[m].append(np.where(np.isnan(lo) | np.isnan(hi), np.nan, (lo <= target) & (target <= hi)))
            lengths[m].append(hi - lo)

    out = []
    for m in cfg.methods:
        if m not in hits:
            out.append(SimResult(dist, n, rho, target, m, math.nan, math.nan, math.nan, 0, 0, False))
            continue
        h = np.concatenate(hits[m])
        ln = np.concatenate(lengths[m])
        ok = ~np.isnan(h)
        failures = int(np.sum(~ok))
        if cfg.failures_as_misses:
            coverage = float(np.nansum(h) / h.size)
        else:
            coverage = float(np.mean(h[ok])) if ok.any() else math.nan
        mean_len = float(np.mean(ln[ok])) if ok.any() else math.nan
        sd_len = float(np.std(ln[ok], ddof=1)) if ok.sum() > 1 else math.nan
        out.append(SimResult(dist, n, rho, target, m, coverage, mean_len, sd_len, failures, h.size))
    return out


def _run_cell_args(args):
    return run_cell(*args)


def run_grid(cfg: SimConfig, cells: Iterable | None = None) -> list[SimResult]:
    """Every cell of the grid, in grid order. Uses ``cfg.threads`` worker processes."""
    cells = list(cells) if cells is not None else cfg.cells()
    if cfg.threads > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            parts = list(pool.map(_run_cell_args, [(cfg, c) for c in cells]))
    else:
        parts = []
        for c in cells:
            log.info("cell dist=%s n=%d rho=%g", *c)
            parts.append(run_cell(cfg, c))
    return [r for part in parts for r in part]


def _fmt(x: float) -> str:
    return "nan" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.6f}"


def to_csv(results: Sequence[SimResult], out=None, extra: bool = False) -> str:
    """Write results as CSV (LF line endings); returns the text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    cols = CSV_COLUMNS + (("length_sd", "applicable") if extra else ())
    w.writerow(cols)
    for r in results:
        row = [r.dist, r.n, f"{r.rho:g}", _fmt(r.target), r.method.value, _fmt(r.coverage),
               _fmt(r.mean_length), r.failures, r.reps]
        if extra:
            row += [_fmt(r.length_sd), int(r.applicable)]
        w.writerow(row)
    text = buf.getvalue()
    if out is not None:
        if isinstance(out, (str, os.PathLike)):
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        else:
            out.write(text)
    return text


def lookup(results: Sequence[SimResult], n: int, rho: float, method: MethodId) -> SimResult:
    for r in results:
        if r.n == n and abs(r.rho - rho) < 1e-12 and r.method == method:
            return r
    raise KeyError((n, rho, method))
