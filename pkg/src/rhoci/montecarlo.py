"""Simulation-based intervals: Krishnamoorthy-Xia GCI, the Wishart GCI and the PB interval.

The ``*_bounds`` functions take arrays of statistics (one entry per replicate)
and a numpy Generator; every replicate gets its own fresh block of inner draws.
Work is done in blocks of replicates so that memory stays near
``BLOCK_DRAWS`` floats per array whatever ``m`` is.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analytic import Bounds, make_bounds
from .core import (
    ConfidenceInterval,
    DegenerateDataError,
    DomainError,
    MethodFailure,
    MethodId,
    check_alpha,
    check_n,
)
from .distributions import RngStream, as_generator, bartlett_draws
from .summary import NEAR_ONE, SuffStats

BLOCK_DRAWS = 2_000_000
QUANTILE_METHOD = "weibull"  # ranks floor(q(m+1)) and ceil(q(m+1)), linear in between


@dataclass(frozen=True)
class MCConfig:
    m: int = 10_000
    rng: RngStream = field(default_factory=lambda: RngStream(0))

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 100:
            raise DomainError(f"need m >= 100 inner draws, got {self.m}")


def empirical_quantile(draws, q, axis=-1):
    return np.quantile(draws, q, axis=axis, method=QUANTILE_METHOD)


def _rtilde(r):
    r = np.asarray(r, dtype=float)
    return r / np.sqrt(1.0 - r * r)


def _blocks(k: int, m: int):
    step = max(1, BLOCK_DRAWS // m)
    for start in range(0, k, step):
        yield slice(start, min(k, start + step))


def _check_inputs(r, n):
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    r = np.atleast_1d(np.asarray(r, dtype=float))
    # |r| = 1 has no finite rtilde; those replicates fail
    bad = ~(np.abs(r) < NEAR_ONE)
    return r, bad


# --------------------------------------------------------------------------
# parametric bootstrap


def pb_sample_r(rtilde, n: int, rng, size=None):
    """Draws of ``(rtilde V + N) / sqrt((rtilde V + N)^2 + W^2)``.

    ``V^2 ~ chi2(n-1)``, ``W^2 ~ chi2(n-2)`` and ``N ~ N(0, 1)``, all independent.
    """
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    v, w, nn = bartlett_draws(as_generator(rng), n - 1, size)
    x = rtilde * v + nn
    return x / np.hypot(x, w)


def _pb_z(rtilde, v, w, nn):
    # atanh(x / sqrt(x^2 + w^2)) = asinh(x / w), finite even when R^B rounds to +-1
    return np.arcsinh((rtilde * v + nn) / w)


def pb_bounds(r, n: int, alpha: float, m: int, rng) -> Bounds:
    """PB interval ``tanh(z -+ sqrt(q))`` with ``q`` the (1 - alpha) quantile of Q^B."""
    r, bad = _check_inputs(r, n)
    gen = as_generator(rng)
    z = np.arctanh(np.where(bad, 0.0, r))
    rt = _rtilde(np.where(bad, 0.0, r))
    q = np.empty(r.shape)
    for sl in _blocks(r.size, m):
        v, w, nn = bartlett_draws(gen, n - 1, (sl.stop - sl.start, m))
        qb = (_pb_z(rt[sl, None], v, w, nn) - z[sl, None]) ** 2
        q[sl] = empirical_quantile(qb, 1.0 - alpha)
    half = np.sqrt(q)
    lo = np.where(bad, np.nan, np.tanh(z - half))
    hi = np.where(bad, np.nan, np.tanh(z + half))
    return make_bounds(lo, hi)


# --------------------------------------------------------------------------
# Krishnamoorthy-Xia generalized pivot


def kx_pivot_draw(rtilde, n: int, rng, size=None):
    """Draws of ``(rtilde V22 - V21) / sqrt((rtilde V22 - V21)^2 + V11^2)``.

    ``V11^2 ~ chi2(n-1)``, ``V22^2 ~ chi2(n-2)``, ``V21 ~ N(0, 1)``.
    """
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    gen = as_generator(rng)
    v11, v22, v21 = bartlett_draws(gen, n - 1, size)
    x = rtilde * v22 - v21
    return x / np.hypot(x, v11)


def _percentile_bounds(draw_block, r, bad, alpha, m, gen):
    lo = np.empty(r.shape)
    hi = np.empty(r.shape)
    for sl in _blocks(r.size, m):
        g = draw_block(sl, gen)
        lo[sl], hi[sl] = empirical_quantile(g, [alpha / 2.0, 1.0 - alpha / 2.0])
    return make_bounds(np.where(bad, np.nan, lo), np.where(bad, np.nan, hi))


def kx_bounds(r, n: int, alpha: float, m: int, rng) -> Bounds:
    r, bad = _check_inputs(r, n)
    rt = _rtilde(np.where(bad, 0.0, r))

    def block(sl, gen):
        v11, v22, v21 = bartlett_draws(gen, n - 1, (sl.stop - sl.start, m))
        # bartlett_draws gives v^2 ~ chi2(n-1), w^2 ~ chi2(n-2): v plays V11, w plays V22
        x = rt[sl, None] * v22 - v21
        return x / np.hypot(x, v11)

    return _percentile_bounds(block, r, bad, alpha, m, as_generator(rng))


# --------------------------------------------------------------------------
# Wishart generalized pivot


def new_gci_draws(a11, a22, a12, n: int, rng, m: int):
    """Draws of ``-V12 / sqrt(V11 V22)`` with ``V ~ W(n-1, a^-1)``; ``a`` may be arrays.

    Returns an array of shape ``a11.shape + (m,)``.
    """
    a11, a22, a12 = np.broadcast_arrays(*(np.asarray(x, dtype=float) for x in (a11, a22, a12)))
    det = a11 * a22 - a12 * a12
    if np.any(~(det > 0)) or np.any(~(a11 > 0)):
        raise DegenerateDataError("scatter matrix is singular")
    # Cholesky factor of a^-1 = [[a22, -a12], [-a12, a11]] / det
    l11 = np.sqrt(a22 / det)
    l21 = -a12 / det / l11
    l22 = np.sqrt(1.0 / a22)
    v, w, nn = bartlett_draws(as_generator(rng), n - 1, a11.shape + (m,))
    m11 = l11[..., None] * v
    m21 = l21[..., None] * v + l22[..., None] * nn
    m22 = l22[..., None] * w
    v11 = m11 * m11
    v12 = m11 * m21
    v22 = m21 * m21 + m22 * m22
    return -v12 / np.sqrt(v11 * v22)


def new_gci_bounds(a11, a22, a12, n: int, alpha: float, m: int, rng) -> Bounds:
    a11, a22, a12 = (np.atleast_1d(np.asarray(x, dtype=float)) for x in (a11, a22, a12))
    if n < 3:
        raise DomainError(f"need n >= 3, got {n}")
    r = a12 / np.sqrt(a11 * a22)
    bad = ~(np.abs(r) < NEAR_ONE)
    # park singular replicates on the identity; their endpoints are discarded
    a11 = np.where(bad, 1.0, a11)
    a22 = np.where(bad, 1.0, a22)
    a12 = np.where(bad, 0.0, a12)

    def block(sl, gen):
        return new_gci_draws(a11[sl], a22[sl], a12[sl], n, gen, m)

    return _percentile_bounds(block, r, bad, alpha, m, as_generator(rng))


# --------------------------------------------------------------------------
# scalar entry points


def _scalar(bounds: Bounds, method: MethodId, alpha: float) -> ConfidenceInterval:
    if np.isnan(bounds.lower[0]):
        raise MethodFailure(f"{method} needs |r| < 1")
    return ConfidenceInterval(float(bounds.lower[0]), float(bounds.upper[0]), method, 1.0 - alpha)


def _check_scalar_r(r):
    if not -1.0 < r < 1.0:
        raise DomainError(f"need |r| < 1, got {r}")


def pb_ci(r: float, n: int, alpha: float = 0.05, cfg: MCConfig = MCConfig()) -> ConfidenceInterval:
    n = check_n(n, MethodId.PB)
    alpha = check_alpha(alpha)
    _check_scalar_r(r)
    return _scalar(pb_bounds(r, n, alpha, cfg.m, cfg.rng), MethodId.PB, alpha)


def kx_ci(r: float, n: int, alpha: float = 0.05, cfg: MCConfig = MCConfig()) -> ConfidenceInterval:
    n = check_n(n, MethodId.KRISHNAMOORTHY_GCI)
    alpha = check_alpha(alpha)
    _check_scalar_r(r)
    return _scalar(kx_bounds(r, n, alpha, cfg.m, cfg.rng), MethodId.KRISHNAMOORTHY_GCI, alpha)


def new_gci(stats: SuffStats, alpha: float = 0.05, cfg: MCConfig = MCConfig()) -> ConfidenceInterval:
    """Percentile interval of the Wishart pivot, computed from the scatter matrix ``a = n S``."""
    n = check_n(stats.n, MethodId.NEW_GCI)
    alpha = check_alpha(alpha)
    if stats.a11 * stats.a22 - stats.a12**2 <= 0:
        raise DegenerateDataError("scatter matrix is singular")
    b = new_gci_bounds(stats.a11, stats.a22, stats.a12, n, alpha, cfg.m, cfg.rng)
    return _scalar(b, MethodId.NEW_GCI, alpha)
