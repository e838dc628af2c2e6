"""One table from method id to a batch interval routine.

Every entry has the signature ``fn(stats, alpha, rng, m) -> Bounds`` where
``stats`` is a :class:`SuffStats` with array fields (one entry per replicate),
``rng`` is a numpy Generator used only by the Monte Carlo methods and ``m`` is
their number of inner draws.
"""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from . import analytic, exact, likelihood, montecarlo
from .analytic import Bounds
from .core import (
    ALL_METHODS,
    ConfidenceInterval,
    MethodFailure,
    MethodId,
    check_alpha,
    check_n,
)
from .distributions import RngStream, as_generator
from .montecarlo import MCConfig
from .summary import SuffStats

BatchFn = Callable[[SuffStats, float, np.random.Generator, int], Bounds]


def _hotelling(variant):
    return lambda st, a, g, m: analytic.hotelling_bounds(st.r, st.n, a, variant)


REGISTRY: dict[MethodId, BatchFn] = {
    MethodId.EXACT: lambda st, a, g, m: exact.exact_bounds(st.r, st.n, a),
    MethodId.FISHER_Z: lambda st, a, g, m: analytic.fisher_z_bounds(st.r, st.n, a),
    MethodId.HOTELLING1: _hotelling(1),
    MethodId.HOTELLING2: _hotelling(2),
    MethodId.HOTELLING3: _hotelling(3),
    MethodId.HOTELLING4: _hotelling(4),
    MethodId.RUBEN: lambda st, a, g, m: analytic.ruben_bounds(st.r, st.n, a),
    MethodId.MUDDAPUR1: lambda st, a, g, m: analytic.muddapur_t_bounds(st.r, st.b, st.n, a),
    MethodId.MUDDAPUR2: lambda st, a, g, m: analytic.jeyaratnam_bounds(st.r, st.n, a),
    MethodId.SIGNED_LR: lambda st, a, g, m: likelihood.lr_bounds(st.r, st.n, a, False),
    MethodId.MODIFIED_SIGNED_LR: lambda st, a, g, m: likelihood.lr_bounds(st.r, st.n, a, True),
    MethodId.KRISHNAMOORTHY_GCI: lambda st, a, g, m: montecarlo.kx_bounds(st.r, st.n, a, m, g),
    MethodId.WN1: lambda st, a, g, m: analytic.wn_bounds(st.r, st.n, a, 1),
    MethodId.WN2: lambda st, a, g, m: analytic.wn_bounds(st.r, st.n, a, 2),
    MethodId.HADDAD_PROVOST: lambda st, a, g, m: analytic.haddad_provost_bounds(
        st.dplus, st.dminus, st.n, a
    ),
    MethodId.NEW_GCI: lambda st, a, g, m: montecarlo.new_gci_bounds(
        st.a11, st.a22, st.a12, st.n, a, m, g
    ),
    MethodId.PB: lambda st, a, g, m: montecarlo.pb_bounds(st.r, st.n, a, m, g),
}

# methods that use more of the data than (r, n)
NEEDS_RAW_DATA = frozenset({MethodId.MUDDAPUR1})


def batch_bounds(method: MethodId, stats: SuffStats, alpha: float, rng=None, m: int = 10_000) -> Bounds:
    """Evaluate ``method`` on every replicate in ``stats``; NaN marks failures."""
    check_n(stats.n, method)
    gen = as_generator(rng) if rng is not None else None
    if method.is_monte_carlo and gen is None:
        raise ValueError(f"{method} needs a random stream")
    return REGISTRY[method](_as_arrays(stats), alpha, gen, m)


def _as_arrays(stats: SuffStats) -> SuffStats:
    if np.ndim(stats.r) > 0:
        return stats
    return SuffStats(stats.n, *(np.atleast_1d(np.asarray(getattr(stats, f), dtype=float))
                                for f in ("mean1", "mean2", "s1sq", "s2sq", "s12", "r", "b",
                                          "dplus", "dminus")))


def compute_interval(
    method: MethodId, stats: SuffStats, alpha: float = 0.05, cfg: MCConfig | None = None
) -> ConfidenceInterval:
    """Single interval for one data set. Each Monte Carlo method draws from
    its own substream of ``cfg.rng`` so results do not depend on which other
    methods were requested."""
    alpha = check_alpha(alpha)
    cfg = cfg or MCConfig()
    gen = cfg.rng.substream(method.value).generator()
    b = batch_bounds(method, stats, alpha, gen, cfg.m)
    lo, hi = float(b.lower[0]), float(b.upper[0])
    if np.isnan(lo) or np.isnan(hi):
        raise MethodFailure(f"{method} has no solution for this input")
    return ConfidenceInterval(
        lo, hi, method, 1.0 - alpha, bool(b.clamped_lower[0]), bool(b.clamped_upper[0])
    )


def compute_all(
    stats: SuffStats,
    alpha: float = 0.05,
    methods: Iterable[MethodId] = ALL_METHODS,
    cfg: MCConfig | None = None,
) -> dict[MethodId, ConfidenceInterval | Exception]:
    """Every requested interval; a method that cannot run maps to its exception."""
    out: dict[MethodId, ConfidenceInterval | Exception] = {}
    for method in methods:
        try:
            out[method] = compute_interval(method, stats, alpha, cfg)
        except (ValueError, ArithmeticError) as exc:
            out[method] = exc
    return out


def default_config(seed: int = 0, m: int = 10_000) -> MCConfig:
    return MCConfig(m, RngStream(seed))
