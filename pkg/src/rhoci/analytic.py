"""Closed-form and root-solved deterministic intervals.

Each ``*_bounds`` function is vectorized over ``r`` (and ``b`` where used) and
returns a :class:`Bounds` of arrays, with NaN marking a replicate on which the
method failed. The scalar ``*_ci`` wrappers raise instead and return a
:class:`~rhoci.core.ConfidenceInterval`.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import numerics
from .core import (
    ConfidenceInterval,
    DomainError,
    MethodFailure,
    MethodId,
    check_alpha,
    check_n,
)
from .distributions import f_quantile, std_normal_quantile, t_quantile
from .summary import NEAR_ONE, SuffStats

RHO_EDGE = 1.0 - 1e-10
ROOT_TOL = 1e-10


class Bounds(NamedTuple):
    lower: np.ndarray
    upper: np.ndarray
    clamped_lower: np.ndarray
    clamped_upper: np.ndarray

    def to_ci(self, method: MethodId, alpha: float) -> ConfidenceInterval:
        lo, hi = float(self.lower), float(self.upper)
        if np.isnan(lo) or np.isnan(hi):
            raise MethodFailure(f"{method} has no solution for this input")
        return ConfidenceInterval(
            lo, hi, method, 1.0 - alpha, bool(self.clamped_lower), bool(self.clamped_upper)
        )


def make_bounds(lo, hi, clo=None, chi=None) -> Bounds:
    """Order endpoints, clip into [-1, 1] and flag anything that was clipped."""
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
    clo = np.zeros(lo.shape, bool) if clo is None else np.asarray(clo, bool)
    chi = np.zeros(hi.shape, bool) if chi is None else np.asarray(chi, bool)
    clo = clo | (lo < -1.0)
    chi = chi | (hi > 1.0)
    return Bounds(np.clip(lo, -1.0, 1.0), np.clip(hi, -1.0, 1.0), clo, chi)


def degenerate_at_one(bounds: Bounds, r) -> Bounds:
    """Replace entries with |r| at 1 by the point interval [r, r], both flags set."""
    r = np.asarray(r, dtype=float)
    edge = np.abs(r) >= NEAR_ONE
    if not np.any(edge):
        return bounds
    return Bounds(
        np.where(edge, r, bounds.lower),
        np.where(edge, r, bounds.upper),
        bounds.clamped_lower | edge,
        bounds.clamped_upper | edge,
    )


def _safe_r(r):
    r = np.asarray(r, dtype=float)
    return np.where(np.abs(r) >= NEAR_ONE, 0.0, r)


def upper_normal(alpha: float) -> float:
    """Upper alpha/2 point of N(0, 1)."""
    return std_normal_quantile(1.0 - alpha / 2.0)


def solve_increasing(g, target, lo=-RHO_EDGE, hi=RHO_EDGE):
    """Solve ``g(rho) = target`` on the correlation bracket; clamp to +-1 if unreachable."""
    target = np.asarray(target, dtype=float)
    root, status = numerics.bisect(lambda x: g(x) - target, np.full(target.shape, lo),
                                   np.full(target.shape, hi), tol=ROOT_TOL)
    root = np.where(status == numerics.BELOW, -1.0, root)
    root = np.where(status == numerics.ABOVE, 1.0, root)
    return root, status != numerics.FOUND


# --------------------------------------------------------------------------
# Fisher z


def fisher_z_bounds(r, n: int, alpha: float) -> Bounds:
    r = np.asarray(r, dtype=float)
    z = np.arctanh(_safe_r(r))
    half = upper_normal(alpha) / np.sqrt(n - 3.0)
    return degenerate_at_one(make_bounds(np.tanh(z - half), np.tanh(z + half)), r)


def fisher_z_ci(r: float, n: int, alpha: float = 0.05) -> ConfidenceInterval:
    n = check_n(n, MethodId.FISHER_Z)
    alpha = check_alpha(alpha)
    _check_r(r)
    return fisher_z_bounds(r, n, alpha).to_ci(MethodId.FISHER_Z, alpha)


def _check_r(r):
    if not -1.0 <= r <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {r}")


# --------------------------------------------------------------------------
# Hotelling's four modifications


def hotelling_transform(z, x, n: int, variant: int):
    """Z_i from (z, r), or equally zeta_i from (zeta, rho).

    The last correction terms of Z_2 and Z_4 use the cube of the correlation,
    which keeps both transforms odd (and the intervals sign-equivariant).
    """
    m = n - 1.0
    if variant == 1:
        return z - (7 * z + x) / (8 * m)
    if variant == 2:
        return z - (7 * z + x) / (8 * m) - (119 * z + 57 * x + 3 * x**3) / (384 * m * m)
    if variant == 3:
        return z - (3 * z + x) / (4 * m)
    if variant == 4:
        return z - (3 * z + x) / (4 * m) - (23 * z + 33 * x - 5 * x**3) / (96 * m * m)
    raise DomainError(f"Hotelling variant must be 1..4, got {variant}")


def hotelling_bounds(r, n: int, alpha: float, variant: int) -> Bounds:
    r = np.asarray(r, dtype=float)
    rs = _safe_r(r)
    zi = hotelling_transform(np.arctanh(rs), rs, n, variant)
    half = upper_normal(alpha) / np.sqrt(n - 1.0)
    g = lambda rho: hotelling_transform(np.arctanh(rho), rho, n, variant)
    lo, clo = solve_increasing(g, zi - half)
    hi, chi = solve_increasing(g, zi + half)
    return degenerate_at_one(make_bounds(lo, hi, clo, chi), r)


_HOTELLING_IDS = {
    1: MethodId.HOTELLING1,
    2: MethodId.HOTELLING2,
    3: MethodId.HOTELLING3,
    4: MethodId.HOTELLING4,
}


def hotelling_ci(r: float, n: int, alpha: float = 0.05, variant: int = 1) -> ConfidenceInterval:
    if variant not in _HOTELLING_IDS:
        raise DomainError(f"Hotelling variant must be 1..4, got {variant}")
    method = _HOTELLING_IDS[variant]
    n = check_n(n, method)
    alpha = check_alpha(alpha)
    _check_r(r)
    return hotelling_bounds(r, n, alpha, variant).to_ci(method, alpha)


# --------------------------------------------------------------------------
# Ruben


def ruben_statistic(r, rho, n: int):
    """Ruben's approximately standard normal statistic Z_hr."""
    rt = r / np.sqrt(1 - r * r)
    pt = rho / np.sqrt(1 - rho * rho)
    num = np.sqrt((2 * n - 5) / 2) * rt - np.sqrt((2 * n - 3) / 2) * pt
    return num / np.sqrt(1 + 0.5 * (rt * rt + pt * pt))


def ruben_bounds(r, n: int, alpha: float) -> Bounds:
    r = np.asarray(r, dtype=float)
    rs = _safe_r(r)
    q = upper_normal(alpha)
    rt = rs / np.sqrt(1 - rs * rs)
    v = np.sqrt((2 * n - 5) / 2) * rt
    k = np.sqrt((2 * n - 3) / 2)
    qa = k * k - q * q / 2
    qb = -2 * v * k
    qc = v * v - q * q - q * q * rt * rt / 2
    disc = qb * qb - 4 * qa * qc
    ok = (disc >= 0) & (qa > 0)
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (-qb - sq) / (2 * qa)
        t2 = (-qb + sq) / (2 * qa)
    to_rho = lambda t: t / np.sqrt(1 + t * t)
    lo = np.where(ok, to_rho(t1), np.nan)
    hi = np.where(ok, to_rho(t2), np.nan)
    return degenerate_at_one(make_bounds(lo, hi), r)


def ruben_ci(r: float, n: int, alpha: float = 0.05) -> ConfidenceInterval:
    n = check_n(n, MethodId.RUBEN)
    alpha = check_alpha(alpha)
    _check_r(r)
    return ruben_bounds(r, n, alpha).to_ci(MethodId.RUBEN, alpha)


# --------------------------------------------------------------------------
# Muddapur / Samiuddin t statistic and the F form


def muddapur_t_bounds(r, b, n: int, alpha: float) -> Bounds:
    """Roots of (n-2)(r - rho b)^2 = t^2 (1 - rho^2)(1 - r^2), clamped into [-1, 1]."""
    r, b = np.broadcast_arrays(np.asarray(r, float), np.asarray(b, float))
    t = t_quantile(1.0 - alpha / 2.0, n - 2)
    m = n - 2.0
    one_r2 = 1.0 - r * r
    qa = m * b * b + t * t * one_r2
    qb = -2.0 * m * r * b
    qc = m * r * r - t * t * one_r2
    disc = qb * qb - 4 * qa * qc
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    lo = np.where(ok, (-qb - sq) / (2 * qa), np.nan)
    hi = np.where(ok, (-qb + sq) / (2 * qa), np.nan)
    return make_bounds(lo, hi)


def muddapur_t_ci(stats: SuffStats, alpha: float = 0.05) -> ConfidenceInterval:
    n = check_n(stats.n, MethodId.MUDDAPUR1)
    alpha = check_alpha(alpha)
    return muddapur_t_bounds(stats.r, stats.b, n, alpha).to_ci(MethodId.MUDDAPUR1, alpha)


def jeyaratnam_w(n: int, alpha: float) -> float:
    t = t_quantile(1.0 - alpha / 2.0, n - 2)
    u = t / np.sqrt(n - 2.0)
    return float(u / np.sqrt(1.0 + u * u))


def jeyaratnam_bounds(r, n: int, alpha: float) -> Bounds:
    r = np.asarray(r, dtype=float)
    w = jeyaratnam_w(n, alpha)
    return make_bounds((r - w) / (1 - r * w), (r + w) / (1 + r * w))


def muddapur_f_bounds(r, n: int, alpha: float) -> Bounds:
    """The same interval written with the upper alpha/2 point of F(n-2, n-2)."""
    r = np.asarray(r, dtype=float)
    f = f_quantile(1.0 - alpha / 2.0, n - 2, n - 2)
    lo = ((1 + f) * r + (1 - f)) / ((1 + f) + (1 - f) * r)
    hi = ((1 + f) * r - (1 - f)) / ((1 + f) - (1 - f) * r)
    return make_bounds(lo, hi)


def jeyaratnam_ci(r: float, n: int, alpha: float = 0.05) -> ConfidenceInterval:
    n = check_n(n, MethodId.MUDDAPUR2)
    alpha = check_alpha(alpha)
    _check_r(r)
    return jeyaratnam_bounds(r, n, alpha).to_ci(MethodId.MUDDAPUR2, alpha)


# --------------------------------------------------------------------------
# Haddad and Provost


def haddad_provost_bounds(dplus, dminus, n: int, alpha: float) -> Bounds:
    dplus, dminus = np.asarray(dplus, float), np.asarray(dminus, float)
    f_hi = f_quantile(1.0 - alpha / 2.0, n - 1, n - 1)  # upper alpha/2 point
    f_lo = f_quantile(alpha / 2.0, n - 1, n - 1)  # upper 1 - alpha/2 point
    e1 = (dplus - dminus * f_hi) / (dplus + dminus * f_hi)
    e2 = (dplus - dminus * f_lo) / (dplus + dminus * f_lo)
    return make_bounds(e1, e2)


def haddad_provost_ci(stats: SuffStats, alpha: float = 0.05) -> ConfidenceInterval:
    n = check_n(stats.n, MethodId.HADDAD_PROVOST)
    alpha = check_alpha(alpha)
    b = haddad_provost_bounds(stats.dplus, stats.dminus, n, alpha)
    return b.to_ci(MethodId.HADDAD_PROVOST, alpha)


# --------------------------------------------------------------------------
# Withers and Nadarajah


def wn_g1(x, rho):
    return rho / 2 + rho**3 * (x * x - 1) / 6


def wn_g2(x, rho):
    return x**3 / 12 + x / 4 - rho**2 * x / 4 - rho**6 * (2 * x**3 - 5 * x) / 36


def wn_corrected_quantile(x, rho, n: int, order: int):
    y = x + wn_g1(x, rho) / np.sqrt(n)
    if order == 2:
        y = y + wn_g2(x, rho) / n
    return y


def wn_bounds(r, n: int, alpha: float, order: int, plug_in: bool = False) -> Bounds:
    """Cornish-Fisher interval; solves atanh(r) - atanh(rho) = y_p(rho) / sqrt(n).

    With ``plug_in`` the correction polynomials use the estimate ``r`` in place
    of the hypothesized ``rho``.
    """
    if order not in (1, 2):
        raise DomainError(f"order must be 1 or 2, got {order}")
    r = np.asarray(r, dtype=float)
    rs = _safe_r(r)
    theta = np.arctanh(rs)
    sn = np.sqrt(n)
    ends = []
    for p in (1.0 - alpha / 2.0, alpha / 2.0):
        x = std_normal_quantile(p)

        def g(rho, x=x):
            at = rs if plug_in else rho
            return np.arctanh(rho) + wn_corrected_quantile(x, at, n, order) / sn

        ends.append(solve_increasing(g, theta))
    (lo, clo), (hi, chi) = ends
    return degenerate_at_one(make_bounds(lo, hi, clo, chi), r)


def withers_nadarajah_ci(
    r: float, n: int, alpha: float = 0.05, order: int = 1, plug_in: bool = False
) -> ConfidenceInterval:
    method = MethodId.WN1 if order == 1 else MethodId.WN2
    n = check_n(n, method)
    alpha = check_alpha(alpha)
    _check_r(r)
    return wn_bounds(r, n, alpha, order, plug_in).to_ci(method, alpha)


# --------------------------------------------------------------------------
# self-test


def check_monotone(n_values=(3, 4, 5, 10, 25, 100), alphas=(0.01, 0.05, 0.1), points: int = 4001):
    """Verify on a grid that every function solved by :func:`solve_increasing` is increasing in rho.

    Returns a list of ``(name, n, alpha)`` triples that failed; empty means the
    bisection targets are well posed on the whole grid.
    """
    rho = np.linspace(-RHO_EDGE, RHO_EDGE, points)
    bad = []
    for n in n_values:
        for variant in (1, 2, 3, 4):
            if np.any(np.diff(hotelling_transform(np.arctanh(rho), rho, n, variant)) <= 0):
                bad.append((f"Hotelling{variant}", n, None))
        for alpha in alphas:
            for p in (1.0 - alpha / 2.0, alpha / 2.0):
                x = std_normal_quantile(p)
                for order in (1, 2):
                    g = np.arctanh(rho) + wn_corrected_quantile(x, rho, n, order) / np.sqrt(n)
                    if np.any(np.diff(g) <= 0):
                        bad.append((f"WN{order}", n, alpha))
    return bad
