"""Exact interval from the hypergeometric density of the sample correlation."""

from __future__ import annotations

import numpy as np
from scipy import special

from . import numerics
from .analytic import Bounds, degenerate_at_one, make_bounds, _safe_r
from .core import ConfidenceInterval, DomainError, MethodId, NumericError, check_alpha, check_n

RHO_EDGE = 1.0 - 1e-9
CDF_TOL = 1e-10
RHO_TOL = 1e-7
_LOG_SQRT_2PI = 0.5 * np.log(2 * np.pi)


def _log_prefactor(n: int):
    return np.log(n - 2.0) + special.gammaln(n - 1.0) - _LOG_SQRT_2PI - special.gammaln(n - 0.5)


def _log_sech2(u):
    au = np.abs(u)
    return -2.0 * (au + np.log1p(np.exp(-2.0 * au)) - np.log(2.0))


def _check(n, rho):
    if n < 4:
        raise DomainError(f"exact density needs n >= 4, got {n}")
    if np.any(np.abs(rho) >= 1):
        raise DomainError("|rho| must be < 1")


def exact_density(r, n: int, rho):
    """Density of the sample correlation of ``n`` bivariate normal pairs.

    f(r; rho) = (n-2) Gamma(n-1) (1-rho^2)^((n-1)/2) (1-r^2)^((n-4)/2)
                / (sqrt(2 pi) Gamma(n-1/2) (1-rho r)^(n-3/2))
                * 2F1(1/2, 1/2; n-1/2; (1+rho r)/2)

    At ``|r| = 1`` the limiting value is returned (zero for n > 4).
    """
    r, rho = np.broadcast_arrays(np.asarray(r, float), np.asarray(rho, float))
    _check(n, rho)
    if np.any(np.abs(r) > 1):
        raise DomainError("|r| must be <= 1")
    with np.errstate(divide="ignore"):
        edge = 0.0 if n == 4 else 0.5 * (n - 4) * np.log1p(-r * r)
    logf = (
        _log_prefactor(n)
        + 0.5 * (n - 1) * np.log1p(-rho * rho)
        + edge
        - (n - 1.5) * np.log1p(-rho * r)
        + np.log(special.hyp2f1(0.5, 0.5, n - 0.5, 0.5 * (1.0 + rho * r)))
    )
    return np.exp(logf)


def _log_density_u(u, n, rho):
    """Log density of atanh(R) at ``u`` (the density of R times the Jacobian sech^2 u)."""
    r = np.tanh(u)
    x = 0.5 * (1.0 + rho * r)
    hyp = special.hyp2f1(0.5, 0.5, n - 0.5, x)
    return (
        _log_prefactor(n)
        + 0.5 * (n - 1) * np.log1p(-rho * rho)
        + 0.5 * (n - 2) * _log_sech2(u)
        - (n - 1.5) * np.log1p(-rho * r)
        + np.log(hyp)
    )


def _lower_limit(n, rho, u_r):
    # the mass of atanh(R) sits within a few multiples of 1/sqrt(n-3) of atanh(rho);
    # its left tail decays like exp((n-2) u)
    width = 40.0 / np.sqrt(n - 3.0)
    return np.minimum(u_r, np.arctanh(rho)) - width


def exact_cdf(r, n: int, rho, tol: float = CDF_TOL):
    """P(R <= r) by adaptive Gauss-Kronrod quadrature in the variable u = atanh(r)."""
    r, rho = np.broadcast_arrays(np.asarray(r, float), np.asarray(rho, float))
    _check(n, rho)
    shape = r.shape
    r, rho = r.ravel(), rho.ravel()
    out = np.where(r >= 1.0, 1.0, 0.0)
    inner = np.abs(r) < 1.0
    if np.any(inner):
        u_r = np.arctanh(r[inner])
        rh = rho[inner]
        a = _lower_limit(n, rh, u_r)

        def integrand(u, idx):
            return np.exp(_log_density_u(u, n, rh[idx][:, None]))

        vals, _ = numerics.gauss_kronrod(integrand, a, u_r, tol=tol)
        out[inner] = np.clip(vals, 0.0, 1.0)
    return out.reshape(shape)


def exact_bounds(r, n: int, alpha: float) -> Bounds:
    """Solve the two tail equations in rho, working in zeta = atanh(rho)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    rs = _safe_r(r)
    z_edge = np.arctanh(RHO_EDGE)
    # dzeta = drho / (1 - rho^2) >= drho, so this zeta tolerance meets RHO_TOL
    ztol = RHO_TOL

    def solve(target):
        def f(zeta):
            rho = np.tanh(zeta)
            return exact_cdf(rs, n, rho) - target

        full_lo = np.full(rs.shape, -z_edge)
        full_hi = np.full(rs.shape, z_edge)
        # start from a bracket around the Fisher-z endpoint, widen where it fails
        z = np.arctanh(rs)
        guess = z - special.ndtri(target) / np.sqrt(n - 3.0)
        lo = np.clip(guess - 1.0, -z_edge, z_edge)
        hi = np.clip(guess + 1.0, -z_edge, z_edge)
        flo, fhi = f(lo), f(hi)
        # f is decreasing in zeta: need f(lo) >= 0 >= f(hi)
        lo = np.where(flo >= 0, lo, full_lo)
        hi = np.where(fhi <= 0, hi, full_hi)
        root, status = numerics.illinois(f, lo, hi, tol=ztol)
        # decreasing f: no root below means f(lo) < 0 already, i.e. rho below the edge
        rho = np.tanh(root)
        rho = np.where(status == numerics.BELOW, -1.0, rho)
        rho = np.where(status == numerics.ABOVE, 1.0, rho)
        return rho, status != numerics.FOUND

    lower, clo = solve(1.0 - alpha / 2.0)
    upper, chi = solve(alpha / 2.0)
    return degenerate_at_one(make_bounds(lower, upper, clo, chi), r)


def exact_ci(r: float, n: int, alpha: float = 0.05) -> ConfidenceInterval:
    n = check_n(n, MethodId.EXACT)
    alpha = check_alpha(alpha)
    if not -1.0 <= r <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {r}")
    b = exact_bounds(r, n, alpha)
    if np.isnan(b.lower[0]) or np.isnan(b.upper[0]):
        raise NumericError("exact tail equations could not be solved")
    return ConfidenceInterval(
        float(b.lower[0]), float(b.upper[0]), MethodId.EXACT, 1 - alpha,
        bool(b.clamped_lower[0]), bool(b.clamped_upper[0]),
    )
