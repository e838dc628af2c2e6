"""Signed log-likelihood ratio intervals and their higher-order modification D*.

The bivariate normal log-likelihood depends on the data only through the
sample means and the divisor-n moments, so everything here is evaluated from
those and vectorizes over replicates. Both statistics are invariant under
separate location-scale changes of the two coordinates; the interval code
therefore works on standardized moments (means 0, variances 1, covariance r).
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import numerics
from .analytic import Bounds, _safe_r, degenerate_at_one, make_bounds, upper_normal
from .core import (
    ConfidenceInterval,
    DomainError,
    MethodFailure,
    MethodId,
    NumericError,
    check_alpha,
    check_n,
)
from .summary import SuffStats, as_dataset, suff_stats

RHO_EDGE = 1.0 - 1e-10
LR_TOL = 1e-7
MODIFIED_GAP = 1e-3
SINGULAR_D = 1e-6


class ParamVector(NamedTuple):
    mu1: float
    mu2: float
    sigma1: float
    sigma2: float
    rho: float


def _check_theta(theta):
    if np.any(np.asarray(theta.sigma1) <= 0) or np.any(np.asarray(theta.sigma2) <= 0):
        raise DomainError("standard deviations must be positive")
    if np.any(np.abs(np.asarray(theta.rho)) >= 1):
        raise DomainError("|rho| must be < 1")


def loglik(theta: ParamVector, data) -> float:
    """Bivariate normal log-likelihood summed over the rows of ``data``."""
    theta = ParamVector(*theta)
    _check_theta(theta)
    x = as_dataset(data)
    u1 = (x[:, 0] - theta.mu1) / theta.sigma1
    u2 = (x[:, 1] - theta.mu2) / theta.sigma2
    one_r2 = 1.0 - theta.rho**2
    quad = (u1 * u1 - 2 * theta.rho * u1 * u2 + u2 * u2) / one_r2
    per_row = -np.log(2 * np.pi * theta.sigma1 * theta.sigma2 * np.sqrt(one_r2)) - 0.5 * quad
    return float(np.sum(per_row))


def loglik_moments(params, n, m1, m2, v11, v22, v12):
    """Log-likelihood from means and divisor-n moments; broadcasts over everything.

    ``params`` is an array whose last axis holds (mu1, mu2, sigma1, sigma2, rho).
    """
    mu1, mu2, s1, s2, rho = np.moveaxis(np.asarray(params, float), -1, 0)
    d1, d2 = m1 - mu1, m2 - mu2
    one_r2 = 1.0 - rho * rho
    q = (v11 + d1 * d1) / (s1 * s1) - 2 * rho * (v12 + d1 * d2) / (s1 * s2) + (v22 + d2 * d2) / (s2 * s2)
    return -n * np.log(2 * np.pi * s1 * s2) - 0.5 * n * np.log(one_r2) - 0.5 * n * q / one_r2


def mle(data) -> ParamVector:
    st = suff_stats(data)
    return ParamVector(st.mean1, st.mean2, np.sqrt(st.s1sq), np.sqrt(st.s2sq), st.r)


def constrained_mle(data, rho0: float) -> ParamVector:
    """Maximize the likelihood with the correlation held at ``rho0``.

    The means stay at the sample means. Setting the two sigma scores to zero
    forces sigma1/sqrt(s11) = sigma2/sqrt(s22), which leaves the closed form
    sigma_i^2 = s_ii (1 - rho0 r) / (1 - rho0^2).
    """
    if not -1.0 < rho0 < 1.0:
        raise DomainError(f"|rho0| must be < 1, got {rho0}")
    st = suff_stats(data)
    scale = (1.0 - rho0 * st.r) / (1.0 - rho0 * rho0)
    return ParamVector(st.mean1, st.mean2, np.sqrt(st.s1sq * scale), np.sqrt(st.s2sq * scale), rho0)


def _std_params(r, rho0):
    """(MLE, constrained MLE) parameter arrays for standardized moments."""
    r, rho0 = np.broadcast_arrays(np.asarray(r, float), np.asarray(rho0, float))
    zero = np.zeros(r.shape)
    one = np.ones(r.shape)
    sig = np.sqrt((1.0 - rho0 * r) / (1.0 - rho0 * rho0))
    full = np.stack([zero, zero, one, one, r], axis=-1)
    con = np.stack([zero, zero, sig, sig, rho0], axis=-1)
    return full, con


def _std_loglik(params, r, n):
    return loglik_moments(params, n, 0.0, 0.0, 1.0, 1.0, r)


def signed_lr(data, rho0: float) -> float:
    """sign(r - rho0) * sqrt(2 l(theta_hat) - 2 l(theta_hat_rho0))."""
    full = mle(data)
    con = constrained_mle(data, rho0)
    drop = 2.0 * (loglik(full, data) - loglik(con, data))
    return float(np.sign(full.rho - rho0) * np.sqrt(max(drop, 0.0)))


def _signed_lr_std(r, n, rho0):
    full, con = _std_params(r, rho0)
    drop = 2.0 * (_std_loglik(full, r, n) - _std_loglik(con, r, n))
    return np.sign(r - rho0) * np.sqrt(np.maximum(drop, 0.0))


def fd_hessian(fun, x, free):
    """Central-difference Hessian of ``fun`` over the coordinates listed in ``free``.

    ``x`` has the parameters on its last axis; leading axes are batch axes.
    Steps are 1e-4 * max(1, |x_i|), shrunk for rho so it stays inside (-1, 1).
    """
    x = np.asarray(x, float)
    k = len(free)
    h = 1e-4 * np.maximum(1.0, np.abs(x))
    rho_room = 0.5 * (1.0 - np.abs(x[..., 4]))
    h[..., 4] = np.minimum(h[..., 4], rho_room)
    H = np.empty(x.shape[:-1] + (k, k))
    f0 = fun(x)

    def shifted(*moves):
        y = x.copy()
        for i, s in moves:
            y[..., i] += s * h[..., i]
        return fun(y)

    for a, i in enumerate(free):
        hi = h[..., i]
        H[..., a, a] = (shifted((i, 1)) - 2 * f0 + shifted((i, -1))) / (hi * hi)
        for b in range(a):
            j = free[b]
            val = (
                shifted((i, 1), (j, 1)) - shifted((i, 1), (j, -1))
                - shifted((i, -1), (j, 1)) + shifted((i, -1), (j, -1))
            ) / (4 * hi * h[..., j])
            H[..., a, b] = H[..., b, a] = val
    return H


def information_at_mean(params, n, v11, v22, v12):
    """Observed information (negative Hessian) with the means at the sample means.

    Both the MLE and the constrained MLE put mu at the sample means, where the
    mu block decouples from (sigma1, sigma2, rho). Returns the 5x5 matrix in
    the order (mu1, mu2, sigma1, sigma2, rho).
    """
    p = np.asarray(params, float)
    s1, s2, rho = p[..., 2], p[..., 3], p[..., 4]
    one_r2 = 1.0 - rho * rho
    c = n / one_r2
    dc = 2 * n * rho / one_r2**2
    d2c = 2 * n / one_r2**2 + 8 * n * rho * rho / one_r2**3
    q = v11 / s1**2 - 2 * rho * v12 / (s1 * s2) + v22 / s2**2
    q_1 = -2 * v11 / s1**3 + 2 * rho * v12 / (s1**2 * s2)
    q_2 = -2 * v22 / s2**3 + 2 * rho * v12 / (s1 * s2**2)
    q_11 = 6 * v11 / s1**4 - 4 * rho * v12 / (s1**3 * s2)
    q_22 = 6 * v22 / s2**4 - 4 * rho * v12 / (s1 * s2**3)
    q_12 = -2 * rho * v12 / (s1**2 * s2**2)
    q_r = -2 * v12 / (s1 * s2)
    q_r1 = 2 * v12 / (s1**2 * s2)
    q_r2 = 2 * v12 / (s1 * s2**2)
    j = np.zeros(s1.shape + (5, 5))
    j[..., 0, 0] = c / s1**2
    j[..., 1, 1] = c / s2**2
    j[..., 0, 1] = j[..., 1, 0] = -c * rho / (s1 * s2)
    j[..., 2, 2] = -(n / s1**2 - 0.5 * c * q_11)
    j[..., 3, 3] = -(n / s2**2 - 0.5 * c * q_22)
    j[..., 2, 3] = j[..., 3, 2] = 0.5 * c * q_12
    j[..., 2, 4] = j[..., 4, 2] = 0.5 * dc * q_1 + 0.5 * c * q_r1
    j[..., 3, 4] = j[..., 4, 3] = 0.5 * dc * q_2 + 0.5 * c * q_r2
    j[..., 4, 4] = -(n * (1 + rho * rho) / one_r2**2 - 0.5 * d2c * q - dc * q_r)
    return j


def observed_information(r, n, rho0):
    """Full 5x5 information at the MLE and the 4x4 nuisance block at the constrained MLE."""
    full, con = _std_params(r, rho0)
    j_full = information_at_mean(full, n, 1.0, 1.0, r)
    j_nuis = information_at_mean(con, n, 1.0, 1.0, r)[..., :4, :4]
    return j_full, j_nuis


def _modified_std(r, n, rho0, raise_errors=False):
    r, rho0 = np.broadcast_arrays(np.asarray(r, float), np.asarray(rho0, float))
    d = _signed_lr_std(r, n, rho0)
    j_full, j_nuis = observed_information(r, n, rho0)
    sign_f, logdet_f = np.linalg.slogdet(j_full)
    sign_n, logdet_n = np.linalg.slogdet(j_nuis)
    singular = np.abs(d) < SINGULAR_D
    negative = (sign_f * sign_n) <= 0
    if raise_errors:
        if np.any(singular):
            raise MethodFailure("D* is singular at rho0 = r")
        if np.any(negative):
            raise NumericError("information determinant ratio is not positive")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        q = (r - rho0) * np.exp(0.5 * (logdet_f - logdet_n))
        dstar = d - np.log(d / q) / d
    return np.where(singular | negative, np.nan, dstar)


def modified_signed_lr(data, rho0: float) -> float:
    """D*(rho0) = D - log(D / Q) / D with Q the information-scaled Wald difference."""
    if not -1.0 < rho0 < 1.0:
        raise DomainError(f"|rho0| must be < 1, got {rho0}")
    st = suff_stats(data)
    return float(_modified_std(st.r, st.n, rho0, raise_errors=True))


def lr_bounds(r, n: int, alpha: float, modified: bool) -> Bounds:
    """Invert |D| < z (or |D*| < z) by bisection on each side of r."""
    r_obs = np.atleast_1d(np.asarray(r, float))
    r = _safe_r(r_obs)
    z = upper_normal(alpha)
    gap = MODIFIED_GAP if modified else 0.0
    stat = (lambda rho: _modified_std(r, n, rho)) if modified else (lambda rho: _signed_lr_std(r, n, rho))

    def solve(lo, hi, target):
        lo = np.clip(lo, -RHO_EDGE, RHO_EDGE)
        hi = np.clip(hi, -RHO_EDGE, RHO_EDGE)
        root, status = numerics.bisect(lambda rho: stat(rho) - target, lo, hi, tol=LR_TOL)
        root = np.where(status == numerics.BELOW, -1.0, root)
        root = np.where(status == numerics.ABOVE, 1.0, root)
        return root, status != numerics.FOUND

    lower, clo = solve(np.full(r.shape, -RHO_EDGE), r - gap, z)
    upper, chi = solve(r + gap, np.full(r.shape, RHO_EDGE), -z)
    return degenerate_at_one(make_bounds(lower, upper, clo, chi), r_obs)


def lr_ci(data, alpha: float = 0.05, modified: bool = False) -> ConfidenceInterval:
    method = MethodId.MODIFIED_SIGNED_LR if modified else MethodId.SIGNED_LR
    st = data if isinstance(data, SuffStats) else suff_stats(data)
    n = check_n(st.n, method)
    alpha = check_alpha(alpha)
    b = lr_bounds(st.r, n, alpha, modified)
    if np.isnan(b.lower[0]) or np.isnan(b.upper[0]):
        raise MethodFailure(f"{method} could not be inverted")
    return ConfidenceInterval(
        float(b.lower[0]), float(b.upper[0]), method, 1 - alpha,
        bool(b.clamped_lower[0]), bool(b.clamped_upper[0]),
    )
