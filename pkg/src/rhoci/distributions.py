"""Quantiles, the Gauss hypergeometric series, 2x2 Cholesky and seeded samplers."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .core import DomainError, NumericError

# --------------------------------------------------------------------------
# quantiles

_QUANTILE_TOL = 1e-14


def _invert_cdf(cdf, pdf, p, x0, lo, hi, maxiter=200):
    """Newton's method on ``cdf(x) = p`` kept inside a shrinking bracket."""
    x = min(max(x0, lo), hi)
    for _ in range(maxiter):
        fx = cdf(x) - p
        if fx == 0.0:
            return x
        if fx > 0:
            hi = x
        else:
            lo = x
        d = pdf(x)
        step = fx / d if d > 0 else math.inf
        xn = x - step
        if not (lo < xn < hi) or not math.isfinite(xn):
            xn = 0.5 * (lo + hi)
        if abs(xn - x) <= _QUANTILE_TOL * max(1.0, abs(x)):
            return xn
        x = xn
    raise NumericError(f"quantile inversion did not converge for p={p}", partial=x)


def _check_p(p):
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")


def _expand_bracket(cdf, p, lo, hi, positive=False):
    while cdf(hi) < p:
        hi *= 2.0
    if not positive:
        while cdf(lo) > p:
            lo *= 2.0
    return lo, hi


def norm_cdf(x):
    return special.ndtr(x)


def std_normal_quantile(p: float) -> float:
    """Lower-tail quantile of N(0, 1)."""
    _check_p(p)
    if p == 0.5:
        return 0.0
    if p > 0.5:
        return -std_normal_quantile(1.0 - p)
    # Newton from the crude tail approximation sqrt(-2 log p)
    t = math.sqrt(-2.0 * math.log(p))
    x0 = -(t - (2.30753 + 0.27061 * t) / (1.0 + 0.99229 * t + 0.04481 * t * t))
    pdf = lambda x: math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
    lo, hi = _expand_bracket(norm_cdf, p, -1.0, 0.0)
    return _invert_cdf(norm_cdf, pdf, p, x0, lo, hi)


def _check_df(*dfs):
    for df in dfs:
        if not (df > 0 and math.isfinite(df)):
            raise DomainError(f"degrees of freedom must be positive, got {df}")


def t_cdf(x, df):
    return special.stdtr(df, x)


def t_quantile(p: float, df: float) -> float:
    """Lower-tail quantile of Student's t via the regularized incomplete beta."""
    _check_p(p)
    _check_df(df)
    if p == 0.5:
        return 0.0
    if p > 0.5:
        return -t_quantile(1.0 - p, df)
    logc = special.gammaln((df + 1) / 2) - special.gammaln(df / 2) - 0.5 * math.log(df * math.pi)
    pdf = lambda x: math.exp(logc - (df + 1) / 2 * math.log1p(x * x / df))
    cdf = lambda x: t_cdf(x, df)
    lo, hi = _expand_bracket(cdf, p, -1.0, 0.0)
    x0 = std_normal_quantile(p)
    return _invert_cdf(cdf, pdf, p, x0, lo, hi)


def f_cdf(x, df1, df2):
    return special.fdtr(df1, df2, x)


def f_quantile(p: float, df1: float, df2: float) -> float:
    """Lower-tail quantile of the F(df1, df2) distribution."""
    _check_p(p)
    _check_df(df1, df2)
    logc = (
        0.5 * df1 * math.log(df1 / df2)
        - special.betaln(df1 / 2, df2 / 2)
    )

    def pdf(x):
        if x <= 0:
            return 0.0
        return math.exp(
            logc + (df1 / 2 - 1) * math.log(x) - (df1 + df2) / 2 * math.log1p(df1 * x / df2)
        )

    cdf = lambda x: f_cdf(x, df1, df2)
    lo, hi = _expand_bracket(cdf, p, 0.0, 1.0, positive=True)
    # Newton is poorly conditioned in the far left tail, so start at the bracket midpoint
    return _invert_cdf(cdf, pdf, p, 0.5 * (lo + hi), lo, hi)


def chi2_cdf(x, df):
    return special.chdtr(df, x)


# --------------------------------------------------------------------------
# Gauss hypergeometric function


def gauss_2f1(aa: float, bb: float, cc: float, x: float, max_terms: int = 10_000) -> float:
    """Power series of 2F1(aa, bb; cc; x) for 0 <= x < 1.

    Terms are added until the latest one is below 1e-14 relative to the sum.
    """
    if cc <= 0 and float(cc).is_integer():
        raise DomainError("cc must not be a non-positive integer")
    if not 0.0 <= x < 1.0:
        raise DomainError(f"x must lie in [0, 1), got {x}")
    term = 1.0
    total = 1.0
    for k in range(max_terms):
        term *= (aa + k) * (bb + k) / ((cc + k) * (k + 1)) * x
        total += term
        if abs(term) < 1e-14 * abs(total):
            return total
        if term == 0.0:
            return total
    raise NumericError("2F1 series did not converge", partial=total)


# --------------------------------------------------------------------------
# 2x2 covariance matrices


@dataclass(frozen=True)
class CholeskyFactor2:
    l11: float
    l21: float
    l22: float

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.l11, 0.0], [self.l21, self.l22]])

    def reconstruct(self) -> "CovMatrix2":
        return CovMatrix2(
            self.l11**2, self.l21**2 + self.l22**2, self.l11 * self.l21
        )


@dataclass(frozen=True)
class CovMatrix2:
    s11: float
    s22: float
    s12: float

    @classmethod
    def from_params(cls, sigma1: float, sigma2: float, rho: float) -> "CovMatrix2":
        return cls(sigma1**2, sigma2**2, rho * sigma1 * sigma2)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.s11, self.s12], [self.s12, self.s22]])

    @property
    def det(self) -> float:
        return self.s11 * self.s22 - self.s12**2

    def is_pd(self) -> bool:
        return self.s11 > 0 and self.det > 0

    def inverse(self) -> "CovMatrix2":
        d = self.det
        if not self.is_pd():
            raise DomainError("matrix is not positive definite")
        return CovMatrix2(self.s22 / d, self.s11 / d, -self.s12 / d)

    def cholesky(self) -> CholeskyFactor2:
        if not self.is_pd():
            raise DomainError("Cholesky factor needs a positive definite matrix")
        l11 = math.sqrt(self.s11)
        l21 = self.s12 / l11
        return CholeskyFactor2(l11, l21, math.sqrt(self.det / self.s11))


# --------------------------------------------------------------------------
# random streams


def mix64(*parts) -> int:
    h = hashlib.blake2b(repr(parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    Streams with different ids are statistically independent: both values
    feed a numpy ``SeedSequence`` whose spawn key keeps them apart.
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(
            entropy=self.seed & (2**64 - 1), spawn_key=(self.stream_id & (2**64 - 1),)
        )
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, *key) -> "RngStream":
        return RngStream(self.seed, mix64(self.stream_id, *key))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


# --------------------------------------------------------------------------
# samplers


def _prep(mu, sigma: CovMatrix2, n: int):
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    L = sigma.cholesky().matrix
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (2,):
        raise DomainError("mu must be a pair")
    return mu, L


def _shape(n, size):
    return (n, 2) if size is None else (size, n, 2)


def sample_bvnormal(rng, mu, sigma: CovMatrix2, n: int, size: int | None = None) -> np.ndarray:
    """Draw ``n`` rows ``mu + L z``; with ``size`` returns a ``(size, n, 2)`` stack."""
    mu, L = _prep(mu, sigma, n)
    z = as_generator(rng).standard_normal(_shape(n, size))
    return mu + z @ L.T


def sample_bvt(rng, mu, sigma: CovMatrix2, nu: float, n: int, size: int | None = None) -> np.ndarray:
    """Bivariate t rows: one chi-square divisor shared by both coordinates of a row."""
    if not nu > 0:
        raise DomainError(f"degrees of freedom must be positive, got {nu}")
    mu, L = _prep(mu, sigma, n)
    gen = as_generator(rng)
    z = gen.standard_normal(_shape(n, size))
    c = gen.chisquare(nu, _shape(n, size)[:-1])
    return mu + (z @ L.T) / np.sqrt(c / nu)[..., None]


def sample_bvlognormal(rng, mu, sigma: CovMatrix2, n: int, size: int | None = None) -> np.ndarray:
    return np.exp(sample_bvnormal(rng, mu, sigma, n, size))


def bartlett_draws(gen: np.random.Generator, df: int, size):
    """Return ``(v, w, nn)`` with ``v**2 ~ chi2(df)``, ``w**2 ~ chi2(df - 1)``, ``nn ~ N(0, 1)``."""
    v = np.sqrt(gen.chisquare(df, size))
    w = np.sqrt(gen.chisquare(df - 1, size))
    nn = gen.standard_normal(size)
    return v, w, nn


def sample_wishart2(rng, df: int, scale: CovMatrix2, size: int | None = None):
    """Bartlett-decomposition draw from W(df, scale).

    Returns a :class:`CovMatrix2` for a single draw, otherwise a tuple of
    arrays ``(w11, w22, w12)`` of length ``size``.
    """
    if df < 2:
        raise DomainError(f"Wishart needs df >= 2, got {df}")
    Ls = scale.cholesky()
    v, w, nn = bartlett_draws(as_generator(rng), df, size)
    # C = [[v, 0], [nn, w]];  W = (Ls C)(Ls C)'
    m11 = Ls.l11 * v
    m21 = Ls.l21 * v + Ls.l22 * nn
    m22 = Ls.l22 * w
    w11 = m11 * m11
    w12 = m11 * m21
    w22 = m21 * m21 + m22 * m22
    if size is None:
        return CovMatrix2(float(w11), float(w22), float(w12))
    return w11, w22, w12
