"""Sufficient statistics of paired data.

A data set is an ``(n, 2)`` float array; a stack of replicates is an
``(reps, n, 2)`` array. :func:`suff_stats` accepts either and returns a
:class:`SuffStats` whose fields are floats or arrays accordingly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import DegenerateDataError, DomainError

Real = Union[float, np.ndarray]

NEAR_ONE = 1.0 - 1e-12


def as_dataset(rows) -> np.ndarray:
    """Validate paired observations and return them as an ``(n, 2)`` array."""
    data = np.asarray(rows, dtype=float)
    if data.ndim != 2 or data.shape[1] != 2:
        raise DomainError(f"expected rows of (x1, x2) pairs, got shape {data.shape}")
    if data.shape[0] < 2:
        raise DomainError(f"need at least 2 rows, got {data.shape[0]}")
    if not np.all(np.isfinite(data)):
        raise DomainError("data contain non-finite values")
    return data


@dataclass(frozen=True)
class SuffStats:
    n: int
    mean1: Real
    mean2: Real
    s1sq: Real  # divisor n
    s2sq: Real
    s12: Real
    r: Real
    b: Real
    dplus: Real
    dminus: Real

    @property
    def a11(self) -> Real:
        return self.n * self.s1sq

    @property
    def a22(self) -> Real:
        return self.n * self.s2sq

    @property
    def a12(self) -> Real:
        return self.n * self.s12

    @property
    def near_one(self):
        """True where |r| is too close to 1 for atanh-based methods."""
        return np.abs(self.r) >= NEAR_ONE


def suff_stats(data) -> SuffStats:
    """One validated pass of two-pass moments over a data set or a stack of them."""
    data = np.asarray(data, dtype=float)
    if data.ndim == 2:
        data = as_dataset(data)
    elif data.ndim != 3 or data.shape[-1] != 2:
        raise DomainError(f"expected (n, 2) or (reps, n, 2) data, got {data.shape}")
    n = data.shape[-2]
    if n < 2:
        raise DomainError(f"need n >= 2, got {n}")
    means = data.mean(axis=-2)
    dev = data - means[..., None, :]
    s1sq = np.mean(dev[..., 0] ** 2, axis=-1)
    s2sq = np.mean(dev[..., 1] ** 2, axis=-1)
    s12 = np.mean(dev[..., 0] * dev[..., 1], axis=-1)
    if np.any(s1sq <= 0) or np.any(s2sq <= 0):
        raise DegenerateDataError("zero variance in a coordinate")
    sd1, sd2 = np.sqrt(s1sq), np.sqrt(s2sq)
    r = np.clip(s12 / (sd1 * sd2), -1.0, 1.0)
    b = (s1sq + s2sq) / np.sqrt(4.0 * s1sq * s2sq)
    std1 = dev[..., 0] / sd1[..., None]
    std2 = dev[..., 1] / sd2[..., None]
    dplus = np.sum((std1 + std2) ** 2, axis=-1)
    dminus = np.sum((std1 - std2) ** 2, axis=-1)
    fields = (means[..., 0], means[..., 1], s1sq, s2sq, s12, r, b, dplus, dminus)
    if data.ndim == 2:
        fields = tuple(float(f) for f in fields)
    return SuffStats(n, *fields)


def stats_from_r(r: Real, n: int) -> SuffStats:
    """Standardized statistics (zero means, unit variances) with correlation ``r``.

    Every method except Muddapur's t interval sees the data only through
    ``r`` and ``n``, so this stands in for raw data when only those are known.
    """
    r = np.clip(np.asarray(r, dtype=float), -1.0, 1.0)
    one = np.ones_like(r)
    fields = (0 * one, 0 * one, one, one, r, r, one, 2 * n * (1 + r), 2 * n * (1 - r))
    if r.ndim == 0:
        fields = tuple(float(f) for f in fields)
    return SuffStats(n, *fields)


def dataset_with_r(r: float, n: int) -> np.ndarray:
    """A deterministic standardized data set whose sample correlation is exactly ``r``."""
    if n < 3:
        raise DomainError("need n >= 3 to place two orthogonal centered columns")
    t = np.arange(n, dtype=float)
    e1 = t - t.mean()
    e1 /= np.sqrt(np.mean(e1**2))
    u = (t - t.mean()) ** 2
    u -= u.mean()
    u -= np.mean(u * e1) * e1
    e2 = u / np.sqrt(np.mean(u**2))
    return np.column_stack([e1, r * e1 + np.sqrt(max(0.0, 1.0 - r * r)) * e2])


@dataclass(frozen=True)
class TransformedCorrelation:
    z: Real
    rtilde: Real


def transform(r: Real) -> TransformedCorrelation:
    """Fisher's z and the ratio ``r / sqrt(1 - r^2)``."""
    r = np.asarray(r, dtype=float)
    if np.any(np.abs(r) >= 1.0):
        raise DomainError("|r| = 1 has no finite transform")
    z = np.arctanh(r)
    rt = r / np.sqrt(1.0 - r * r)
    if r.ndim == 0:
        return TransformedCorrelation(float(z), float(rt))
    return TransformedCorrelation(z, rt)
