"""Shared types: method identifiers, interval records and error classes."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateDataError(ValueError):
    """The data cannot support the requested statistic (e.g. zero variance)."""


class NotApplicableError(ValueError):
    """The method is not defined for this sample size."""


class MethodFailure(ArithmeticError):
    """The method has no solution for this input (e.g. negative discriminant)."""


class NumericError(ArithmeticError):
    """A numerical routine failed to converge."""

    def __init__(self, message: str, partial: float | None = None):
        super().__init__(message)
        self.partial = partial


class MethodId(str, enum.Enum):
    EXACT = "Exact"
    FISHER_Z = "FisherZ"
    HOTELLING1 = "Hotelling1"
    HOTELLING2 = "Hotelling2"
    HOTELLING3 = "Hotelling3"
    HOTELLING4 = "Hotelling4"
    RUBEN = "Ruben"
    MUDDAPUR1 = "Muddapur1"
    MUDDAPUR2 = "Muddapur2"
    SIGNED_LR = "SignedLR"
    MODIFIED_SIGNED_LR = "ModifiedSignedLR"
    KRISHNAMOORTHY_GCI = "KrishnamoorthyGCI"
    WN1 = "WN1"
    WN2 = "WN2"
    HADDAD_PROVOST = "HaddadProvost"
    NEW_GCI = "NewGCI"
    PB = "PB"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "MethodId":
        key = name.strip().lower()
        for m in cls:
            if m.value.lower() == key or m.name.lower() == key:
                return m
        raise DomainError(f"unknown method {name!r}")

    @property
    def min_n(self) -> int:
        # mirrors the "---" cells of the robustness tables
        if self in (MethodId.EXACT, MethodId.FISHER_Z, MethodId.RUBEN):
            return 4
        return 3

    @property
    def is_monte_carlo(self) -> bool:
        return self in (MethodId.KRISHNAMOORTHY_GCI, MethodId.NEW_GCI, MethodId.PB)

    @property
    def is_expensive(self) -> bool:
        return self in (MethodId.EXACT, MethodId.SIGNED_LR, MethodId.MODIFIED_SIGNED_LR)


ALL_METHODS: tuple[MethodId, ...] = tuple(MethodId)


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    method: MethodId
    level: float
    clamped_lower: bool = False
    clamped_upper: bool = False

    def __post_init__(self):
        if not (-1.0 <= self.lower <= self.upper <= 1.0):
            raise DomainError(
                f"invalid interval ({self.lower}, {self.upper}) for {self.method}"
            )

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def check_n(n: int, method: MethodId) -> int:
    if int(n) != n:
        raise DomainError(f"sample size must be an integer, got {n}")
    if n < method.min_n:
        raise NotApplicableError(f"{method} needs n >= {method.min_n}, got n={n}")
    return int(n)
