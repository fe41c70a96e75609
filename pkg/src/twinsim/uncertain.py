"""Gaussian uncertain values with closed-form propagation.

An uncertain real is a Normal random variable written ``mean +/- std``.
Arithmetic follows first-order (GUM-style) propagation for independent
operands; comparisons return probabilities instead of booleans.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class UncertainReal:
    """A value with quantified standard uncertainty (Normal mean/std)."""

    mean: float
    std: float = 0.0

    def __post_init__(self) -> None:
        if self.std < 0.0:
            raise ValueError(f"std must be >= 0, got {self.std}")
        if not (math.isfinite(self.mean) and math.isfinite(self.std)):
            raise ValueError(f"non-finite uncertain value {self.mean}+/-{self.std}")

    def __add__(self, other: "UncertainReal | float") -> "UncertainReal":
        other = _coerce(other)
        return UncertainReal(self.mean + other.mean, math.hypot(self.std, other.std))

    __radd__ = __add__

    def __neg__(self) -> "UncertainReal":
        return UncertainReal(-self.mean, self.std)

    def __sub__(self, other: "UncertainReal | float") -> "UncertainReal":
        return self + (-_coerce(other))

    def __rsub__(self, other: "UncertainReal | float") -> "UncertainReal":
        return _coerce(other) + (-self)

    def __mul__(self, other: "UncertainReal | float") -> "UncertainReal":
        if isinstance(other, UncertainReal):
            return mul(self, other)
        return scale(float(other), self)

    __rmul__ = __mul__

    def __truediv__(self, other: "UncertainReal | float") -> "UncertainReal":
        if isinstance(other, UncertainReal):
            return div(self, other)
        return scale(1.0 / float(other), self)

    def __repr__(self) -> str:
        return f"{self.mean:g}+/-{self.std:g}"


@dataclass(frozen=True)
class UncertainBool:
    """A proposition with a probability of being true."""

    confidence: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0,1], got {self.confidence}")

    def __invert__(self) -> "UncertainBool":
        return UncertainBool(1.0 - self.confidence)


def _coerce(x: "UncertainReal | float") -> UncertainReal:
    return x if isinstance(x, UncertainReal) else UncertainReal(float(x))


def add(a: UncertainReal, b: UncertainReal) -> UncertainReal:
    """Sum of independent operands; stds combine in quadrature."""
    return UncertainReal(a.mean + b.mean, math.hypot(a.std, b.std))


def sub(a: UncertainReal, b: UncertainReal) -> UncertainReal:
    return add(a, -b)


def scale(k: float, a: UncertainReal) -> UncertainReal:
    return UncertainReal(k * a.mean, abs(k) * a.std)


def mul(a: UncertainReal, b: UncertainReal) -> UncertainReal:
    """Product of independent operands, first order in the stds."""
    std = math.hypot(b.mean * a.std, a.mean * b.std)
    return UncertainReal(a.mean * b.mean, std)


def div(a: UncertainReal, b: UncertainReal) -> UncertainReal:
    """First-order quotient; rejects a crisp-zero denominator mean."""
    if b.mean == 0.0:
        raise ZeroDivisionError("cannot divide by an uncertain value with mean 0")
    mean = a.mean / b.mean
    # algebraically |mean|*sqrt((sa/ma)^2+(sb/mb)^2), stable when a.mean == 0
    std = math.hypot(a.std / b.mean, a.mean * b.std / (b.mean * b.mean))
    return UncertainReal(mean, std)


def norm_cdf(x: float) -> float:
    """Standard Normal CDF via erf (abs error well below 1e-12)."""
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def lt_prob(a: UncertainReal, b: UncertainReal) -> UncertainBool:
    """P(A < B) for independent Normals.

    Both operands crisp: degenerates to the strict comparison of the means
    (equal crisp means give confidence 0).
    """
    spread = math.hypot(a.std, b.std)
    if spread == 0.0:
        return UncertainBool(1.0 if a.mean < b.mean else 0.0)
    return UncertainBool(norm_cdf((b.mean - a.mean) / spread))


def gt_prob(a: UncertainReal, b: UncertainReal) -> UncertainBool:
    return lt_prob(b, a)


def decide(p: UncertainBool, confidence_level: float) -> bool:
    """Threshold a probability at a confidence level (inclusive boundary)."""
    if not 0.0 < confidence_level < 1.0:
        raise ValueError(f"confidence_level must be in (0,1), got {confidence_level}")
    return p.confidence >= confidence_level


def eq_in_distribution(a: UncertainReal, b: UncertainReal, tol: float = 0.0) -> bool:
    """Equality in distribution: same mean and same std, within tol."""
    if tol < 0.0:
        raise ValueError(f"tol must be >= 0, got {tol}")
    return abs(a.mean - b.mean) <= tol and abs(a.std - b.std) <= tol
