"""Interval arithmetic.

Scalar operators work on :class:`Interval` values; the ``*_arr`` variants
apply the same operators element-wise to pairs of numpy arrays ``(lo, hi)``
and are what the predictor uses for batched propagation.  Both paths share
the same formulas, so results agree exactly.

Products come in two flavours.  ``"exact"`` (the default) returns the hull
of the four endpoint products.  ``"fidelity"`` evaluates the positive/negative
part decomposition with ``n(x) = max(-x, 0)``; it is sound but looser on
mixed-sign operands.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


class IntervalDomainError(ValueError):
    """Operator applied outside its domain (e.g. inverse of a non-positive interval)."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise ValueError(f"interval bounds must be finite, got [{lo}, {hi}]")
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, z: float) -> "Interval":
        return cls(z, z)

    @classmethod
    def hull(cls, values: Iterable[float]) -> "Interval":
        vals = list(values)
        return cls(min(vals), max(vals))

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, z: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= z <= self.hi + tol

    def encloses(self, other: "Interval", tol: float = 0.0) -> bool:
        return self.lo - tol <= other.lo and other.hi <= self.hi + tol

    def __add__(self, other):
        other = as_interval(other)
        return Interval(self.lo + other.lo, self.hi + other.hi)

    __radd__ = __add__

    def __sub__(self, other):
        return isub(self, as_interval(other))

    def __rsub__(self, other):
        return isub(as_interval(other), self)

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other):
        if isinstance(other, Interval):
            return imul(self, other)
        return scale(self, other)

    __rmul__ = __mul__

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __repr__(self):
        return f"[{self.lo:g}, {self.hi:g}]"


IntervalVector = Sequence[Interval]


def as_interval(z) -> Interval:
    if isinstance(z, Interval):
        return z
    return Interval(z, z)


def scale(a: Interval, c: float) -> Interval:
    """``c * a`` for a scalar ``c`` (endpoints swap when ``c < 0``)."""
    lo, hi = c * a.lo, c * a.hi
    return Interval(min(lo, hi), max(lo, hi))


def offset(a: Interval, c: float) -> Interval:
    return Interval(a.lo + c, a.hi + c)


def iadd(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo + b.lo, a.hi + b.hi)


def isub(a: Interval, b: Interval) -> Interval:
    return Interval(a.lo - b.hi, a.hi - b.lo)


def imul(a: Interval, b: Interval, mode: str = "exact") -> Interval:
    lo, hi = mul_arr(a.lo, a.hi, b.lo, b.hi, mode)
    return Interval(float(lo), float(hi))


def icos(z: Interval) -> Interval:
    lo, hi = cos_arr(z.lo, z.hi)
    return Interval(float(lo), float(hi))


def isin(z: Interval) -> Interval:
    lo, hi = sin_arr(z.lo, z.hi)
    return Interval(float(lo), float(hi))


def iinv(z: Interval) -> Interval:
    if z.lo <= 0.0:
        raise IntervalDomainError(f"inverse needs a positive interval, got {z}")
    return Interval(1.0 / z.hi, 1.0 / z.lo)


def iapply_monotone(f: Callable[[float], float], z: Interval) -> Interval:
    """Image of ``z`` under ``f``, which the caller guarantees is increasing on ``z``."""
    return Interval(f(z.lo), f(z.hi))


def ineg_part(z: Interval) -> Interval:
    """Interval extension of ``min(x, 0)``."""
    return Interval(min(z.lo, 0.0), min(z.hi, 0.0))


def idot(u: IntervalVector, v: IntervalVector, mode: str = "exact") -> Interval:
    if len(u) != len(v):
        raise ValueError("interval vectors have different lengths")
    total = Interval(0.0, 0.0)
    for a, b in zip(u, v):
        total = iadd(total, imul(a, b, mode))
    return total


# -- array versions ---------------------------------------------------------


def _pos(x):
    return np.maximum(x, 0.0)


def _neg_mag(x):
    return np.maximum(-x, 0.0)


def mul_arr(alo, ahi, blo, bhi, mode: str = "exact"):
    if mode == "exact":
        p1, p2, p3, p4 = alo * blo, alo * bhi, ahi * blo, ahi * bhi
        lo = np.minimum(np.minimum(p1, p2), np.minimum(p3, p4))
        hi = np.maximum(np.maximum(p1, p2), np.maximum(p3, p4))
        return lo, hi
    if mode == "fidelity":
        p, n = _pos, _neg_mag
        lo = p(alo) * p(blo) - p(ahi) * n(blo) - n(alo) * p(bhi) + n(ahi) * n(bhi)
        hi = p(ahi) * p(bhi) - p(alo) * n(bhi) - n(ahi) * p(blo) + n(alo) * n(blo)
        return lo, hi
    raise ValueError(f"unknown product mode {mode!r}")


def _contains_point(lo, hi, phase):
    """Whether some ``phase + 2*pi*k`` lies in ``[lo, hi]``."""
    k = np.ceil((lo - phase) / TWO_PI)
    return phase + TWO_PI * k <= hi


def cos_arr(lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    clo, chi = np.cos(lo), np.cos(hi)
    wide = (hi - lo) >= TWO_PI
    has_min = wide | _contains_point(lo, hi, math.pi)
    has_max = wide | _contains_point(lo, hi, 0.0)
    out_lo = np.where(has_min, -1.0, np.minimum(clo, chi))
    out_hi = np.where(has_max, 1.0, np.maximum(clo, chi))
    return out_lo, out_hi


def sin_arr(lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    slo, shi = np.sin(lo), np.sin(hi)
    wide = (hi - lo) >= TWO_PI
    has_min = wide | _contains_point(lo, hi, -0.5 * math.pi)
    has_max = wide | _contains_point(lo, hi, 0.5 * math.pi)
    out_lo = np.where(has_min, -1.0, np.minimum(slo, shi))
    out_hi = np.where(has_max, 1.0, np.maximum(slo, shi))
    return out_lo, out_hi


def inv_arr(lo, hi):
    if np.any(np.asarray(lo) <= 0.0):
        raise IntervalDomainError("inverse needs a positive interval")
    return 1.0 / hi, 1.0 / lo


def neg_part_arr(lo, hi):
    return np.minimum(lo, 0.0), np.minimum(hi, 0.0)


def sub_arr(alo, ahi, blo, bhi):
    return alo - bhi, ahi - blo
