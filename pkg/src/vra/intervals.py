"""Closed real intervals, the common currency for feasibility sets.

Endpoints may be infinite. The empty interval is a distinguished value so
that set algebra (intersection, affine images) propagates infeasibility
without special-casing at every call site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    empty: bool = False

    def __post_init__(self):
        if not self.empty and self.lo > self.hi:
            raise ValueError(f"invalid interval: lo={self.lo} > hi={self.hi}")

    @staticmethod
    def empty_set() -> "Interval":
        return Interval(math.nan, math.nan, empty=True)

    @staticmethod
    def singleton(x: float) -> "Interval":
        return Interval(x, x)

    @staticmethod
    def full() -> "Interval":
        return Interval(-math.inf, math.inf)

    @property
    def width(self) -> float:
        return 0.0 if self.empty else self.hi - self.lo

    def contains(self, x: float, tol: float = 0.0) -> bool:
        if self.empty:
            return False
        return self.lo - tol <= x <= self.hi + tol

    def contains_interval(self, other: "Interval") -> bool:
        if other.empty:
            return True
        if self.empty:
            return False
        return self.lo <= other.lo and other.hi <= self.hi

    def intersect(self, other: "Interval") -> "Interval":
        if self.empty or other.empty:
            return Interval.empty_set()
        lo = max(self.lo, other.lo)
        hi = min(self.hi, other.hi)
        if lo > hi:
            return Interval.empty_set()
        return Interval(lo, hi)

    def scale_shift(self, a: float, b: float) -> "Interval":
        """Exact affine image {a*x + b : x in self}."""
        if self.empty:
            return Interval.empty_set()
        p, q = a * self.lo + b, a * self.hi + b
        return Interval(p, q) if p <= q else Interval(q, p)

    def clamp_to(self, lo: float, hi: float) -> "Interval":
        return self.intersect(Interval(lo, hi))

    def clip(self, x: float) -> float:
        """Nearest point of the interval; raises on the empty set."""
        if self.empty:
            raise ValueError("cannot clip into an empty interval")
        return min(max(x, self.lo), self.hi)


def clip_to_interval(x: float, iv: Interval) -> float:
    """min(max(x, lo), hi); errors on an empty interval."""
    return iv.clip(x)
