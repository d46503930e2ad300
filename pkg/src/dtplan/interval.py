"""Closed real intervals with outward-rounded endpoint arithmetic.

Every operation computes the floating point result together with its exact
rounding error (TwoSum / Dekker TwoProduct).  An endpoint is nudged by one ulp
only when the operation was inexact, so exact arithmetic (integers, dyadic
fractions, 0/1 flags) keeps point intervals as points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

_INF = math.inf
_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a: float, b: float) -> tuple[float, float]:
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a: float) -> tuple[float, float]:
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a: float, b: float) -> tuple[float, float]:
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def add_down(a: float, b: float) -> float:
    s, e = two_sum(a, b)
    return math.nextafter(s, -_INF) if e < 0 else s


def add_up(a: float, b: float) -> float:
    s, e = two_sum(a, b)
    return math.nextafter(s, _INF) if e > 0 else s


def mul_down(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    p, e = two_prod(a, b)
    return math.nextafter(p, -_INF) if e < 0 else p


def mul_up(a: float, b: float) -> float:
    if a == 0.0 or b == 0.0:
        return 0.0
    p, e = two_prod(a, b)
    return math.nextafter(p, _INF) if e > 0 else p


@dataclass(frozen=True, slots=True)
class Interval:
    """Closed interval ``[lo, hi]`` with ``lo <= hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        lo, hi = float(self.lo), float(self.hi)
        if math.isnan(lo) or math.isnan(hi):
            raise ValueError("interval endpoints must not be NaN")
        if lo > hi:
            raise ValueError(f"malformed interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: float) -> Interval:
        return cls(x, x)

    @classmethod
    def coerce(cls, x) -> Interval:
        """Accept an Interval, a number, or a ``(lo, hi)`` pair."""
        if isinstance(x, Interval):
            return x
        if isinstance(x, (int, float)):
            return cls(x, x)
        lo, hi = x
        return cls(lo, hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, other, tol: float = 0.0) -> bool:
        if isinstance(other, Interval):
            return self.lo - tol <= other.lo and other.hi <= self.hi + tol
        return self.lo - tol <= other <= self.hi + tol

    def __contains__(self, other) -> bool:
        return self.contains(other)

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __add__(self, other) -> Interval:
        o = Interval.coerce(other)
        return Interval(add_down(self.lo, o.lo), add_up(self.hi, o.hi))

    __radd__ = __add__

    def __sub__(self, other) -> Interval:
        o = Interval.coerce(other)
        return Interval(add_down(self.lo, -o.hi), add_up(self.hi, -o.lo))

    def __rsub__(self, other) -> Interval:
        return Interval.coerce(other) - self

    def __mul__(self, other) -> Interval:
        o = Interval.coerce(other)
        a, b, c, d = self.lo, self.hi, o.lo, o.hi
        lo = min(mul_down(a, c), mul_down(a, d), mul_down(b, c), mul_down(b, d))
        hi = max(mul_up(a, c), mul_up(a, d), mul_up(b, c), mul_up(b, d))
        return Interval(lo, hi)

    __rmul__ = __mul__

    def scale(self, k: float) -> Interval:
        return self * Interval(k, k)

    def hull(self, other) -> Interval:
        o = Interval.coerce(other)
        return Interval(min(self.lo, o.lo), max(self.hi, o.hi))

    def intersect(self, other) -> Interval | None:
        """Intersection, or ``None`` when the intervals are disjoint."""
        o = Interval.coerce(other)
        lo, hi = max(self.lo, o.lo), min(self.hi, o.hi)
        if lo > hi:
            return None
        return Interval(lo, hi)

    def isclose(self, other, tol: float = 1e-9) -> bool:
        o = Interval.coerce(other)
        return abs(self.lo - o.lo) <= tol and abs(self.hi - o.hi) <= tol


ZERO = Interval(0.0, 0.0)
ONE = Interval(1.0, 1.0)
UNIT = Interval(0.0, 1.0)


def hull_all(items: Iterable[Interval]) -> Interval:
    items = list(items)
    if not items:
        raise ValueError("hull of an empty collection")
    return Interval(min(i.lo for i in items), max(i.hi for i in items))


def add(a: Interval, b: Interval) -> Interval:
    return a + b


def sub(a: Interval, b: Interval) -> Interval:
    return a - b


def mul(a: Interval, b: Interval) -> Interval:
    return a * b


def scale(a: Interval, k: float) -> Interval:
    return a.scale(k)


def hull(a: Interval, b: Interval) -> Interval:
    return a.hull(b)


def intersect(a: Interval, b: Interval) -> Interval | None:
    return a.intersect(b)
