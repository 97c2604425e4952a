"""Intervals of the real line, finite unions of them, and outcome spaces."""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass
from typing import Iterable, Union

from .errors import DomainError, ValidationError

INF = math.inf


def is_real(x) -> bool:
    return isinstance(x, numbers.Real) and not isinstance(x, bool)


@dataclass(frozen=True)
class Interval:
    """An interval with independently open or closed ends.

    Degenerate (``[a, a]``) and empty intervals are allowed here; an
    :class:`OutcomeSpace` must have nonempty interior.
    """

    lower: float
    upper: float
    lower_closed: bool = True
    upper_closed: bool = True

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValidationError("interval endpoints must not be NaN")
        # infinite endpoints are never attained
        if self.lower == -INF and self.lower_closed:
            object.__setattr__(self, "lower_closed", False)
        if self.upper == INF and self.upper_closed:
            object.__setattr__(self, "upper_closed", False)

    @classmethod
    def closed(cls, a, b) -> Interval:
        return cls(a, b, True, True)

    @classmethod
    def open(cls, a, b) -> Interval:
        return cls(a, b, False, False)

    @property
    def is_empty(self) -> bool:
        if self.lower > self.upper:
            return True
        if self.lower == self.upper:
            return not (self.lower_closed and self.upper_closed)
        return False

    def __contains__(self, x) -> bool:
        if not is_real(x) or x != x:
            return False
        if x < self.lower or (x == self.lower and not self.lower_closed):
            return False
        if x > self.upper or (x == self.upper and not self.upper_closed):
            return False
        return True

    def contains(self, x) -> bool:
        return x in self

    def issubset(self, other: Interval) -> bool:
        if self.is_empty:
            return True
        if other.is_empty:
            return False
        if self.lower < other.lower:
            return False
        if self.lower == other.lower and self.lower_closed and not other.lower_closed:
            return False
        if self.upper > other.upper:
            return False
        if self.upper == other.upper and self.upper_closed and not other.upper_closed:
            return False
        return True

    def intersect(self, other: Interval) -> Interval:
        if self.lower > other.lower:
            lo, lc = self.lower, self.lower_closed
        elif self.lower < other.lower:
            lo, lc = other.lower, other.lower_closed
        else:
            lo, lc = self.lower, self.lower_closed and other.lower_closed
        if self.upper < other.upper:
            hi, hc = self.upper, self.upper_closed
        elif self.upper > other.upper:
            hi, hc = other.upper, other.upper_closed
        else:
            hi, hc = self.upper, self.upper_closed and other.upper_closed
        return Interval(lo, hi, lc, hc)

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    @property
    def is_compact(self) -> bool:
        return self.is_empty or (self.is_bounded and self.lower_closed and self.upper_closed)

    def is_closed_in(self, space: Interval) -> bool:
        """Closedness relative to the subspace topology of ``space``."""
        if self.is_empty:
            return True
        lower_ok = self.lower_closed or (self.lower == space.lower and not space.lower_closed)
        upper_ok = self.upper_closed or (self.upper == space.upper and not space.upper_closed)
        return lower_ok and upper_ok

    def is_open_in(self, space: Interval) -> bool:
        if self.is_empty:
            return True
        lower_ok = not self.lower_closed or (self.lower == space.lower and space.lower_closed)
        upper_ok = not self.upper_closed or (self.upper == space.upper and space.upper_closed)
        return lower_ok and upper_ok

    def interior_in(self, space: Interval) -> Interval:
        if self.is_empty:
            return self
        lc = self.lower_closed and self.lower == space.lower and space.lower_closed
        uc = self.upper_closed and self.upper == space.upper and space.upper_closed
        return Interval(self.lower, self.upper, lc, uc)

    def endpoints(self) -> list:
        return [e for e in (self.lower, self.upper) if math.isfinite(e)]

    def to_json(self) -> dict:
        return {
            "lower": _num_json(self.lower),
            "upper": _num_json(self.upper),
            "lower_closed": self.lower_closed,
            "upper_closed": self.upper_closed,
        }

    @classmethod
    def from_json(cls, d) -> Interval:
        return cls(_num_from_json(d["lower"]), _num_from_json(d["upper"]),
                   bool(d["lower_closed"]), bool(d["upper_closed"]))

    def __str__(self):
        lb = "[" if self.lower_closed else "]"
        rb = "]" if self.upper_closed else "["
        return f"{lb}{self.lower:g}, {self.upper:g}{rb}"


class OutcomeSpace(Interval):
    """An interval of the real line with nonempty interior."""

    def __post_init__(self):
        super().__post_init__()
        if not self.lower < self.upper:
            raise ValidationError(f"outcome space needs lower < upper, got {self.lower}, {self.upper}")

    @classmethod
    def from_interval(cls, iv: Interval) -> OutcomeSpace:
        return cls(iv.lower, iv.upper, iv.lower_closed, iv.upper_closed)

    def check(self, x):
        if x not in self:
            raise DomainError(f"outcome {x!r} is outside the outcome space {self}")
        return x


REAL_LINE = OutcomeSpace(-INF, INF, False, False)
POSITIVE_HALF_LINE = OutcomeSpace(0.0, INF, False, False)
NONNEGATIVE_HALF_LINE = OutcomeSpace(0.0, INF, True, False)


@dataclass(frozen=True)
class Region:
    """A finite union of intervals, kept as disjoint sorted components."""

    pieces: tuple

    def __post_init__(self):
        object.__setattr__(self, "pieces", _merge(self.pieces))

    @classmethod
    def of(cls, *intervals: Interval) -> Region:
        return cls(tuple(intervals))

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    def __contains__(self, x) -> bool:
        return any(x in p for p in self.pieces)

    def contains(self, x) -> bool:
        return x in self

    def issubset(self, other: RegionLike) -> bool:
        other = as_region(other)
        # components of a merged union are maximal, so each connected piece
        # of self must sit inside a single component of other
        return all(any(p.issubset(q) for q in other.pieces) for p in self.pieces)

    def is_closed_in(self, space: Interval) -> bool:
        return all(p.is_closed_in(space) for p in self.pieces)

    def is_open_in(self, space: Interval) -> bool:
        return all(p.is_open_in(space) for p in self.pieces)

    def interior_in(self, space: Interval) -> Region:
        return Region(tuple(p.interior_in(space) for p in self.pieces))

    def endpoints(self) -> list:
        return [e for p in self.pieces for e in p.endpoints()]

    @property
    def lower(self):
        return self.pieces[0].lower if self.pieces else INF

    @property
    def upper(self):
        return self.pieces[-1].upper if self.pieces else -INF

    def to_json(self) -> list:
        return [p.to_json() for p in self.pieces]

    @classmethod
    def from_json(cls, data) -> Region:
        return cls(tuple(Interval.from_json(d) for d in data))

    def __str__(self):
        return " ∪ ".join(str(p) for p in self.pieces) if self.pieces else "∅"


RegionLike = Union[Interval, Region]


def as_region(r: RegionLike) -> Region:
    if isinstance(r, Region):
        return r
    return Region((r,))


def _touch(a: Interval, b: Interval) -> bool:
    """Whether sorted intervals a, b (a.lower <= b.lower) overlap or abut."""
    if b.lower < a.upper:
        return True
    if b.lower == a.upper:
        return a.upper_closed or b.lower_closed
    return False


def _merge(intervals: Iterable[Interval]) -> tuple:
    items = sorted((iv for iv in intervals if not iv.is_empty),
                   key=lambda iv: (iv.lower, not iv.lower_closed))
    out: list[Interval] = []
    for iv in items:
        if out and _touch(out[-1], iv):
            last = out[-1]
            if iv.upper > last.upper:
                hi, hc = iv.upper, iv.upper_closed
            elif iv.upper < last.upper:
                hi, hc = last.upper, last.upper_closed
            else:
                hi, hc = last.upper, last.upper_closed or iv.upper_closed
            out[-1] = Interval(last.lower, hi, last.lower_closed, hc)
        else:
            out.append(iv)
    return tuple(out)


def _num_json(x):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return float(x)


def _num_from_json(v):
    if isinstance(v, str):
        return float(v)
    return v


def parse_space(text: str) -> OutcomeSpace:
    """Parse ``"]0,inf["``-style interval notation (also accepts ``(`` / ``)``)."""
    s = text.strip()
    if len(s) < 5:
        raise DomainError(f"cannot parse interval {text!r}")
    lc = s[0] == "["
    uc = s[-1] == "]"
    if s[0] not in "[](" or s[-1] not in "[])":
        raise DomainError(f"cannot parse interval {text!r}")
    a, b = s[1:-1].split(",")
    return OutcomeSpace(float(a), float(b), lc, uc)
