"""Closed exhaustions (X_n) of an outcome space.

The utility-driven construction takes X_n = u^{-1}([-n, n]) and
Y_n = u^{-1}(]-n - 1/2, n + 1/2[) for a continuous u.  Preimages are
computed piece by piece from the utility's monotone pieces, so levels are
finite unions of intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import BudgetError, DomainError, InapplicableError
from .lottery import DensityMeasure, SimpleLottery
from .space import Interval, OutcomeSpace, Region, as_region
from .utility import MonotonePiece, UtilityFunction


@dataclass(frozen=True)
class Exhaustion:
    """Levels X_0, X_1, ... (closed) with stored open sets Y_n between them."""

    space: OutcomeSpace
    levels: tuple
    interiors: tuple
    utility: Optional[UtilityFunction] = field(default=None, repr=False)
    label: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(as_region(r) for r in self.levels))
        object.__setattr__(self, "interiors", tuple(as_region(r) for r in self.interiors))
        if len(self.levels) != len(self.interiors):
            raise DomainError("levels and interiors must have equal length")

    def __len__(self):
        return len(self.levels)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "space": self.space.to_json(),
            "levels": [{"n": n, "X": X.to_json(), "Y": Y.to_json()}
                       for n, (X, Y) in enumerate(zip(self.levels, self.interiors))],
        }


def _piece_preimage(p: MonotonePiece, lo: float, hi: float, closed: bool) -> Interval:
    """Preimage of [lo, hi] (``closed``) or ]lo, hi[ under one monotone piece."""
    D = p.domain
    empty = Interval(1.0, 0.0)
    if lo > hi or (lo == hi and not closed) or hi < p.image_lower or lo > p.image_upper:
        return empty
    # an image bound is attained only at a closed end of the piece's domain
    low_attained = D.lower_closed if p.increasing else D.upper_closed
    high_attained = D.upper_closed if p.increasing else D.lower_closed
    if hi == p.image_lower and not (closed and low_attained):
        return empty
    if lo == p.image_upper and not (closed and high_attained):
        return empty

    def end(y, at_low_image):
        # x-endpoint for image bound y; the piece's domain end when y
        # reaches past the image (open targets exclude an attained end)
        if at_low_image:
            beyond = y < p.image_lower or (closed and y == p.image_lower)
            edge = y == p.image_lower
        else:
            beyond = y > p.image_upper or (closed and y == p.image_upper)
            edge = y == p.image_upper
        x_low_end = at_low_image == p.increasing
        dom_end = (D.lower, D.lower_closed) if x_low_end else (D.upper, D.upper_closed)
        if beyond:
            return dom_end
        if edge:  # open target at the image bound
            return dom_end[0], False
        return p.inverse(y), closed

    if p.increasing:
        (a, ac), (b, bc) = end(lo, True), end(hi, False)
    else:
        (a, ac), (b, bc) = end(hi, False), end(lo, True)
    return Interval(a, b, ac, bc).intersect(D)


def preimage(u: UtilityFunction, lo: float, hi: float, closed: bool = True) -> Region:
    if not u.pieces:
        raise InapplicableError(f"{u.kind} has no monotone pieces to invert")
    return Region(tuple(_piece_preimage(p, lo, hi, closed) for p in u.pieces))


def theorem1_exhaustion(u: UtilityFunction, n_max: int) -> Exhaustion:
    """X_n = u^{-1}([-n, n]), Y_n = u^{-1}(]-n-1/2, n+1/2[), n = 0..n_max."""
    if not u.declared_continuous:
        raise InapplicableError(f"{u.kind} is not continuous")
    if not u.pieces or len(u.pieces) > 2:
        raise InapplicableError(f"{u.kind} is not invertible by at most two monotone pieces")
    if n_max < 0:
        raise DomainError("n_max must be nonnegative")
    levels = tuple(preimage(u, -n, n, True) for n in range(n_max + 1))
    interiors = tuple(preimage(u, -n - 0.5, n + 0.5, False) for n in range(n_max + 1))
    return Exhaustion(u.domain, levels, interiors, u, f"u^-1([-n,n]) for {u.kind}")


def trivial_exhaustion(space: OutcomeSpace, n_max: int = 0) -> Exhaustion:
    """X_n = Y_n = X for every n (X is clopen in itself)."""
    whole = Region.of(space)
    return Exhaustion(space, (whole,) * (n_max + 1), (whole,) * (n_max + 1), None, "trivial")


@dataclass
class ExhaustionReport:
    closed: bool = True
    nested: bool = True
    covered: bool = True
    coverage_mode: str = "sampled"
    failure: Optional[dict] = None
    probes: int = 0
    levels: int = 0

    @property
    def ok(self) -> bool:
        return self.closed and self.nested and self.covered

    def to_json(self) -> dict:
        return {"ok": self.ok, "closed": self.closed, "nested": self.nested, "covered": self.covered,
                "coverage_mode": self.coverage_mode, "failure": self.failure,
                "probes": self.probes, "levels": self.levels}


def _witness_not_subset(A: Region, B: Region):
    """A point of A outside B (endpoints first, then midpoints)."""
    for p in A.pieces:
        cands = []
        if p.lower_closed:
            cands.append(p.lower)
        if p.upper_closed:
            cands.append(p.upper)
        if math.isfinite(p.lower) and math.isfinite(p.upper):
            cands.append((p.lower + p.upper) / 2)
        for x in cands:
            if x not in B:
                return x
        for q in B.pieces:
            if not p.issubset(q) and p.lower == q.lower and p.lower_closed and not q.lower_closed:
                return p.lower
    return None


def verify_exhaustion(exh: Exhaustion, space: Optional[OutcomeSpace] = None,
                      probe_grid: Sequence = ()) -> ExhaustionReport:
    """Check closedness, nesting in interiors, and coverage of probes.

    Records the first failing condition with a witness.
    """
    space = space or exh.space
    rep = ExhaustionReport(probes=len(probe_grid), levels=len(exh))

    def fail(cond, level, witness, detail):
        if rep.failure is None:
            rep.failure = {"condition": cond, "level": level,
                           "witness": None if witness is None else float(witness), "detail": detail}

    for n, (X, Y) in enumerate(zip(exh.levels, exh.interiors)):
        if not X.issubset(space):
            rep.closed = False
            fail("closed", n, _witness_not_subset(X, as_region(space)), f"X_{n} leaves the space")
        if not X.is_closed_in(space):
            rep.closed = False
            bad = next(p for p in X.pieces if not p.is_closed_in(space))
            w = bad.lower if not bad.lower_closed and math.isfinite(bad.lower) else bad.upper
            fail("closed", n, w, f"X_{n} = {X} is not closed in {space}")
        if not Y.is_open_in(space):
            rep.nested = False
            fail("nested", n, None, f"Y_{n} = {Y} is not open in {space}")
        if not X.issubset(Y):
            rep.nested = False
            fail("nested", n, _witness_not_subset(X, Y), f"X_{n} = {X} is not inside Y_{n} = {Y}")
        if n + 1 < len(exh):
            X_next = exh.levels[n + 1]
            if not Y.issubset(X_next):
                rep.nested = False
                fail("nested", n, _witness_not_subset(Y, X_next), f"Y_{n} = {Y} is not inside X_{n + 1}")
            interior = X_next.interior_in(space)
            if not X.issubset(interior):
                rep.nested = False
                fail("nested", n, _witness_not_subset(X, interior),
                     f"X_{n} = {X} is not inside the interior {interior} of X_{n + 1}")
    for x in probe_grid:
        if x not in space:
            continue
        if not any(x in X for X in exh.levels):
            rep.covered = False
            fail("covered", None, x, f"probe {x} lies in no level")
            break
    if rep.covered and exh.utility is not None and exh.label.startswith("u^-1"):
        # every real value u(x) lies in some [-n, n]
        rep.coverage_mode = "sampled+analytic"
    elif rep.covered and exh.levels and exh.levels[-1].issubset(space) and as_region(space).issubset(exh.levels[-1]):
        rep.coverage_mode = "sampled+analytic"
    return rep


def cover_index(exh: Exhaustion, P) -> int:
    """Least n whose stored open set Y_n contains the support of P."""
    if isinstance(P, SimpleLottery):
        pts = list(P.atoms)
        for n, Y in enumerate(exh.interiors):
            if all(x in Y for x in pts):
                return n
        worst = next((x for x in pts if x not in exh.interiors[-1]), pts[-1]) if exh.interiors else pts[0]
        raise BudgetError(f"no level among {len(exh)} covers the support; {worst!r} is outside", worst)
    if isinstance(P, DensityMeasure):
        C = Region.of(Interval.closed(*P.carrier))
        for n, Y in enumerate(exh.interiors):
            if C.issubset(Y):
                return n
        raise BudgetError(f"no level among {len(exh)} covers the carrier {P.carrier}", P.carrier)
    raise DomainError(f"cannot take the support of {type(P).__name__}")
