"""Standard-gamble recovery of a utility from a preference oracle.

Normalize û(x*) = 1 and û(y*) = 0 for anchors with δ_{x*} ≻ δ_{y*}.  Each
outcome then falls in one of three cases:

* δ_{x*} ≿ δ_x ≿ δ_{y*}: find t with δ_x ∼ t δ_{x*} + (1-t) δ_{y*}; û(x) = t.
* δ_x ≻ δ_{x*}: find s with δ_{x*} ∼ s δ_x + (1-s) δ_{y*}; û(x) = 1/s.
* δ_{y*} ≻ δ_x: find r with δ_{y*} ∼ r δ_x + (1-r) δ_{x*}; û(x) = -r/(1-r).

Each mixture weight is found by bisection over exact dyadic rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import CalibrationError, DomainError, NoFitError
from .lottery import SimpleLottery, dirac, mix
from .preference import PreferenceOracle, Verdict
from .space import as_region
from .utility import UtilityFunction, expectation, table

DEFAULT_TOL = 1e-10
ITERATION_CAP = 64
_PROBES = tuple(Fraction(k, 8) for k in range(9))


@dataclass
class CalibrationResult:
    anchors: Optional[tuple]
    table: dict
    tolerance: float
    iterations_used: dict = field(default_factory=dict)
    cases: dict = field(default_factory=dict)
    verification: dict = field(default_factory=dict)

    @property
    def constant_flag(self) -> bool:
        return self.anchors is None

    def utility(self) -> UtilityFunction:
        if self.constant_flag:
            raise DomainError("a constant calibration has no table to interpolate")
        xs = sorted(self.table)
        return table(xs, [self.table[x] for x in xs])

    def to_json(self) -> dict:
        pts = [{"x": float(x), "u": float(self.table[x])} for x in sorted(self.table)]
        return {
            "anchors": None if self.anchors is None else
            {"x_star": float(self.anchors[0]), "y_star": float(self.anchors[1])},
            "constant": self.constant_flag,
            "points": pts,
            "tolerance": self.tolerance,
            "iterations_used": [{"x": float(x), "n": int(self.iterations_used[x])}
                                for x in sorted(self.iterations_used)],
            "verification": self.verification,
        }


def pick_anchors(o: PreferenceOracle, candidates: Sequence):
    """(x*, y*) = most and least preferred candidate Diracs, or None if all
    candidates are mutually indifferent."""
    cands = list(candidates)
    if not cands:
        raise DomainError("need at least one candidate outcome")
    scope = as_region(o.scope)
    for x in cands:
        if x not in scope:
            raise DomainError(f"candidate {x!r} is outside the oracle scope {scope}")
    best = worst = cands[0]
    for x in cands[1:]:
        if o.compare(dirac(x), dirac(best)) is Verdict.FIRST_STRICT:
            best = x
        if o.compare(dirac(x), dirac(worst)) is Verdict.SECOND_STRICT:
            worst = x
    if o.compare(dirac(best), dirac(worst)) is not Verdict.FIRST_STRICT:
        return None
    return best, worst


def _bisect(o: PreferenceOracle, target, make, tol: float, cap: int):
    """Find w in [0, 1] with make(w) ∼ target, given make(0) ≺ target ≺ make(1).

    Returns (w, iterations).  The verdict along w must be monotone; a
    coarse probe checks that before bisecting.
    """
    seen = [o.compare(make(w), target) for w in _PROBES]
    order = {Verdict.SECOND_STRICT: 0, Verdict.INDIFFERENT: 1, Verdict.FIRST_STRICT: 2}
    ranks = [order[v] for v in seen]
    if any(b < a for a, b in zip(ranks, ranks[1:])):
        bad = next(i for i, (a, b) in enumerate(zip(ranks, ranks[1:])) if b < a)
        raise CalibrationError(
            f"verdicts along the mixture segment are not monotone between t={_PROBES[bad]} and "
            f"t={_PROBES[bad + 1]} ({seen[bad].value} then {seen[bad + 1].value}); "
            "the oracle violates independence")
    lo, hi = Fraction(0), Fraction(1)
    for w, v in zip(_PROBES, seen):
        if v is Verdict.INDIFFERENT:
            return w, 0
        if v is Verdict.SECOND_STRICT:
            lo = w
        elif hi == 1 or w < hi:
            hi = w
            break
    it = 0
    while hi - lo >= tol:
        if it >= cap:
            raise CalibrationError(
                f"no indifference point within {cap} bisection steps (bracket [{float(lo)}, {float(hi)}]); "
                "the oracle may fail segmental continuity")
        it += 1
        mid = (lo + hi) / 2
        v = o.compare(make(mid), target)
        if v is Verdict.INDIFFERENT:
            return mid, it
        if v is Verdict.FIRST_STRICT:
            hi = mid
        else:
            lo = mid
    return (lo + hi) / 2, it


def calibrate_point_detail(o: PreferenceOracle, x, x_star, y_star, tol: float = DEFAULT_TOL,
                           cap: int = ITERATION_CAP):
    """Like :func:`calibrate_point` but also returns (case, iterations)."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    dx, dxs, dys = dirac(x), dirac(x_star), dirac(y_star)
    if o.compare(dxs, dys) is not Verdict.FIRST_STRICT:
        raise DomainError(f"anchors need δ_{x_star} ≻ δ_{y_star}")
    top = o.compare(dxs, dx)
    bottom = o.compare(dx, dys)
    if top is not Verdict.SECOND_STRICT and bottom is not Verdict.SECOND_STRICT:
        t, it = _bisect(o, dx, lambda w: mix(w, dxs, dys), tol, cap)
        return float(t), "inside", it
    if top is Verdict.SECOND_STRICT:
        s, it = _bisect(o, dxs, lambda w: mix(w, dx, dys), tol, cap)
        if s == 0:
            raise CalibrationError(f"indifference weight collapsed to 0 at x={x}")
        return float(1 / s), "above", it
    # δ_{y*} ≻ δ_x: r is the weight on x*, the mix improves as r grows
    r, it = _bisect(o, dys, lambda w: mix(1 - w, dx, dxs), tol, cap)
    if r == 1:
        raise CalibrationError(f"indifference weight collapsed to 1 at x={x}")
    return float(-r / (1 - r)), "below", it


def calibrate_point(o: PreferenceOracle, x, x_star, y_star, tol: float = DEFAULT_TOL) -> float:
    """û(x) under the normalization û(x*) = 1, û(y*) = 0."""
    return calibrate_point_detail(o, x, x_star, y_star, tol)[0]


def calibrate(o: PreferenceOracle, grid: Sequence, tol: float = DEFAULT_TOL, *,
              anchors: Optional[tuple] = None, candidates: Optional[Sequence] = None,
              verify_pairs: int = 200, seed: int = 0) -> CalibrationResult:
    """Calibrate every grid point, then spot-check that the interpolated
    table orders random lotteries on the grid the way the oracle does."""
    grid = list(grid)
    scope = as_region(o.scope)
    for x in grid:
        if x not in scope:
            raise DomainError(f"grid point {x!r} is outside the oracle scope {scope}")
    if anchors is None:
        anchors = pick_anchors(o, candidates if candidates is not None else grid)
        if anchors is None:
            return CalibrationResult(None, {}, tol, verification={"pairs": 0, "mismatches": 0})
    x_star, y_star = anchors
    result = CalibrationResult((x_star, y_star), {}, tol)
    for x in grid:
        if x == x_star:
            val, case, it = 1.0, "anchor", 0
        elif x == y_star:
            val, case, it = 0.0, "anchor", 0
        else:
            val, case, it = calibrate_point_detail(o, x, x_star, y_star, tol)
        result.table[x] = val
        result.cases[x] = case
        result.iterations_used[x] = it
    if verify_pairs and len(grid) >= 2:
        result.verification = _verify(o, result, grid, verify_pairs, seed)
    return result


def _verify(o, result, grid, pairs, seed):
    # disagreements only count when the table's margin exceeds its own error
    u_hat = result.utility()
    span = max(abs(v) for v in result.table.values()) + 1.0
    margin = 64 * result.tolerance * span * span
    rng = np.random.default_rng(seed)
    pts = sorted(grid)
    mismatches = []
    for _ in range(pairs):
        P = _grid_lottery(rng, pts)
        Q = _grid_lottery(rng, pts)
        d = expectation(P, u_hat) - expectation(Q, u_hat)
        if abs(d) <= margin:
            continue
        want = Verdict.FIRST_STRICT if d > 0 else Verdict.SECOND_STRICT
        got = o.compare(P, Q)
        if got is not want:
            mismatches.append({"P": P.to_json(), "Q": Q.to_json(), "oracle": got.value, "table": want.value})
    return {"pairs": pairs, "mismatches": len(mismatches), "examples": mismatches[:5]}


def _grid_lottery(rng, pts):
    k = int(rng.integers(1, min(5, len(pts)) + 1))
    idx = rng.choice(len(pts), size=k, replace=False)
    w = rng.dirichlet(np.ones(k))
    counts = np.maximum(np.floor(w * 65536).astype(np.int64), 1)
    counts[int(np.argmax(counts))] += 65536 - int(counts.sum())
    return SimpleLottery([(pts[i], Fraction(int(c), 65536)) for i, c in zip(idx, counts)])


def affine_match(u1, u2, grid: Sequence):
    """Least-squares fit u1 ≈ a*u2 + b on the grid.

    Returns (a, b, residual) with residual the max absolute deviation.
    Accepts utilities or calibration results.
    """
    xs = list(grid)
    if len(xs) < 3:
        raise DomainError("affine_match needs at least 3 grid points")
    v1 = _values(u1, xs)
    v2 = _values(u2, xs)
    c1, c2 = v1 - v1.mean(), v2 - v2.mean()
    s22 = float(c2 @ c2)
    if s22 == 0 or np.ptp(v2) == 0:
        if np.ptp(v1) != 0:
            raise NoFitError("u2 is constant on the grid while u1 is not")
        b = float(v1.mean() - v2.mean())
        return 1.0, b, float(np.max(np.abs(v1 - v2 - b)))
    a = float(c1 @ c2) / s22
    b = float(v1.mean() - a * v2.mean())
    resid = float(np.max(np.abs(v1 - (a * v2 + b))))
    return a, b, resid


def _values(u, xs) -> np.ndarray:
    if isinstance(u, CalibrationResult):
        if u.constant_flag:
            return np.zeros(len(xs))
        missing = [x for x in xs if x not in u.table]
        if missing:
            return u.utility().values(np.asarray(xs, dtype=float))
        return np.asarray([u.table[x] for x in xs], dtype=float)
    return np.asarray([u(x) for x in xs], dtype=float)


def parse_grid(spec: str) -> list[float]:
    """``lin:N:[a,b]`` or ``log:N:[a,b]`` (N >= 1 points, endpoints included)."""
    try:
        kind, n, rng = spec.split(":", 2)
        n = int(n)
        a, b = (float(v) for v in rng.strip()[1:-1].split(","))
    except ValueError as exc:
        raise DomainError(f"cannot parse grid spec {spec!r}; use lin:N:[a,b] or log:N:[a,b]") from exc
    if n < 1:
        raise DomainError("grid needs at least one point")
    if kind == "lin":
        pts = np.linspace(a, b, n)
    elif kind == "log":
        if not (a > 0 and b > 0):
            raise DomainError("log grids need positive endpoints")
        pts = np.exp(np.linspace(math.log(a), math.log(b), n))
        pts[0], pts[-1] = a, b
    else:
        raise DomainError(f"unknown grid kind {kind!r}")
    return [float(x) for x in pts]
