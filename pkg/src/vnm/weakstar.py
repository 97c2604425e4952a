"""Finite stand-in for the weak* topology, and the counterexample nets.

Weak* convergence means convergence of E[v] for every bounded continuous
v.  Here a finite family of bounded Lipschitz functions plays the part
of C_b(X); the largest expectation gap over the family is a
bounded-Lipschitz (Dudley-type) pseudometric, which metrizes weak
convergence on compacts as the family is refined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np

from .errors import DomainError, InapplicableError, NetOverflowError
from .lottery import SimpleLottery, dirac, mix
from .space import Interval, as_region
from .utility import UtilityFunction, eval_utility


@dataclass(frozen=True)
class TestFunction:
    __test__ = False  # not a pytest class

    name: str
    fn: Callable  # vectorized over float arrays
    bound: float
    lipschitz: float


def _bump(c, L):
    return lambda x: np.maximum(0.0, 1.0 - L * np.abs(x - c))


def _ramp(c, L):
    return lambda x: np.clip(L * (x - c), -1.0, 1.0)


class TestFunctionFamily:
    """Bumps max(0, 1 - L|x - c|) and ramps clip(L(x - c), -1, 1) on a
    grid of centers, plus the constant 1.  Every member is bounded by 1
    and L-Lipschitz."""

    __test__ = False

    def __init__(self, centers: Sequence[float], lipschitz: float = 1.0,
                 extra: Sequence[TestFunction] = (), *, include_constant: bool = True):
        self.centers = np.asarray(sorted(float(c) for c in centers), dtype=float)
        self.lipschitz = float(lipschitz)
        if not self.lipschitz > 0:
            raise DomainError("Lipschitz constant must be positive")
        self.extra = tuple(extra)
        self.include_constant = include_constant
        self.bound = max([1.0] + [t.bound for t in self.extra])
        self.max_lipschitz = max([self.lipschitz] + [t.lipschitz for t in self.extra])

    @classmethod
    def default(cls, lower: float = -10.0, upper: float = 10.0, pitch: float = 0.25,
                lipschitz: float = 1.0) -> TestFunctionFamily:
        n = int(round((upper - lower) / pitch)) + 1
        return cls(np.linspace(lower, upper, n), lipschitz)

    @property
    def members(self) -> list[TestFunction]:
        L = self.lipschitz
        out = [TestFunction(f"bump@{c:g}", _bump(c, L), 1.0, L) for c in self.centers]
        out += [TestFunction(f"ramp@{c:g}", _ramp(c, L), 1.0, L) for c in self.centers]
        if self.include_constant:
            out.append(TestFunction("const", lambda x: np.ones_like(x), 1.0, 0.0))
        return out + list(self.extra)

    def __len__(self):
        return 2 * len(self.centers) + int(self.include_constant) + len(self.extra)

    def evaluate(self, xs) -> np.ndarray:
        """Member values at points, shape (members, points)."""
        xs = np.asarray(xs, dtype=float)
        d = xs[None, :] - self.centers[:, None]
        with np.errstate(invalid="ignore"):
            bumps = np.maximum(0.0, 1.0 - self.lipschitz * np.abs(d))
            ramps = np.clip(self.lipschitz * d, -1.0, 1.0)
        rows = [bumps, ramps]
        if self.include_constant:
            rows.append(np.ones((1, xs.size)))
        if self.extra:
            rows.append(np.stack([np.asarray(t.fn(xs), dtype=float) for t in self.extra]))
        return np.vstack(rows)

    def expectations(self, P) -> np.ndarray:
        xs, ws = P.points()
        return self.evaluate(xs) @ ws

    def describe(self) -> dict:
        pitch = float(np.min(np.diff(self.centers))) if len(self.centers) > 1 else None
        return {
            "members": len(self),
            "lipschitz": self.max_lipschitz,
            "bound": self.bound,
            "center_range": [float(self.centers[0]), float(self.centers[-1])] if len(self.centers) else None,
            "pitch": pitch,
        }


DEFAULT_FAMILY = TestFunctionFamily.default()


def dudley_distance(P, Q, family: Optional[TestFunctionFamily] = None) -> float:
    """max over the family of |E_P[v] - E_Q[v]|."""
    family = family or DEFAULT_FAMILY
    return float(np.max(np.abs(family.expectations(P) - family.expectations(Q))))


@dataclass
class ConvergenceReport:
    scores: list
    converged: bool
    eps: float
    tail: int
    family: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"scores": self.scores, "converged": self.converged, "eps": self.eps,
                "tail": self.tail, "family": self.family}


def convergence_scores(seq, P, family: Optional[TestFunctionFamily] = None) -> list[float]:
    family = family or DEFAULT_FAMILY
    target = family.expectations(P)
    return [float(np.max(np.abs(family.expectations(Pk) - target))) for Pk in seq]


def converges(seq, P, family: Optional[TestFunctionFamily] = None, eps: float = 1e-2,
              tail: int = 5) -> ConvergenceReport:
    """Converged iff the last ``tail`` scores are all below ``eps``."""
    seq = list(seq)
    if tail < 1 or len(seq) < tail:
        raise DomainError(f"need a prefix of length >= tail={tail}, got {len(seq)}")
    family = family or DEFAULT_FAMILY
    scores = convergence_scores(seq, P, family)
    ok = all(s < eps for s in scores[-tail:])
    return ConvergenceReport(scores, ok, eps, tail, family.describe())


# ---------------------------------------------------------------------------
# escaping-mass net (unbounded utility)


def _solve(u: UtilityFunction, target, *, extended: bool):
    """An outcome with u(x) == target on an increasing piece whose image
    reaches ``target``.  Returns None when the float inverse overflows and
    ``extended`` is off."""
    for piece in u.pieces:
        if not piece.image_lower < target < piece.image_upper:
            continue
        x = None
        try:
            x = piece.inverse(float(target))
        except OverflowError:
            x = None
        if x is not None and isinstance(x, float) and math.isfinite(x) and (x != 0 or target == 0):
            if x in piece.domain:
                return x
        if extended and piece.inverse_mp is not None:
            with mpmath.workdps(30):
                xm = piece.inverse_mp(mpmath.mpf(target))
            xm = mpmath.mpf(xm)
            if mpmath.isfinite(xm) and xm in piece.domain:
                return xm
        return None
    return None


def _target(u_star: float, delta: float, n: int) -> float:
    return u_star + (2.0 ** n + 1.0) * delta


def lemma5_net(u: UtilityFunction, x_star, x0, n: int, *, extended: bool = True) -> SimpleLottery:
    """P_n = (1 - 2^-n) δ_{x*} + 2^-n δ_{x_n} with u(x_n) = u(x*) + (2^n + 1)(u(x0) - u(x*)).

    Then u(x_n) exceeds u(x*) + 2^n (u(x0) - u(x*)) by one gap, so
    E_{P_n}[u] = u(x0) + 2^-n (u(x0) - u(x*)) > u(x0) while P_n → δ_{x*}.
    Outcomes past double range are returned as mpmath numbers unless
    ``extended`` is False, in which case NetOverflowError reports the
    largest buildable n.
    """
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a nonnegative integer, got {n!r}")
    n = int(n)
    if u.bounded_above or u.declared_bounded:
        raise InapplicableError(f"{u.kind} is bounded above; the escaping-mass net needs u unbounded above")
    if not u.pieces:
        raise InapplicableError(f"{u.kind} has no inverse to place x_n")
    u_star, u0 = eval_utility(u, x_star), eval_utility(u, x0)
    delta = u0 - u_star
    if not delta > 0:
        raise DomainError("need u(x0) > u(x*)")
    x_n = _solve(u, _target(u_star, delta, n), extended=extended)
    if x_n is None:
        lo, hi = -1, n
        while hi - lo > 1:  # largest feasible n by bisection on the index
            mid = (lo + hi) // 2
            if _solve(u, _target(u_star, delta, mid), extended=extended) is None:
                hi = mid
            else:
                lo = mid
        raise NetOverflowError(f"x_n for n={n} is not representable; largest feasible n is {lo}", lo)
    if not eval_utility(u, x_n) > u_star + 2.0 ** n * delta:
        raise NetOverflowError(f"u(x_n) lost the margin to rounding at n={n}", n - 1)
    w = Fraction(1, 2 ** n)
    return mix(w, dirac(x_n), dirac(x_star)) if w < 1 else dirac(x_n)


def lemma5_escape_outcome(P: SimpleLottery) -> object:
    """The escaping atom x_n of a net element (its largest outcome)."""
    return P.max_outcome()


# ---------------------------------------------------------------------------
# semicontinuity net (jump utility)


@dataclass(frozen=True)
class SemicontinuityNet:
    """Outcomes x_k → x with a persistent utility gap, and a blend P.

    For an upper jump: δ_{x_k} ≻ P for all k, P ≻ δ_x, δ_{x_k} → δ_x.
    For a lower jump the inequalities reverse.
    """

    x: float
    outcomes: tuple
    blend: SimpleLottery
    t: Fraction
    kind: str

    def sequences(self):
        """(A_k, B_k, A, B) with A_k ≿ B_k and A ≺ B."""
        diracs = [dirac(xk) for xk in self.outcomes]
        if self.kind == "upper":
            return diracs, [self.blend] * len(diracs), dirac(self.x), self.blend
        return [self.blend] * len(diracs), diracs, self.blend, dirac(self.x)


def semicontinuity_net(u: UtilityFunction, x, eps: float, steps: int) -> SemicontinuityNet:
    jumps = [j for j in u.jumps if j.at == x]
    if not jumps:
        raise InapplicableError(f"{u.kind} carries no jump at {x}; it is continuous there")
    if steps < 1:
        raise DomainError("steps must be positive")
    j = jumps[0]
    room = u.domain.upper - x if j.side > 0 else x - u.domain.lower
    c = min(1.0, room / 2) if math.isfinite(room) else 1.0
    ux = eval_utility(u, x)
    outcomes = []
    for k in range(1, steps + 1):
        xk = x + j.side * c / k
        uk = eval_utility(u, xk)
        gap = uk - ux if j.kind == "upper" else ux - uk
        if not gap > eps:
            raise InapplicableError(f"gap {gap} at x_k={xk} does not exceed eps={eps}")
        outcomes.append(xk)
    u1 = eval_utility(u, outcomes[0])
    gap1 = abs(u1 - ux)
    m = 1
    while Fraction(1, 2 ** m) * Fraction(gap1) >= Fraction(eps):
        m += 1
    t = Fraction(1, 2 ** m)
    P = mix(t, dirac(outcomes[0]), dirac(x))
    return SemicontinuityNet(x, tuple(outcomes), P, t, j.kind)


# ---------------------------------------------------------------------------
# escape ladders for black-box escaping-mass search

MP_LADDER_DEPTH = 48


def escape_ladder(region, direction: int, depth: int = MP_LADDER_DEPTH) -> list:
    """Outcomes running off the ``direction`` end (+1 upper, -1 lower) of the
    region's extreme component, doubly exponentially where possible.

    A closed finite end yields just that endpoint.
    """
    pieces = as_region(region).pieces
    if not pieces:
        return []
    piece: Interval = pieces[-1] if direction > 0 else pieces[0]
    end = piece.upper if direction > 0 else piece.lower
    closed = piece.upper_closed if direction > 0 else piece.lower_closed
    out = []
    if math.isinf(end):
        for j in range(depth):
            mag = 2.0 ** (2 ** j) if j < 10 else mpmath.mpf(2) ** (2 ** j)
            out.append(direction * mag)
    elif closed:
        out.append(end)
    elif end == 0:
        for j in range(depth):
            mag = 2.0 ** -(2 ** j) if j < 10 else mpmath.mpf(2) ** -(2 ** j)
            out.append(-direction * mag)
    else:
        other = piece.lower if direction > 0 else piece.upper
        width = min(1.0, abs(end - other) / 2) if math.isfinite(other) else 1.0
        for j in range(1, 60):
            out.append(end - direction * width * 2.0 ** -j)
    seen, ladder = set(), []
    for x in out:
        if x in piece and x not in seen:
            seen.add(x)
            ladder.append(x)
    return ladder
