"""Utility catalog and expectation operators.

Every catalog entry knows its domain, whether it is continuous and
bounded, the image bounds of its domain, and (when it is piecewise
monotone) the inverse on each monotone piece.  The inverses are what the
exhaustion and escaping-mass constructions need.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

import mpmath
import numpy as np

from .errors import DomainError, ValidationError
from .lottery import DensityMeasure, SimpleLottery
from .space import (INF, NONNEGATIVE_HALF_LINE, POSITIVE_HALF_LINE, REAL_LINE, Interval,
                    OutcomeSpace)


@dataclass(frozen=True)
class MonotonePiece:
    """A maximal interval on which the utility is strictly monotone and continuous."""

    domain: Interval
    increasing: bool
    inverse: Callable  # image value -> outcome, scalar floats
    image_lower: float  # inf of u over the piece
    image_upper: float  # sup of u over the piece
    inverse_mp: Optional[Callable] = None  # same in mpmath, for images beyond double range


@dataclass(frozen=True)
class Jump:
    """A point where the utility fails upper (``kind='upper'``) or lower
    semicontinuity, approached from ``side`` (+1 right, -1 left)."""

    at: float
    side: int
    kind: str
    gap: float


@dataclass(frozen=True, eq=False)
class UtilityFunction:
    """An evaluatable utility on an interval outcome space.

    ``fn`` is vectorized over float arrays; ``fn_mp`` evaluates outcomes
    that only exist as :class:`mpmath.mpf`.
    """

    kind: str
    params: Mapping
    domain: OutcomeSpace
    declared_continuous: bool
    declared_bounded: bool
    fn: Callable = field(repr=False)
    fn_mp: Optional[Callable] = field(default=None, repr=False)
    image: tuple = (-INF, INF)
    pieces: tuple = ()
    jumps: tuple = ()
    config: Optional[Mapping] = field(default=None, repr=False)

    def __call__(self, x) -> float:
        return eval_utility(self, x)

    def values(self, xs) -> np.ndarray:
        """Vectorized evaluation; points must already lie in the domain."""
        xs = np.asarray(xs, dtype=float)
        out = np.asarray(self.fn(xs), dtype=float)
        if out.shape != xs.shape:
            out = np.broadcast_to(out, xs.shape).astype(float)
        return out

    @property
    def bounded_above(self) -> bool:
        return math.isfinite(self.image[1])

    @property
    def bounded_below(self) -> bool:
        return math.isfinite(self.image[0])

    @property
    def invertible(self) -> bool:
        return bool(self.pieces)

    def to_config(self) -> dict:
        if self.config is None:
            raise ValidationError(f"utility {self.kind!r} has no JSON form")
        return dict(self.config)


def eval_utility(u: UtilityFunction, x) -> float:
    """``u(x)`` as a float; outcomes outside the domain raise DomainError."""
    if x not in u.domain:
        raise DomainError(f"outcome {x!r} is outside the domain {u.domain} of {u.kind}")
    if isinstance(x, mpmath.mpf):
        fx = float(x)
        if math.isfinite(fx) and fx != 0 and mpmath.mpf(fx) == x:
            x = fx
        elif u.fn_mp is not None:
            return float(u.fn_mp(x))
        else:
            x = fx
    elif not isinstance(x, float):
        x = float(x)
    return float(u.fn(x))


def _exact(v: float) -> Fraction:
    if not math.isfinite(v):
        raise DomainError(f"utility value {v!r} is not finite")
    return Fraction(v)


def expectation_exact(P: SimpleLottery, u: UtilityFunction) -> Fraction:
    """Exact rational value of sum_i p_i * u(x_i) for the double-valued u(x_i)."""
    return sum((p * _exact(eval_utility(u, x)) for x, p in P.items()), Fraction(0))


def expectation(P: SimpleLottery, u: UtilityFunction) -> float:
    """E_P[u] for a simple lottery: exact weighted sum, rounded once."""
    return float(expectation_exact(P, u))


def expectation_density(M: DensityMeasure, u: UtilityFunction) -> float:
    """E_M[u] by the measure's midpoint quadrature."""
    a, b = M.carrier
    if not Interval.closed(a, b).issubset(u.domain):
        raise DomainError(f"carrier [{a}, {b}] escapes the domain {u.domain} of {u.kind}")
    xs, ws = M.quadrature()
    return float(math.fsum(u.values(xs) * ws))


def expect(P, u: UtilityFunction) -> float:
    if isinstance(P, SimpleLottery):
        return expectation(P, u)
    if isinstance(P, DensityMeasure):
        return expectation_density(P, u)
    raise DomainError(f"cannot take an expectation over {type(P).__name__}")


# ---------------------------------------------------------------------------
# catalog


def _log_pieces(domain):
    return (MonotonePiece(domain, True, math.exp, -INF, INF, mpmath.exp),)


def log_utility() -> UtilityFunction:
    return UtilityFunction(
        "log", {}, POSITIVE_HALF_LINE, True, False, np.log, mpmath.log,
        (-INF, INF), _log_pieces(POSITIVE_HALF_LINE), config={"utility": "log"})


def crra(theta) -> UtilityFunction:
    """(x^(1-theta) - 1)/(1-theta) on ]0, inf[; theta == 1 is exactly log."""
    theta = float(theta)
    if not theta > 0:
        raise DomainError(f"CRRA needs theta > 0, got {theta}")
    if theta == 1.0:
        u = log_utility()
        return UtilityFunction("crra", {"theta": 1.0}, u.domain, True, False, u.fn, u.fn_mp,
                               u.image, u.pieces, config={"utility": "crra", "theta": 1.0})
    g = 1.0 - theta

    def f(x):
        return (np.power(x, g) - 1.0) / g

    def f_mp(x):
        return (mpmath.power(x, g) - 1) / g

    def inv(y):
        return (g * y + 1.0) ** (1.0 / g)

    def inv_mp(y):
        return mpmath.power(g * mpmath.mpf(y) + 1, 1 / mpmath.mpf(g))

    image = (-1.0 / g, INF) if g > 0 else (-INF, -1.0 / g)
    piece = MonotonePiece(POSITIVE_HALF_LINE, True, inv, image[0], image[1], inv_mp)
    return UtilityFunction("crra", {"theta": theta}, POSITIVE_HALF_LINE, True, False, f, f_mp,
                           image, (piece,), config={"utility": "crra", "theta": theta})


def sqrt_utility() -> UtilityFunction:
    piece = MonotonePiece(NONNEGATIVE_HALF_LINE, True, lambda y: y * y, 0.0, INF,
                          lambda y: mpmath.mpf(y) ** 2)
    return UtilityFunction("sqrt", {}, NONNEGATIVE_HALF_LINE, True, False, np.sqrt, mpmath.sqrt,
                           (0.0, INF), (piece,), config={"utility": "sqrt"})


def linear(slope: float = 1.0, intercept: float = 0.0) -> UtilityFunction:
    slope, intercept = float(slope), float(intercept)
    if slope == 0:
        return constant(intercept)

    def f(x):
        return slope * np.asarray(x, dtype=float) + intercept if np.ndim(x) else slope * x + intercept

    piece = MonotonePiece(REAL_LINE, slope > 0, lambda y: (y - intercept) / slope, -INF, INF,
                          lambda y: (mpmath.mpf(y) - intercept) / slope)
    cfg = {"utility": "linear"}
    if slope != 1.0:
        cfg["slope"] = slope
    if intercept != 0.0:
        cfg["intercept"] = intercept
    return UtilityFunction("linear", {"slope": slope, "intercept": intercept}, REAL_LINE, True,
                           False, f, lambda x: slope * x + intercept, (-INF, INF), (piece,),
                           config=cfg)


def logistic(scale: float = 1.0) -> UtilityFunction:
    """1/(1 + exp(-x/scale)): bounded, continuous, image ]0, 1[."""
    scale = float(scale)
    if not scale > 0:
        raise DomainError("logistic scale must be positive")

    def f(x):
        return 0.5 * (1.0 + np.tanh(np.asarray(x, dtype=float) / (2.0 * scale)))

    def inv(y):
        return scale * math.log(y / (1.0 - y))

    piece = MonotonePiece(REAL_LINE, True, inv, 0.0, 1.0)
    cfg = {"utility": "logistic"} if scale == 1.0 else {"utility": "logistic", "scale": scale}
    # no mp path: the double form saturates correctly at +-inf, while mp exp of
    # a huge argument is unaffordable
    return UtilityFunction("logistic", {"scale": scale}, REAL_LINE, True, True, f,
                           None, (0.0, 1.0), (piece,),
                           config=cfg)


def quadratic() -> UtilityFunction:
    """x^2 on the real line: two monotone pieces."""
    left = MonotonePiece(Interval(-INF, 0.0, False, True), False, lambda y: -math.sqrt(y), 0.0, INF,
                         lambda y: -mpmath.sqrt(y))
    right = MonotonePiece(Interval(0.0, INF, True, False), True, math.sqrt, 0.0, INF, mpmath.sqrt)
    return UtilityFunction("quadratic", {}, REAL_LINE, True, False, np.square,
                           lambda x: x * x, (0.0, INF), (left, right), config={"utility": "quadratic"})


def constant(value: float = 0.0, domain: OutcomeSpace = REAL_LINE) -> UtilityFunction:
    value = float(value)

    def f(x):
        return np.full_like(np.asarray(x, dtype=float), value) if np.ndim(x) else value

    return UtilityFunction("constant", {"value": value}, domain, True, True, f,
                           lambda x: value, (value, value), config={"utility": "constant", "value": value})


def step(at: float = 0.0, low: float = 0.0, high: float = 1.0, *, closed_above: bool = False,
         domain: OutcomeSpace = REAL_LINE) -> UtilityFunction:
    """``high`` above ``at`` and ``low`` below; the value at ``at`` is ``high``
    only if ``closed_above``.

    With the default ``u(at) = low`` the function fails upper
    semicontinuity from the right; with ``closed_above`` it fails lower
    semicontinuity from the left.
    """
    at, low, high = float(at), float(low), float(high)
    if not high > low:
        raise DomainError("step utility needs high > low")

    def f(x):
        x = np.asarray(x, dtype=float)
        above = x >= at if closed_above else x > at
        out = np.where(above, high, low)
        return out if out.ndim else float(out)

    def f_mp(x):
        return high if (x >= at if closed_above else x > at) else low

    jump = Jump(at, -1, "lower", high - low) if closed_above else Jump(at, +1, "upper", high - low)
    cfg = {"utility": "step", "at": at, "low": low, "high": high, "closed_above": closed_above}
    return UtilityFunction("step", {"at": at, "low": low, "high": high, "closed_above": closed_above},
                           domain, False, True, f, f_mp, (low, high), (), (jump,), config=cfg)


def affine(a: float, b: float, u: UtilityFunction) -> UtilityFunction:
    """x -> a*u(x) + b for a > 0 (an order-preserving relabeling)."""
    a, b = float(a), float(b)
    if not a > 0:
        raise DomainError(f"affine transform needs a > 0, got {a}")

    def f(x):
        return a * u.fn(x) + b

    f_mp = None if u.fn_mp is None else (lambda x: a * u.fn_mp(x) + b)
    pieces = tuple(
        MonotonePiece(p.domain, p.increasing, (lambda y, p=p: p.inverse((y - b) / a)),
                      a * p.image_lower + b, a * p.image_upper + b,
                      None if p.inverse_mp is None else (lambda y, p=p: p.inverse_mp((mpmath.mpf(y) - b) / a)))
        for p in u.pieces)
    jumps = tuple(Jump(j.at, j.side, j.kind, a * j.gap) for j in u.jumps)
    cfg = None if u.config is None else {"utility": "affine", "a": a, "b": b, "inner": dict(u.config)}
    return UtilityFunction("affine", {"a": a, "b": b, "inner": u.kind}, u.domain,
                           u.declared_continuous, u.declared_bounded, f, f_mp,
                           (a * u.image[0] + b, a * u.image[1] + b), pieces, jumps, config=cfg)


def table(grid, values) -> UtilityFunction:
    """Piecewise-linear interpolation of (grid, values) on [min grid, max grid].

    Linear interpolation preserves monotonicity of the data, so a
    calibrated table inherits the order of the oracle it came from.
    """
    xs = np.asarray([float(g) for g in grid], dtype=float)
    vs = np.asarray([float(v) for v in values], dtype=float)
    if xs.ndim != 1 or xs.shape != vs.shape or len(xs) < 1:
        raise ValidationError("table needs equally long one-dimensional grid and values")
    order = np.argsort(xs)
    xs, vs = xs[order], vs[order]
    if np.any(np.diff(xs) <= 0):
        raise ValidationError("table grid must not repeat points")
    if not np.all(np.isfinite(vs)):
        raise ValidationError("table values must be finite")
    if len(xs) == 1:
        domain = OutcomeSpace(xs[0] - 0.5, xs[0] + 0.5, True, True)
    else:
        domain = OutcomeSpace(xs[0], xs[-1], True, True)

    def f(x):
        return np.interp(x, xs, vs)

    pieces = ()
    d = np.diff(vs)
    if len(xs) > 1 and (np.all(d > 0) or np.all(d < 0)):
        inc = bool(np.all(d > 0))
        if inc:
            inv = lambda y: float(np.interp(y, vs, xs))  # noqa: E731
        else:
            inv = lambda y: float(np.interp(-y, -vs, xs))  # noqa: E731
        pieces = (MonotonePiece(domain, inc, inv, float(vs.min()), float(vs.max())),)
    cfg = {"utility": "table", "grid": xs.tolist(), "values": vs.tolist()}
    return UtilityFunction("table", {"n": len(xs)}, domain, True, True, f, None,
                           (float(vs.min()), float(vs.max())), pieces, config=cfg)


def custom(fn: Callable, domain: OutcomeSpace = REAL_LINE, *, name: str = "custom",
           continuous: bool = True, bounded: bool = False, vectorized: bool = True) -> UtilityFunction:
    """Wrap an arbitrary callable (no inverse, no JSON form)."""
    f = fn if vectorized else np.vectorize(fn, otypes=[float])
    return UtilityFunction(name, {}, domain, continuous, bounded, f, None)


CATALOG = {
    "log": (log_utility, set()),
    "crra": (crra, {"theta"}),
    "sqrt": (sqrt_utility, set()),
    "linear": (linear, {"slope", "intercept"}),
    "logistic": (logistic, {"scale"}),
    "quadratic": (quadratic, set()),
    "constant": (constant, {"value"}),
    "step": (step, {"at", "low", "high", "closed_above"}),
}


def from_config(cfg: Mapping) -> UtilityFunction:
    """Build a utility from ``{"utility": name, **params}``; unknown keys are rejected."""
    if not isinstance(cfg, Mapping) or "utility" not in cfg:
        raise ValidationError(f"utility config needs a 'utility' key, got {cfg!r}")
    name = cfg["utility"]
    params = {k: v for k, v in cfg.items() if k != "utility"}
    if name == "affine":
        extra = set(params) - {"a", "b", "inner"}
        if extra or "inner" not in params:
            raise ValidationError(f"affine config needs a, b, inner; unexpected {sorted(extra)}")
        return affine(params.get("a", 1.0), params.get("b", 0.0), from_config(params["inner"]))
    if name == "table":
        extra = set(params) - {"grid", "values"}
        if extra:
            raise ValidationError(f"unknown table fields {sorted(extra)}")
        return table(params["grid"], params["values"])
    if name not in CATALOG:
        raise ValidationError(f"unknown utility {name!r}; known: {sorted(CATALOG) + ['affine', 'table']}")
    factory, allowed = CATALOG[name]
    extra = set(params) - allowed
    if extra:
        raise ValidationError(f"unknown parameters {sorted(extra)} for utility {name!r}")
    return factory(**params)
