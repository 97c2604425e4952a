"""Simple lotteries with exact rational weights, and compact-support densities.

Probabilities are :class:`fractions.Fraction` throughout so that mixture
identities can be checked with exact equality.  Outcomes are real
coordinates: ints, floats, Fractions, or :class:`mpmath.mpf` for points
beyond double range (the escaping-mass nets need those).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from types import MappingProxyType
from typing import Callable, Iterable, Mapping, Optional

import mpmath
import numpy as np

from .errors import DomainError, ValidationError
from .space import REAL_LINE, Interval, RegionLike, as_region, is_real

DEFAULT_QUADRATURE_NODES = 4096
MASS_TOLERANCE = 1e-10


def as_probability(p) -> Fraction:
    """Coerce to an exact rational; floats are refused to keep sums exact."""
    if isinstance(p, Fraction):
        return p
    if isinstance(p, bool):
        raise DomainError("booleans are not probabilities")
    if isinstance(p, (int, Rational)):
        return Fraction(p)
    if isinstance(p, str):
        try:
            return Fraction(p.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse probability {p!r}") from exc
    raise DomainError(f"probability must be an exact rational, got {type(p).__name__} {p!r}")


def _check_outcome(x):
    if not is_real(x):
        raise DomainError(f"outcome must be a real number, got {x!r}")
    if isinstance(x, float) and not math.isfinite(x):
        raise DomainError(f"outcome must be finite, got {x!r}")
    if isinstance(x, mpmath.mpf) and not mpmath.isfinite(x):
        raise DomainError(f"outcome must be finite, got {x!r}")
    return x


class SimpleLottery:
    """A finitely supported probability measure.

    ``atoms`` maps each outcome to a strictly positive rational weight;
    weights sum to exactly one.  Instances are immutable and hashable.
    """

    __slots__ = ("_atoms", "_hash")

    def __init__(self, atoms: Mapping | Iterable):
        items = atoms.items() if isinstance(atoms, Mapping) else atoms
        merged: dict = {}
        for x, p in items:
            x = _check_outcome(x)
            p = as_probability(p)
            if p < 0:
                raise ValidationError(f"negative weight {p} at outcome {x!r}")
            if p == 0:
                continue
            merged[x] = merged.get(x, Fraction(0)) + p
        if not merged:
            raise ValidationError("a lottery needs at least one atom")
        total = sum(merged.values(), Fraction(0))
        if total != 1:
            raise ValidationError(f"weights sum to {total}, not 1")
        self._atoms = MappingProxyType(dict(sorted(merged.items())))
        self._hash = None

    @classmethod
    def _trusted(cls, atoms: dict) -> SimpleLottery:
        # caller guarantees positive weights summing to one
        obj = cls.__new__(cls)
        obj._atoms = MappingProxyType(dict(sorted(atoms.items())))
        obj._hash = None
        return obj

    @property
    def atoms(self) -> Mapping:
        return self._atoms

    def items(self):
        return self._atoms.items()

    def __len__(self):
        return len(self._atoms)

    def __iter__(self):
        return iter(self._atoms)

    def __getitem__(self, x) -> Fraction:
        return self._atoms.get(x, Fraction(0))

    def __eq__(self, other):
        if not isinstance(other, SimpleLottery):
            return NotImplemented
        return dict(self._atoms) == dict(other._atoms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._atoms.items()))
        return self._hash

    def __repr__(self):
        body = ", ".join(f"{_fmt_outcome(x)}: {p}" for x, p in self._atoms.items())
        return f"SimpleLottery({{{body}}})"

    @property
    def support(self) -> frozenset:
        return frozenset(self._atoms)

    def min_outcome(self):
        return next(iter(self._atoms))

    def max_outcome(self):
        return next(reversed(self._atoms.keys()))

    def points(self):
        """Atom coordinates and float weights as arrays (for family sums)."""
        xs = np.array([_to_float(x) for x in self._atoms], dtype=float)
        ws = np.array([float(p) for p in self._atoms.values()], dtype=float)
        return xs, ws

    def to_json(self) -> dict:
        return {"atoms": [{"x": outcome_to_json(x), "p": f"{p.numerator}/{p.denominator}"}
                          for x, p in self._atoms.items()]}

    @classmethod
    def from_json(cls, data) -> SimpleLottery:
        if set(data) != {"atoms"}:
            raise ValidationError(f"lottery JSON must have exactly the key 'atoms', got {sorted(data)}")
        return cls([(outcome_from_json(a["x"]), a["p"]) for a in data["atoms"]])


def _to_float(x) -> float:
    # saturates to +-inf for outcomes beyond double range
    return float(x)


def _fmt_outcome(x) -> str:
    if isinstance(x, mpmath.mpf):
        return mpmath.nstr(x, 10)
    return repr(x)


def outcome_to_json(x):
    if isinstance(x, mpmath.mpf):
        f = float(x)
        if math.isfinite(f) and mpmath.mpf(f) == x:
            return f
        return mpmath.nstr(x, 17, strip_zeros=False)
    if isinstance(x, Fraction):
        return float(x) if float(x) == x else f"{x.numerator}/{x.denominator}"
    return x


def outcome_from_json(v):
    if isinstance(v, str):
        if "/" in v:
            return Fraction(v)
        f = float(v)
        if math.isfinite(f) and f != 0:
            return f
        return mpmath.mpf(v)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(f"outcome must be a number, got {v!r}")
    return v


def dirac(x, space: Optional[Interval] = None) -> SimpleLottery:
    """Point mass at ``x``."""
    _check_outcome(x)
    if space is not None and x not in space:
        raise DomainError(f"outcome {x!r} is outside {space}")
    return SimpleLottery._trusted({x: Fraction(1)})


def mix(t, P: SimpleLottery, Q: SimpleLottery) -> SimpleLottery:
    """The convex combination ``t*P + (1-t)*Q`` with exact weights."""
    t = as_probability(t)
    if not 0 <= t <= 1:
        raise DomainError(f"mixture weight must lie in [0, 1], got {t}")
    # integer numerators over one common denominator, normalized once per atom
    a, b = t.numerator, t.denominator
    lp = math.lcm(*(p.denominator for p in P.atoms.values()))
    lq = math.lcm(*(q.denominator for q in Q.atoms.values()))
    num: dict = {}
    for x, p in P.items():
        num[x] = a * p.numerator * (lp // p.denominator) * lq
    c = b - a
    for x, q in Q.items():
        num[x] = num.get(x, 0) + c * q.numerator * (lq // q.denominator) * lp
    den = b * lp * lq
    return SimpleLottery._trusted({x: Fraction(n, den) for x, n in num.items() if n})


def support(P) -> frozenset:
    """The support as a set of outcomes (a lottery's atom set)."""
    if isinstance(P, SimpleLottery):
        return P.support
    raise DomainError("support() of a density measure is its carrier; use M.carrier")


def support_hull(P) -> Interval:
    """Smallest closed interval containing the support."""
    if isinstance(P, SimpleLottery):
        return Interval.closed(P.min_outcome(), P.max_outcome())
    return Interval.closed(*P.carrier)


def in_region(P, region: RegionLike) -> bool:
    region = as_region(region)
    if isinstance(P, SimpleLottery):
        return all(x in region for x in P.atoms)
    return as_region(Interval.closed(*P.carrier)).issubset(region)


# ---------------------------------------------------------------------------
# densities


def _uniform(a, b):
    return lambda x: np.full_like(np.asarray(x, dtype=float), 1.0 / (b - a))


def _triangular(a, b, mode=None):
    c = b if mode is None else float(mode)
    if not a <= c <= b:
        raise DomainError(f"triangular mode {c} outside carrier [{a}, {b}]")

    def f(x):
        x = np.asarray(x, dtype=float)
        up = np.where(c > a, 2 * (x - a) / ((b - a) * (c - a) if c > a else 1.0), 0.0)
        down = np.where(b > c, 2 * (b - x) / ((b - a) * (b - c) if b > c else 1.0), 0.0)
        return np.where(x <= c, up, down)

    return f


def _beta(a, b, alpha=2.0, beta=2.0):
    from math import lgamma

    lognorm = lgamma(alpha) + lgamma(beta) - lgamma(alpha + beta)

    def f(x):
        z = (np.asarray(x, dtype=float) - a) / (b - a)
        z = np.clip(z, 0.0, 1.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.exp((alpha - 1) * np.log(z) + (beta - 1) * np.log1p(-z) - lognorm)
        return np.nan_to_num(v, nan=0.0, posinf=0.0) / (b - a)

    return f


DENSITY_CATALOG: dict[str, Callable] = {
    "uniform": _uniform,
    "triangular": _triangular,
    "beta": _beta,
}


@dataclass(frozen=True, eq=False)
class DensityMeasure:
    """A probability measure on a compact interval given by a density.

    Integrals use the composite midpoint rule on ``quadrature_nodes``
    cells.  Catalog densities are normalized under that same rule; a
    user-supplied density must integrate to one within ``1e-10``.
    """

    carrier: tuple
    density: Callable
    quadrature_nodes: int = DEFAULT_QUADRATURE_NODES
    name: str = "custom"
    params: Mapping = field(default_factory=dict)
    space: Optional[Interval] = None
    _norm: float = 1.0

    def __post_init__(self):
        a, b = (float(v) for v in self.carrier)
        if not (math.isfinite(a) and math.isfinite(b) and a < b):
            raise ValidationError(f"carrier must be a bounded interval with a < b, got {self.carrier}")
        object.__setattr__(self, "carrier", (a, b))
        if int(self.quadrature_nodes) < 1:
            raise ValidationError("quadrature_nodes must be positive")
        if self.space is not None and not Interval.closed(a, b).issubset(self.space):
            raise ValidationError(f"carrier [{a}, {b}] is not inside {self.space}")
        _, w = self.quadrature()
        if np.any(w < 0):
            raise ValidationError("density takes negative values at quadrature nodes")
        mass = float(np.sum(w))
        if abs(mass - 1.0) > MASS_TOLERANCE:
            raise ValidationError(f"density integrates to {mass!r}, not 1")

    @classmethod
    def from_catalog(cls, name: str, carrier, *, quadrature_nodes: int = DEFAULT_QUADRATURE_NODES,
                     space: Optional[Interval] = None, **params) -> DensityMeasure:
        if name not in DENSITY_CATALOG:
            raise ValidationError(f"unknown density {name!r}; known: {sorted(DENSITY_CATALOG)}")
        a, b = (float(v) for v in carrier)
        if not a < b:
            raise ValidationError(f"carrier must satisfy a < b, got {carrier}")
        f = DENSITY_CATALOG[name](a, b, **params)
        h = (b - a) / quadrature_nodes
        nodes = a + (np.arange(quadrature_nodes) + 0.5) * h
        mass = float(np.sum(f(nodes)) * h)
        if not mass > 0:
            raise ValidationError(f"density {name!r} has zero mass on {carrier}")
        return cls((a, b), f, quadrature_nodes, name, dict(params), space, mass)

    def pdf(self, x):
        return np.asarray(self.density(x), dtype=float) / self._norm

    def quadrature(self, nodes: Optional[int] = None):
        """Midpoint nodes and weights (density times cell width)."""
        n = int(nodes or self.quadrature_nodes)
        a, b = self.carrier
        h = (b - a) / n
        xs = a + (np.arange(n) + 0.5) * h
        return xs, self.pdf(xs) * h

    def points(self):
        return self.quadrature()

    def to_json(self) -> dict:
        if self.name not in DENSITY_CATALOG:
            raise ValidationError("only catalog densities can be serialized")
        return {"carrier": list(self.carrier), "density": self.name, "params": dict(self.params)}

    @classmethod
    def from_json(cls, data, **kwargs) -> DensityMeasure:
        extra = set(data) - {"carrier", "density", "params"}
        if extra:
            raise ValidationError(f"unknown density fields {sorted(extra)}")
        return cls.from_catalog(data["density"], data["carrier"], **dict(data.get("params", {})), **kwargs)

    def __repr__(self):
        return f"DensityMeasure({self.name}, carrier={self.carrier}, params={dict(self.params)})"


def rationalize(weights, max_denominator: int = 1 << 24) -> list[Fraction]:
    """Turn nonnegative float weights into positive Fractions summing to one.

    Zero weights stay zero; rounding slack goes to the largest weight.
    """
    w = np.asarray(weights, dtype=float)
    total = float(w.sum())
    if not total > 0:
        raise ValidationError("weights have no mass")
    fr = [Fraction(float(v) / total).limit_denominator(max_denominator) if v > 0 else Fraction(0)
          for v in w]
    fr = [f if f > 0 or v <= 0 else Fraction(1, max_denominator) for f, v in zip(fr, w)]
    slack = 1 - sum(fr, Fraction(0))
    i = int(np.argmax(w))
    fr[i] += slack
    if fr[i] <= 0:
        raise ValidationError("rationalization produced a non-positive weight")
    return fr


def discretize(M: DensityMeasure, k: int) -> SimpleLottery:
    """Lottery on the midpoints of ``k`` equal cells of the carrier.

    Each node carries the quadrature mass of its cell.
    """
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    k = int(k)
    a, b = M.carrier
    h = (b - a) / k
    sub = max(1, M.quadrature_nodes // k)
    offsets = (np.arange(sub) + 0.5) / sub
    cells = a + (np.arange(k)[:, None] + offsets[None, :]) * h
    dens = M.pdf(cells.ravel()).reshape(k, sub)
    if np.any(dens < 0):
        raise ValidationError("density takes negative values at quadrature nodes")
    mass = dens.mean(axis=1) * h
    nodes = a + (np.arange(k) + 0.5) * h
    fr = rationalize(mass)
    return SimpleLottery._trusted({float(x): p for x, p in zip(nodes, fr) if p > 0})


# ---------------------------------------------------------------------------
# random lotteries

SAMPLING_WINDOW = (1e-3, 1e3)
WEIGHT_DENOMINATOR = 1 << 16


def _sampling_bounds(region: Interval, window=SAMPLING_WINDOW):
    lo = max(region.lower, -window[1])
    hi = min(region.upper, window[1])
    return lo, hi


def random_outcome(rng: np.random.Generator, region: RegionLike, window=SAMPLING_WINDOW):
    """One outcome drawn log-uniformly from the region (clipped to a window)."""
    pieces = [p for p in as_region(region).pieces]
    if not pieces:
        raise DomainError("cannot draw an outcome from an empty region")
    piece = pieces[int(rng.integers(len(pieces)))]
    lo, hi = _sampling_bounds(piece, window)
    if lo == hi:
        return float(lo)
    for _ in range(200):
        if lo >= 0:
            a = lo if lo > 0 else min(window[0], hi / 2)
            x = math.exp(rng.uniform(math.log(a), math.log(hi)))
        elif hi <= 0:
            a = -hi if hi < 0 else min(window[0], -lo / 2)
            x = -math.exp(rng.uniform(math.log(a), math.log(-lo)))
        else:
            top = max(-lo, hi)
            floor = min(window[0], top / 2)
            mag = math.exp(rng.uniform(math.log(floor), math.log(top)))
            x = mag if rng.random() < 0.5 else -mag
        if x in piece:
            return x
    x = float(rng.uniform(lo, hi))
    if x in piece:
        return x
    return float((lo + hi) / 2)


def random_lottery(rng: np.random.Generator, region: RegionLike = None, *, max_atoms: int = 5,
                   window=SAMPLING_WINDOW) -> SimpleLottery:
    """Support size uniform in 1..max_atoms; symmetric Dirichlet weights on a 2^-16 lattice."""
    region = REAL_LINE if region is None else region
    n = int(rng.integers(1, max_atoms + 1))
    xs = [random_outcome(rng, region, window) for _ in range(n)]
    w = rng.dirichlet(np.ones(n))
    counts = np.floor(w * WEIGHT_DENOMINATOR).astype(np.int64)
    counts = np.maximum(counts, 1)
    diff = WEIGHT_DENOMINATOR - int(counts.sum())
    counts[int(np.argmax(counts))] += diff
    # counts are positive and sum to the denominator, so validation can be skipped
    merged: dict = {}
    for x, c in zip(xs, counts):
        merged[x] = merged.get(x, 0) + int(c)
    return SimpleLottery._trusted({x: Fraction(c, WEIGHT_DENOMINATOR) for x, c in merged.items()})


def random_rational(rng: np.random.Generator, *, lower_closed=True, upper_closed=True,
                    denominator: int = WEIGHT_DENOMINATOR) -> Fraction:
    lo = 0 if lower_closed else 1
    hi = denominator if upper_closed else denominator - 1
    return Fraction(int(rng.integers(lo, hi + 1)), denominator)
