"""Weak orders on lotteries as black-box comparators.

A :class:`PreferenceOracle` answers one of three verdicts per pair.
Utility-backed oracles compare exact rational expectations of the
double-valued utility, so they are transitive and independent without
rounding caveats.  The adversarial oracles at the bottom violate
specific axioms on purpose and exist to exercise the falsifiers.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

from .errors import DomainError, ScopeError, ValidationError
from .lottery import DensityMeasure, SimpleLottery, in_region
from .space import Interval, Region, RegionLike, as_region
from .utility import (UtilityFunction, _exact, eval_utility, expectation_density,
                      expectation_exact)
from . import utility as _utility


class Verdict(enum.Enum):
    FIRST_STRICT = "first_strict"
    SECOND_STRICT = "second_strict"
    INDIFFERENT = "indifferent"

    def flip(self) -> Verdict:
        if self is Verdict.FIRST_STRICT:
            return Verdict.SECOND_STRICT
        if self is Verdict.SECOND_STRICT:
            return Verdict.FIRST_STRICT
        return self

    @property
    def weakly_first(self) -> bool:
        """First argument is weakly preferred (P ≿ Q)."""
        return self is not Verdict.SECOND_STRICT

    @property
    def weakly_second(self) -> bool:
        return self is not Verdict.FIRST_STRICT


def _sign_verdict(diff, eps=0) -> Verdict:
    if abs(diff) <= eps:
        return Verdict.INDIFFERENT
    return Verdict.FIRST_STRICT if diff > 0 else Verdict.SECOND_STRICT


@dataclass(frozen=True, eq=False)
class PreferenceOracle:
    """A trichotomous comparator with a scope (where lotteries may live).

    ``approximate`` marks eps-indifference oracles, which need not be
    transitive.  ``utility`` is kept for reporting only; the axioms
    module treats every oracle as a black box.
    """

    compare_fn: Callable
    scope: RegionLike
    name: str = "oracle"
    approximate: bool = False
    utility: Optional[UtilityFunction] = field(default=None, repr=False)
    config: Optional[Mapping] = field(default=None, repr=False)

    def compare(self, P, Q) -> Verdict:
        return self.compare_fn(P, Q)

    __call__ = compare

    def prefers(self, P, Q) -> bool:
        """P ≻ Q"""
        return self.compare(P, Q) is Verdict.FIRST_STRICT

    def weakly_prefers(self, P, Q) -> bool:
        """P ≿ Q"""
        return self.compare(P, Q) is not Verdict.SECOND_STRICT

    def indifferent(self, P, Q) -> bool:
        return self.compare(P, Q) is Verdict.INDIFFERENT


def _measure_value(P, u: UtilityFunction):
    if isinstance(P, SimpleLottery):
        return expectation_exact(P, u)
    if isinstance(P, DensityMeasure):
        return Fraction(expectation_density(P, u))
    raise DomainError(f"cannot compare {type(P).__name__}")


def from_utility(u: UtilityFunction, eps: float = 0.0) -> PreferenceOracle:
    """The order represented by E[u]; indifference iff |ΔE| <= eps."""
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    eps_q = Fraction(eps)

    def compare(P, Q):
        return _sign_verdict(_measure_value(P, u) - _measure_value(Q, u), eps_q)

    cfg = None
    if u.config is not None:
        cfg = dict(u.config)
        if eps:
            cfg["eps"] = eps
    return PreferenceOracle(compare, u.domain, f"EU[{u.kind}]", approximate=eps > 0,
                            utility=u, config=cfg)


def restrict(o: PreferenceOracle, Y: RegionLike) -> PreferenceOracle:
    """The order restricted to lotteries supported inside ``Y``."""
    Y_region = as_region(Y)
    if not Y_region.issubset(o.scope):
        raise DomainError(f"{Y_region} is not inside the oracle scope {as_region(o.scope)}")

    def compare(P, Q):
        for L in (P, Q):
            if not in_region(L, Y_region):
                raise ScopeError(f"lottery {L!r} is not supported in {Y_region}")
        return o.compare(P, Q)

    return PreferenceOracle(compare, Y if isinstance(Y, (Interval, Region)) else Y_region,
                            f"{o.name}|{Y_region}", o.approximate, o.utility, o.config)


# ---------------------------------------------------------------------------
# adversarial oracles


def rank_dependent(u: UtilityFunction, power: float = 2.0) -> PreferenceOracle:
    """Rank-dependent utility with probability weighting w(p) = p**power.

    Decision weights are w(G_i) - w(G_{i-1}) where G_i is the probability of
    the i best outcomes.  Non-linear weighting breaks independence.
    """
    if not power > 0:
        raise DomainError("weighting power must be positive")
    int_power = int(power) if float(power).is_integer() else None

    def w(p: Fraction):
        return p ** int_power if int_power is not None else Fraction(float(p) ** power)

    def value(P: SimpleLottery):
        ranked = sorted(((_exact(eval_utility(u, x)), p) for x, p in P.items()),
                        key=lambda t: t[0], reverse=True)
        total, cum, prev = Fraction(0), Fraction(0), Fraction(0)
        for ux, p in ranked:
            cum += p
            wc = w(cum)
            total += (wc - prev) * ux
            prev = wc
        return total

    def compare(P, Q):
        return _sign_verdict(value(P) - value(Q))

    return PreferenceOracle(compare, u.domain, f"RDU[{u.kind}, p^{power}]",
                            config={"oracle": "rank_dependent", "power": power, **(u.config or {})})


def lexicographic(primary: UtilityFunction, secondary: UtilityFunction) -> PreferenceOracle:
    """Compare E[primary]; break exact ties with E[secondary].

    Independent but not segmentally continuous.
    """

    def compare(P, Q):
        v = _sign_verdict(expectation_exact(P, primary) - expectation_exact(Q, primary))
        if v is not Verdict.INDIFFERENT:
            return v
        return _sign_verdict(expectation_exact(P, secondary) - expectation_exact(Q, secondary))

    scope = primary.domain if primary.domain.issubset(secondary.domain) else secondary.domain
    cfg = None
    if primary.config and secondary.config:
        cfg = {"oracle": "lexicographic", "primary": dict(primary.config),
               "secondary": dict(secondary.config)}
    return PreferenceOracle(compare, scope, f"LEX[{primary.kind}, {secondary.kind}]", config=cfg)


def with_overrides(base: PreferenceOracle, overrides: Mapping) -> PreferenceOracle:
    """Patch specific pairs: ``overrides[(P, Q)] = verdict`` (the reverse pair
    gets the flipped verdict).  Handy for building intransitive cycles."""
    table = {}
    for (P, Q), v in overrides.items():
        v = Verdict(v)
        table[(P, Q)] = v
        table[(Q, P)] = v.flip()

    def compare(P, Q):
        hit = table.get((P, Q))
        return hit if hit is not None else base.compare(P, Q)

    return PreferenceOracle(compare, base.scope, f"patched[{base.name}]", base.approximate)


def cycle_oracle(A: SimpleLottery, B: SimpleLottery, C: SimpleLottery,
                 base: Optional[PreferenceOracle] = None) -> PreferenceOracle:
    """A ≻ B, B ≻ C, C ≻ A; every other pair per ``base`` (default E[x])."""
    base = base or from_utility(_utility.linear())
    return with_overrides(base, {(A, B): Verdict.FIRST_STRICT, (B, C): Verdict.FIRST_STRICT,
                                 (C, A): Verdict.FIRST_STRICT})


def oracle_from_config(cfg: Mapping) -> PreferenceOracle:
    """``{"utility": ...}`` (optionally with ``eps``), or
    ``{"oracle": "rank_dependent", "power": 2, "utility": ...}`` or
    ``{"oracle": "lexicographic", "primary": {...}, "secondary": {...}}``."""
    if not isinstance(cfg, Mapping):
        raise ValidationError(f"oracle config must be an object, got {cfg!r}")
    cfg = dict(cfg)
    kind = cfg.pop("oracle", "expected_utility")
    if kind == "expected_utility":
        eps = float(cfg.pop("eps", 0.0))
        return from_utility(_utility.from_config(cfg), eps)
    if kind == "rank_dependent":
        power = float(cfg.pop("power", 2.0))
        return rank_dependent(_utility.from_config(cfg), power)
    if kind == "lexicographic":
        extra = set(cfg) - {"primary", "secondary"}
        if extra:
            raise ValidationError(f"unknown lexicographic fields {sorted(extra)}")
        return lexicographic(_utility.from_config(cfg["primary"]),
                             _utility.from_config(cfg["secondary"]))
    raise ValidationError(f"unknown oracle kind {kind!r}")
