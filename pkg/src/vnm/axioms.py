"""Randomized checkers and falsifiers for the preference axioms.

Every check returns an :class:`AxiomReport`.  A report with no violations
only says no witness turned up in the trial budget; its verdict reads
"pass (budget exhausted)".  Each witness is a JSON-ready record that
:func:`replay` re-checks against the oracle in isolation.

Closedness in the weak* topology is probed with convergent sequences
A_k → A, B_k → B (scored by a test-function family) with A_k ≿ B_k for
every k.  A violation is a limit pair with A ≺ B.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, ScopeError
from .exhaustion import Exhaustion, verify_exhaustion
from .lottery import SimpleLottery, dirac, mix, random_lottery, random_rational
from .preference import PreferenceOracle, Verdict, restrict
from .space import Region, as_region
from .weakstar import DEFAULT_FAMILY, TestFunctionFamily, converges, escape_ladder

PASS = "pass (budget exhausted)"
FALSIFIED = "falsified"

SEQUENCE_LENGTH = 30
TAIL = 5
CONVERGENCE_EPS = 1e-2
MAX_WITNESSES = 3
SEGMENT_TOL = Fraction(1, 2 ** 40)


@dataclass
class AxiomReport:
    axiom: str
    trials: int
    violations: list = field(default_factory=list)
    seed: Optional[int] = None
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        return FALSIFIED if self.violations else PASS

    @property
    def falsified(self) -> bool:
        return bool(self.violations)

    def to_json(self) -> dict:
        return {"axiom": self.axiom, "trials": self.trials, "verdict": self.verdict,
                "seed": self.seed, "violations": list(self.violations), "details": self.details}


def _threads(threads: Optional[int]) -> int:
    if threads is None:
        threads = int(os.environ.get("VNM_THREADS", "1") or 1)
    return max(1, int(threads))


def _run_trials(fn: Callable[[int], Optional[dict]], trials: int, threads: Optional[int],
                stop_after: Optional[int], chunk: int = 64):
    """Run fn(0..trials-1), collecting non-None results in index order.

    Stops after ``stop_after`` results; the count of trials run is the
    index of the last one inspected plus one, independent of scheduling.
    """
    threads = _threads(threads)
    found, run = [], 0
    pool = ThreadPoolExecutor(threads) if threads > 1 else None
    try:
        for start in range(0, trials, chunk):
            idx = range(start, min(trials, start + chunk))
            results = list(pool.map(fn, idx)) if pool else [fn(i) for i in idx]
            for i, r in zip(idx, results):
                run = i + 1
                if r is not None:
                    found.append(r)
                    if stop_after is not None and len(found) >= stop_after:
                        return found, run
    finally:
        if pool:
            pool.shutdown()
    return found, run


def _lj(P) -> dict:
    return P.to_json()


def _lf(d) -> SimpleLottery:
    return SimpleLottery.from_json(d)


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# weak order


def check_weak_order(o: PreferenceOracle, sample: Sequence, *, max_witnesses: int = 10) -> AxiomReport:
    """Transitivity on all ordered triples, antisymmetry of strict verdicts
    on all pairs, reflexivity on the diagonal.  Completeness holds by the
    three-verdict contract and is only recorded."""
    sample = list(sample)
    if not sample:
        raise DomainError("sample must be nonempty")
    n = len(sample)
    M = [[o.compare(P, Q) for Q in sample] for P in sample]
    weak = np.array([[v.weakly_first for v in row] for row in M], dtype=bool)
    viol = []
    total = {"transitivity": 0, "antisymmetry": 0, "reflexivity": 0}
    for i in range(n):
        if M[i][i] is not Verdict.INDIFFERENT:
            total["reflexivity"] += 1
            if len(viol) < max_witnesses:
                viol.append({"check": "reflexivity", "P": _lj(sample[i]), "verdict": M[i][i].value})
    for i, j in itertools.combinations(range(n), 2):
        if M[i][j] is not M[j][i].flip():
            total["antisymmetry"] += 1
            if len(viol) < max_witnesses:
                viol.append({"check": "antisymmetry", "P": _lj(sample[i]), "Q": _lj(sample[j]),
                             "verdicts": [M[i][j].value, M[j][i].value]})
    # i ≿ j and j ≿ k but not i ≿ k
    bad = weak[:, :, None] & weak[None, :, :] & ~weak[:, None, :]
    idx = np.arange(n)
    distinct = (idx[:, None, None] != idx[None, :, None]) & (idx[None, :, None] != idx[None, None, :]) \
        & (idx[:, None, None] != idx[None, None, :])
    bad &= distinct
    total["transitivity"] = int(bad.sum())
    for i, j, k in zip(*np.nonzero(bad)):
        if len(viol) >= max_witnesses:
            break
        viol.append({"check": "transitivity", "P": _lj(sample[i]), "Q": _lj(sample[j]),
                     "R": _lj(sample[k]),
                     "verdicts": [M[i][j].value, M[j][k].value, M[i][k].value]})
    triples = n * (n - 1) * (n - 2)
    return AxiomReport("weak_order", triples, viol, details={
        "sample_size": n, "triples": triples, "pairs": n * (n - 1) // 2,
        "completeness": "holds by the three-verdict contract", "violation_counts": total})


# ---------------------------------------------------------------------------
# independence


def check_independence(o: PreferenceOracle, trials: int, rng_seed: int, *,
                       region=None, max_witnesses: int = MAX_WITNESSES,
                       threads: Optional[int] = None) -> AxiomReport:
    """P ≻ Q must give (1-t)P + tR ≻ (1-t)Q + tR for t in [0, 1[."""
    if trials < 1:
        raise DomainError("trials must be at least 1")
    region = as_region(o.scope if region is None else region)
    tested = [False] * trials

    def trial(i):
        rng = np.random.default_rng([rng_seed, i])
        P, Q, R = (random_lottery(rng, region) for _ in range(3))
        t = Fraction(0) if i == 0 else random_rational(rng, upper_closed=False)
        v = o.compare(P, Q)
        if v is Verdict.INDIFFERENT:
            return None
        if v is Verdict.SECOND_STRICT:
            P, Q = Q, P
        tested[i] = True
        got = o.compare(mix(1 - t, P, R), mix(1 - t, Q, R))
        if got is Verdict.FIRST_STRICT:
            return None
        return {"check": "independence", "trial": i, "seed": rng_seed, "P": _lj(P), "Q": _lj(Q),
                "R": _lj(R), "t": _frac(t), "verdict": got.value}

    viol, run = _run_trials(trial, trials, threads, max_witnesses)
    return AxiomReport("independence", run, viol, rng_seed, {"strict_pairs_tested": sum(tested[:run])})


# ---------------------------------------------------------------------------
# segmental continuity


def _simplest_between(a: Fraction, b: Fraction) -> Fraction:
    """The rational with the smallest denominator in [a, b]."""
    if a > b:
        a, b = b, a
    fl = a.numerator // a.denominator
    if Fraction(fl) == a:
        return a
    if fl + 1 <= b:
        return Fraction(fl + 1)
    # a, b share the integer part; recurse on reciprocals of the fractional parts
    inner = _simplest_between(1 / (b - fl), 1 / (a - fl))
    return fl + 1 / inner


def check_segmental_continuity(o: PreferenceOracle, P, Q, R, grid_n: int, *,
                               tol: Fraction = SEGMENT_TOL, probes: int = 40) -> AxiomReport:
    """Locate the switch of t ↦ verdict((1-t)P + tR, Q) and test whether the
    upper set {t : mixture ≿ Q} and lower set {t : Q ≿ mixture} are closed
    at the switch.

    The switch is bracketed on the grid k/grid_n, refined by exact
    bisection, then snapped to the simplest rational in the bracket.  A
    strict verdict there whose one-sided neighbors (within tol·2^-j) all
    sit on the other side means one of the two sets is open.
    """
    if grid_n < 1:
        raise DomainError("grid_n must be positive")
    if o.compare(P, Q) is not Verdict.FIRST_STRICT or o.compare(Q, R) is not Verdict.FIRST_STRICT:
        raise DomainError("need P ≻ Q ≻ R")
    tol = Fraction(tol)
    calls = [0]

    def f(t: Fraction) -> Verdict:
        calls[0] += 1
        return o.compare(mix(1 - t, P, R), Q)

    details: dict = {"grid_n": grid_n}
    # coarse scan for non-monotone verdicts (an independence symptom)
    coarse = min(grid_n, 64)
    rank = {Verdict.FIRST_STRICT: 2, Verdict.INDIFFERENT: 1, Verdict.SECOND_STRICT: 0}
    scan = [rank[f(Fraction(k, coarse))] for k in range(coarse + 1)]
    details["monotone_on_coarse_scan"] = all(b <= a for a, b in zip(scan, scan[1:]))

    # last grid point in the upper set
    lo, hi = 0, grid_n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if f(Fraction(mid, grid_n)).weakly_first:
            lo = mid
        else:
            hi = mid
    details["grid_bracket"] = [lo / grid_n, hi / grid_n]
    a, b = Fraction(lo, grid_n), Fraction(hi, grid_n)
    indiff = None
    while b - a > tol:
        mid = (a + b) / 2
        v = f(mid)
        if v is Verdict.INDIFFERENT:
            indiff = mid
            break
        if v is Verdict.FIRST_STRICT:
            a = mid
        else:
            b = mid
    viol = []
    if indiff is not None:
        t_bar = indiff
        details["boundary"] = "indifference point found"
    else:
        r = _simplest_between(a, b)
        v = f(r)
        t_bar = r
        if v is Verdict.INDIFFERENT:
            details["boundary"] = "indifference point found"
        else:
            # a second_strict switch point is probed from the left, a first_strict one from the right
            sign = -1 if v is Verdict.SECOND_STRICT else 1
            side = [f(r + sign * tol / 2 ** j) for j in range(probes + 1)
                    if 0 <= r + sign * tol / 2 ** j <= 1]
            if side and all(s is v.flip() for s in side):
                which = "upper" if v is Verdict.SECOND_STRICT else "lower"
                viol.append({"check": "segmental_continuity", "P": _lj(P), "Q": _lj(Q), "R": _lj(R),
                             "t": _frac(r), "verdict": v.value, "open_set": which,
                             "probe_tol": _frac(tol), "probes": probes})
                details["boundary"] = f"{which} set open at t={r}"
            else:
                details["boundary"] = "bracket shrank to tol without an indifference point"
    details["t_bar"] = float(t_bar)
    details["oracle_calls"] = calls[0]
    return AxiomReport("segmental_continuity", calls[0], viol, details=details)


# ---------------------------------------------------------------------------
# weak*-closedness


@dataclass
class Candidate:
    """Convergent sequences A_k → A, B_k → B with a claimed A_k ≿ B_k."""

    generator: str
    A_seq: list
    B_seq: list
    A: SimpleLottery
    B: SimpleLottery


def closedness_witness(o: PreferenceOracle, A_seq, B_seq, A, B, *, family=None,
                       eps: float = CONVERGENCE_EPS, tail: int = TAIL) -> Optional[dict]:
    """A witness record if A_k ≿ B_k for all k, A ≺ B, and both sequences
    converge under the family; otherwise None."""
    family = family or DEFAULT_FAMILY
    if len(A_seq) != len(B_seq) or len(A_seq) < tail:
        return None
    if o.compare(A, B) is not Verdict.SECOND_STRICT:
        return None
    for Ak, Bk in zip(reversed(A_seq), reversed(B_seq)):
        if not o.compare(Ak, Bk).weakly_first:
            return None
    ca = converges(A_seq, A, family, eps, tail)
    cb = converges(B_seq, B, family, eps, tail)
    if not (ca.converged and cb.converged):
        return None
    return {"check": "weakstar_closedness", "A": _lj(A), "B": _lj(B),
            "A_seq": [_lj(L) for L in A_seq], "B_seq": [_lj(L) for L in B_seq],
            "scores_A": ca.scores[-tail:], "scores_B": cb.scores[-tail:],
            "eps": eps, "tail": tail, "family": family.describe()}


def _oriented_pair(o, rng, region):
    A, B = random_lottery(rng, region), random_lottery(rng, region)
    v = o.compare(A, B)
    if v is Verdict.INDIFFERENT:
        return None
    return (A, B) if v is Verdict.SECOND_STRICT else (B, A)


def _shift(x, d, region: Region):
    """x + d if that stays in x's component, else a shrunken shift."""
    piece = next(p for p in region.pieces if x in p)
    for _ in range(60):
        y = x + d
        if y in piece and y != x:
            return y
        d /= 2
    return None


def _gen_atom_drift(o, rng, region, K):
    pair = _oriented_pair(o, rng, region)
    if pair is None:
        return None
    A, B = pair
    drift_a = bool(rng.integers(2))
    L = A if drift_a else B
    offsets = {x: float(rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 1.0)) for x in L.atoms}
    seq = []
    for k in range(1, K + 1):
        atoms = []
        for x, p in L.items():
            y = _shift(x, offsets[x] * 2.0 ** -k, region)
            if y is None:
                return None
            atoms.append((y, p))
        seq.append(SimpleLottery(atoms))
    if drift_a:
        return Candidate("atom_drift", seq, [B] * K, A, B)
    return Candidate("atom_drift", [A] * K, seq, A, B)


def _gen_weight_drift(o, rng, region, K):
    pair = _oriented_pair(o, rng, region)
    if pair is None:
        return None
    A, B = pair
    S = random_lottery(rng, region)
    if rng.integers(2):
        return Candidate("weight_drift", [mix(1 - Fraction(1, 2 ** k), A, S) for k in range(1, K + 1)],
                         [B] * K, A, B)
    return Candidate("weight_drift", [A] * K,
                     [mix(1 - Fraction(1, 2 ** k), B, S) for k in range(1, K + 1)], A, B)


def _escape(o, base, other, ladder, K, base_first: bool):
    """(1 - 2^-k) base + 2^-k δ_{z_k} with the first ladder rung that keeps
    the required weak preference against ``other``; None if a k fails."""
    seq, j = [], 0
    for k in range(1, K + 1):
        w = Fraction(1, 2 ** k)
        while j < len(ladder):
            L = mix(1 - w, base, dirac(ladder[j]))
            v = o.compare(L, other) if base_first else o.compare(other, L)
            if v.weakly_first:
                seq.append(L)
                break
            j += 1
        else:
            return None
    return seq


def _gen_escape(o, rng, region, K):
    pair = _oriented_pair(o, rng, region)
    if pair is None:
        return None
    A, B = pair
    on_a = bool(rng.integers(2))
    direction = int(rng.choice([-1, 1]))
    ladder = escape_ladder(region, direction)
    if not ladder:
        return None
    if on_a:  # inflate the worse lottery
        seq = _escape(o, A, B, ladder, K, True)
        return None if seq is None else Candidate("lemma5_net", seq, [B] * K, A, B)
    seq = _escape(o, B, A, ladder, K, False)  # deflate the better one
    return None if seq is None else Candidate("lemma5_net", [A] * K, seq, A, B)


_FOCUS = (0.0, 1.0, -1.0, 0.5, 2.0)


def _focus_points(region: Region) -> list:
    pts = [x for x in _FOCUS if x in region]
    for p in region.pieces:
        for x, closed in ((p.lower, p.lower_closed), (p.upper, p.upper_closed)):
            if closed and x not in pts:
                pts.append(x)
    return pts


def _gen_semicontinuity(o, rng, region, K):
    pts = _focus_points(region)
    if not pts:
        return None
    x = pts[int(rng.integers(len(pts)))]
    side = int(rng.choice([-1, 1]))
    x1 = _shift(x, side * 1.0, region)
    if x1 is None:
        return None
    c = x1 - x
    xs = []
    for k in range(K):
        xk = x + c * 2.0 ** -k
        if xk == x or xk not in region:
            return None
        xs.append(xk)
    t = Fraction(1, 2 ** int(rng.integers(1, 5)))
    blend = mix(t, dirac(x1), dirac(x))
    D = [dirac(xk) for xk in xs]
    if rng.integers(2):  # upper jump: δ_{x_k} ≿ blend, δ_x ≺ blend
        return Candidate("semicontinuity", D, [blend] * K, dirac(x), blend)
    return Candidate("semicontinuity", [blend] * K, D, blend, dirac(x))


GENERATORS = {
    "atom_drift": _gen_atom_drift,
    "weight_drift": _gen_weight_drift,
    "lemma5_net": _gen_escape,
    "semicontinuity": _gen_semicontinuity,
}


def falsify_weakstar_closedness(o: PreferenceOracle, trials: int,
                                family: Optional[TestFunctionFamily] = None, rng_seed: int = 0, *,
                                region=None, generators: Sequence[str] = tuple(GENERATORS),
                                length: int = SEQUENCE_LENGTH, eps: float = CONVERGENCE_EPS,
                                tail: int = TAIL, max_witnesses: int = MAX_WITNESSES,
                                threads: Optional[int] = None) -> AxiomReport:
    """Search for A_k ≿ B_k with A_k → A, B_k → B but A ≺ B.

    Generators run round-robin by trial index.  Finding nothing never
    shows the order is closed.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    family = family or DEFAULT_FAMILY
    region = as_region(o.scope if region is None else region)
    gens = [(name, GENERATORS[name]) for name in generators]
    built = [None] * trials

    def trial(i):
        name, gen = gens[i % len(gens)]
        rng = np.random.default_rng([rng_seed, i])
        try:
            cand = gen(o, rng, region, length)
        except ScopeError:
            return None
        if cand is None:
            return None
        built[i] = name
        w = closedness_witness(o, cand.A_seq, cand.B_seq, cand.A, cand.B, family=family,
                               eps=eps, tail=tail)
        if w is None:
            return None
        w.update({"generator": name, "trial": i, "seed": rng_seed})
        return w

    viol, run = _run_trials(trial, trials, threads, max_witnesses)
    return AxiomReport("weakstar_closedness", run, viol, rng_seed, {
        "generators": list(generators), "length": length,
        "candidates_built": {name: built[:run].count(name) for name, _ in gens},
        "eps": eps, "tail": tail, "family": family.describe(), "region": region.to_json()})


# ---------------------------------------------------------------------------
# sequential continuity


def check_sequential_continuity(o: PreferenceOracle, exh: Exhaustion, per_level_trials: int,
                                family: Optional[TestFunctionFamily] = None, rng_seed: int = 0,
                                *, probes: Sequence = (), threads: Optional[int] = None,
                                **falsifier_kwargs) -> AxiomReport:
    """Structural checks on the exhaustion, then the closedness falsifier on
    the order restricted to each level."""
    structure = verify_exhaustion(exh, probe_grid=probes)
    if not structure.ok:
        raise DomainError(f"invalid exhaustion: {structure.failure}")
    levels, viol, total = [], [], 0
    for n, X in enumerate(exh.levels):
        if X.is_empty:
            levels.append({"level": n, "verdict": "skipped (empty level)", "trials": 0})
            continue
        rep = falsify_weakstar_closedness(restrict(o, X), per_level_trials, family, rng_seed,
                                          region=X, threads=threads, **falsifier_kwargs)
        total += rep.trials
        levels.append({"level": n, "verdict": rep.verdict, "trials": rep.trials,
                       "region": X.to_json()})
        for w in rep.violations:
            w["level"] = n
            w["region"] = X.to_json()
            viol.append(w)
    return AxiomReport("sequential_continuity", total, viol, rng_seed,
                       {"exhaustion": structure.to_json(), "levels": levels})


# ---------------------------------------------------------------------------
# mixture-set laws


def _law_failures(P, Q, s: Fraction, t: Fraction) -> list:
    out = []
    if mix(1, P, Q) != P:
        out.append(1)
    if mix(t, P, Q) != mix(1 - t, Q, P):
        out.append(2)
    if mix(t, mix(s, P, Q), Q) != mix(s * t, P, Q):
        out.append(3)
    return out


def check_mixture_laws(trials: int, rng_seed: int, *, max_witnesses: int = MAX_WITNESSES,
                       threads: Optional[int] = None) -> AxiomReport:
    """1x + 0y = x; tx + (1-t)y = (1-t)y + tx;
    t(sx + (1-s)y) + (1-t)y = st x + (1-st) y, all by exact equality."""
    if trials < 1:
        raise DomainError("trials must be at least 1")

    def trial(i):
        rng = np.random.default_rng([rng_seed, i])
        P, Q = random_lottery(rng), random_lottery(rng)
        s, t = random_rational(rng), random_rational(rng)
        bad = _law_failures(P, Q, s, t)
        if not bad:
            return None
        return {"check": "mixture_laws", "trial": i, "seed": rng_seed, "laws": bad,
                "P": _lj(P), "Q": _lj(Q), "s": _frac(s), "t": _frac(t)}

    viol, run = _run_trials(trial, trials, threads, max_witnesses)
    return AxiomReport("mixture_laws", run, viol, rng_seed, {"laws": [1, 2, 3]})


# ---------------------------------------------------------------------------
# replay


def replay(witness: dict, o: Optional[PreferenceOracle] = None, *, family=None) -> bool:
    """True iff the witness still exhibits its violation."""
    kind = witness.get("check")
    if kind == "mixture_laws":
        P, Q = _lf(witness["P"]), _lf(witness["Q"])
        return bool(_law_failures(P, Q, Fraction(witness["s"]), Fraction(witness["t"])))
    if o is None:
        raise DomainError(f"replaying a {kind} witness needs the oracle")
    if kind == "independence":
        P, Q, R = (_lf(witness[k]) for k in "PQR")
        t = Fraction(witness["t"])
        return (o.compare(P, Q) is Verdict.FIRST_STRICT
                and o.compare(mix(1 - t, P, R), mix(1 - t, Q, R)) is not Verdict.FIRST_STRICT)
    if kind == "transitivity":
        P, Q, R = (_lf(witness[k]) for k in "PQR")
        return (o.compare(P, Q).weakly_first and o.compare(Q, R).weakly_first
                and not o.compare(P, R).weakly_first)
    if kind == "antisymmetry":
        P, Q = _lf(witness["P"]), _lf(witness["Q"])
        return o.compare(P, Q) is not o.compare(Q, P).flip()
    if kind == "reflexivity":
        P = _lf(witness["P"])
        return o.compare(P, P) is not Verdict.INDIFFERENT
    if kind == "segmental_continuity":
        P, Q, R = (_lf(witness[k]) for k in "PQR")
        r, tol = Fraction(witness["t"]), Fraction(witness["probe_tol"])
        f = lambda t: o.compare(mix(1 - t, P, R), Q)  # noqa: E731
        v = f(r)
        if v.value != witness["verdict"] or v is Verdict.INDIFFERENT:
            return False
        sign = -1 if v is Verdict.SECOND_STRICT else 1
        side = [f(r + sign * tol / 2 ** j) for j in range(int(witness["probes"]) + 1)
                if 0 <= r + sign * tol / 2 ** j <= 1]
        return bool(side) and all(s is v.flip() for s in side)
    if kind == "weakstar_closedness":
        if "region" in witness:
            o = restrict(o, Region.from_json(witness["region"]))
        fam = family or DEFAULT_FAMILY
        A_seq = [_lf(d) for d in witness["A_seq"]]
        B_seq = [_lf(d) for d in witness["B_seq"]]
        w = closedness_witness(o, A_seq, B_seq, _lf(witness["A"]), _lf(witness["B"]), family=fam,
                               eps=witness["eps"], tail=witness["tail"])
        return w is not None
    raise DomainError(f"unknown witness kind {kind!r}")


def replay_report(report: AxiomReport, o: Optional[PreferenceOracle] = None, **kwargs) -> list:
    """Replay every violation of a report; one boolean per witness."""
    return [replay(w, o, **kwargs) for w in report.violations]


__all__ = [
    "AxiomReport", "Candidate", "GENERATORS", "FALSIFIED", "PASS", "check_independence",
    "check_mixture_laws", "check_segmental_continuity", "check_sequential_continuity",
    "check_weak_order", "closedness_witness", "falsify_weakstar_closedness", "replay",
    "replay_report",
]
