"""Acceptance criteria, one test each, at the stated tolerances and budgets.

Every test records a one-line PASS/FAIL summary (shown in the terminal
summary under "acceptance criteria") before asserting.
"""

import math
import time

import mpmath
import numpy as np

from vnm.axioms import (check_independence, check_mixture_laws, check_segmental_continuity,
                        check_sequential_continuity, check_weak_order, closedness_witness,
                        falsify_weakstar_closedness, replay, replay_report)
from vnm.calibration import affine_match, calibrate, parse_grid
from vnm.exhaustion import cover_index, theorem1_exhaustion, trivial_exhaustion, verify_exhaustion
from vnm.lottery import DensityMeasure, dirac, discretize, mix, random_lottery, random_rational
from vnm.preference import cycle_oracle, from_utility, lexicographic, rank_dependent
from vnm.space import POSITIVE_HALF_LINE, REAL_LINE, Interval
from vnm.utility import (affine, constant, crra, expectation, linear, log_utility, logistic,
                         quadratic, sqrt_utility, step)
from vnm.weakstar import DEFAULT_FAMILY, converges, dudley_distance, lemma5_net, semicontinuity_net

TOL = 1e-10
E = math.e
ROUND_TRIP = {"log": log_utility(), "sqrt": sqrt_utility(), "crra(1/2)": crra(0.5),
              "crra(2)": crra(2), "logistic": logistic()}


def _fsum_value(P, u):
    # independent expectation: compensated float sum of p * u(x)
    return math.fsum(float(p) * float(u(float(x))) for x, p in P.items())


def test_criterion_1_mixture_laws(record_criterion):
    t0 = time.perf_counter()
    rep = check_mixture_laws(10 ** 4, 0)
    dt = time.perf_counter() - t0
    ok = rep.trials == 10 ** 4 and not rep.violations and dt < 5
    record_criterion(1, ok, f"mixture-set laws: {rep.trials} trials, {len(rep.violations)} violations, {dt:.2f}s (< 5s)")
    assert ok


def test_criterion_2_expectation_linearity(record_criterion):
    # utilities whose values stay O(1e3) on the sampling window, where 1e-12 is above double rounding
    pool = [log_utility(), sqrt_utility(), crra(0.5), crra(2), logistic(), linear(), step()]
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(10 ** 4):
        u = pool[int(rng.integers(len(pool)))]
        P, Q = random_lottery(rng, u.domain), random_lottery(rng, u.domain)
        t = random_rational(rng)
        lhs = expectation(mix(t, P, Q), u)
        rhs = float(t) * expectation(P, u) + float(1 - t) * expectation(Q, u)
        worst = max(worst, abs(lhs - rhs))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 5
    record_criterion(2, ok, f"expectation linearity: 1e4 draws, max gap {worst:.2e} (<= 1e-12), {dt:.2f}s (< 5s)")
    assert ok


def test_criterion_3_calibration_round_trip(record_criterion):
    grid = parse_grid("log:50:[0.1,10]")
    rows, ok = [], True
    for name, u in ROUND_TRIP.items():
        t0 = time.perf_counter()
        res = calibrate(from_utility(u), grid, TOL)
        dt = time.perf_counter() - t0
        a, b, r = affine_match(res, u, grid)
        good = a > 0 and r < 100 * TOL and dt < 2
        ok &= good
        rows.append(f"{name} a={a:.6g} res={r:.1e} {dt:.2f}s")
    record_criterion(3, ok, "calibration round-trip (res < 1e-8, a > 0, < 2s each): " + "; ".join(rows))
    assert ok


def test_criterion_4_affine_uniqueness(record_criterion):
    grid = parse_grid("log:50:[0.1,10]")
    rng = np.random.default_rng(4)
    mismatched, worst, ok = 0, 0.0, True
    for u in ROUND_TRIP.values():
        o1, o2 = from_utility(u), from_utility(affine(2, 3, u))
        for _ in range(10 ** 3):
            P, Q = random_lottery(rng, u.domain), random_lottery(rng, u.domain)
            mismatched += o1.compare(P, Q) is not o2.compare(P, Q)
        c1, c2 = calibrate(o1, grid, TOL), calibrate(o2, grid, TOL)
        a, b, r = affine_match(c1, c2, grid)
        worst = max(worst, r)
        ok &= a > 0
    ok &= mismatched == 0 and worst < 100 * TOL
    record_criterion(4, ok, f"affine uniqueness: {mismatched} verdict mismatches over 5x1e3 pairs, "
                            f"table residual {worst:.1e} (< 1e-8)")
    assert ok


def test_criterion_5_independence(record_criterion):
    oracles = {"log": log_utility(), "sqrt": sqrt_utility(), "crra(1/2)": crra(0.5),
               "crra(2)": crra(2), "logistic": logistic(), "linear": linear(),
               "quadratic": quadratic(), "step": step(), "constant": constant(1.0)}
    failures = []
    t0 = time.perf_counter()
    for name, u in oracles.items():
        rep = check_independence(from_utility(u), 10 ** 4, 5)
        if rep.violations or rep.trials != 10 ** 4:
            failures.append(name)
    o = rank_dependent(linear(), 2)
    rdu = check_independence(o, 10 ** 3, 5, region=Interval.closed(0.0, 10.0))
    replays = replay_report(rdu, o)
    dt = time.perf_counter() - t0
    first = rdu.violations[0]["trial"] if rdu.violations else None
    ok = not failures and rdu.falsified and all(replays)
    record_criterion(5, ok, f"independence: {len(oracles)} utility oracles x 1e4 trials, failures={failures}; "
                            f"rank-dependent falsified at trial {first}, replays={replays}, {dt:.1f}s")
    assert ok


def test_criterion_6_segmental_threshold(record_criterion):
    grid_n = 10 ** 4
    us = list(ROUND_TRIP.values())
    rng = np.random.default_rng(6)
    done, worst = 0, 0.0
    while done < 100:
        u = us[done % len(us)]
        o = from_utility(u)
        trio = [random_lottery(rng, POSITIVE_HALF_LINE) for _ in range(3)]
        vals = [_fsum_value(L, u) for L in trio]
        order = np.argsort(vals)[::-1]
        P, Q, R = (trio[i] for i in order)
        if not (o.prefers(P, Q) and o.prefers(Q, R)):
            continue
        eP, eQ, eR = (vals[i] for i in order)
        want = (eP - eQ) / (eP - eR)
        rep = check_segmental_continuity(o, P, Q, R, grid_n)
        worst = max(worst, abs(rep.details["t_bar"] - want))
        done += 1
    ok = worst <= 1 / grid_n
    record_criterion(6, ok, f"segmental threshold: 100 instances, max |t_bar - closed form| {worst:.1e} (<= 1e-4)")
    assert ok


def test_criterion_7_escaping_mass_net(record_criterion):
    t0 = time.perf_counter()
    u = log_utility()
    o = from_utility(u)
    x_star, x0 = 1.0, E
    net = [lemma5_net(u, x_star, x0, n) for n in range(31)]
    value_err = max(abs(expectation(P, u) - (1 + 2.0 ** -n)) for n, P in enumerate(net))
    beats = all(o.prefers(P, dirac(x0)) for P in net)
    scores = [dudley_distance(P, dirac(x_star)) for P in net]
    close = all(s < 0.01 for s in scores[12:])
    anchor = o.prefers(dirac(x0), dirac(x_star))
    w = closedness_witness(o, net, [dirac(x0)] * len(net), dirac(x_star), dirac(x0))
    dt = time.perf_counter() - t0
    ok = value_err <= 1e-9 and beats and close and anchor and w is not None and replay(w, o) and dt < 1
    record_criterion(7, ok, f"escaping-mass net (log): |E - (1 + 2^-n)| <= {value_err:.1e}, P_n > δ_e for all n <= 30: "
                            f"{beats}, score at n=12 {scores[12]:.1e}, witness {w is not None}, {dt:.2f}s (< 1s)")
    assert ok


def test_criterion_8_semicontinuity(record_criterion):
    u = step()
    o = from_utility(u)
    net = semicontinuity_net(u, 0.0, 0.5, 1000)
    A_seq, B_seq, A, B = net.sequences()
    above = all(o.prefers(dirac(xk), net.blend) for xk in net.outcomes)
    below = o.prefers(net.blend, dirac(0.0))
    conv = converges([dirac(xk) for xk in net.outcomes], dirac(0.0), eps=1e-2).converged
    w = closedness_witness(o, A_seq, B_seq, A, B, eps=1e-2)
    ok = above and below and conv and w is not None and replay(w, o)
    record_criterion(8, ok, f"jump net (step at 0): δ_(x_k) > P for k <= 1000: {above}, P > δ_0: {below}, "
                            f"converged at 1e-2: {conv}, replayable witness: {w is not None}")
    assert ok


def test_criterion_9_exhaustion_levels(record_criterion):
    t0 = time.perf_counter()
    u = log_utility()
    o = from_utility(u)
    exh = theorem1_exhaustion(u, 10)
    structure = verify_exhaustion(exh, POSITIVE_HALF_LINE, np.exp(np.linspace(-9, 9, 10 ** 4)))
    levels = check_sequential_continuity(o, exh, 10 ** 3)
    trivial = falsify_weakstar_closedness(o, 10 ** 3, rng_seed=0,
                                          region=trivial_exhaustion(POSITIVE_HALF_LINE).levels[0])
    via = sorted({w["generator"] for w in trivial.violations})
    dt = time.perf_counter() - t0
    ok = structure.ok and not levels.falsified and trivial.falsified and "lemma5_net" in via and dt < 30
    record_criterion(9, ok, f"exhaustion: structure ok={structure.ok} on 1e4 probes, 11 levels x 1e3 trials "
                            f"{levels.verdict}; trivial exhaustion {trivial.verdict} via {via}, {dt:.1f}s (< 30s)")
    assert ok


def _least_level(m):
    # least n with m < n + 1/2
    return 0 if m < 0.5 else int(mpmath.floor(m - mpmath.mpf(0.5))) + 1


def _analytic_cover(lo_val, hi_val):
    """Least n with the u-image [u(lo), u(hi)] inside ]-n - 1/2, n + 1/2[, from
    interval enclosures; None when the enclosures straddle a level boundary."""
    ends = (lo_val, hi_val)
    m_max = max(max(abs(v.a), abs(v.b)) for v in ends)
    m_min = max(min(abs(v.a), abs(v.b)) for v in ends)
    n_lo, n_hi = _least_level(m_min), _least_level(m_max)
    return n_lo if n_lo == n_hi else None


def test_criterion_10_covering(record_criterion):
    iv = mpmath.iv
    cases = {"log": (log_utility(), POSITIVE_HALF_LINE, lambda x: iv.log(iv.mpf(x))),
             "linear": (linear(), Interval.closed(-20.0, 20.0), lambda x: iv.mpf(x))}
    rng = np.random.default_rng(10)
    mismatches, checked = [], 0
    for name, (u, region, image) in cases.items():
        exh = theorem1_exhaustion(u, 25)
        count = 0
        while count < 100:
            if count % 2:
                M = random_lottery(rng, region)
                lo, hi = min(M.atoms), max(M.atoms)
            else:
                lo, hi = sorted(float(random_lottery(rng, region, max_atoms=1).max_outcome())
                                for _ in range(2))
                if not lo < hi:
                    continue
                M = DensityMeasure.from_catalog("uniform", (lo, hi))
            want = _analytic_cover(image(lo), image(hi))
            if want is None:
                continue
            got = cover_index(exh, M)
            if got != want:
                mismatches.append((name, lo, hi, got, want))
            count += 1
            checked += 1
    M = DensityMeasure.from_catalog("uniform", (0.0, 1.0))
    L = DEFAULT_FAMILY.lipschitz
    bounds = {k: dudley_distance(M, discretize(M, k)) for k in (4, 16, 64, 256)}
    within = all(d <= L / (2 * k) for k, d in bounds.items())
    ok = not mismatches and within
    record_criterion(10, ok, f"covering: {checked} measures, {len(mismatches)} cover_index mismatches; "
                             "discretization " + ", ".join(f"k={k}: {d:.2e} <= {L / (2 * k):.2e}"
                                                           for k, d in bounds.items()))
    assert ok


def _falsified_runs():
    A, B, C = dirac(1.0), dirac(2.0), dirac(3.0)
    cyc = cycle_oracle(A, B, C)
    rdu = rank_dependent(linear(), 2)
    lex = lexicographic(linear(), quadratic())
    log_o = from_utility(log_utility())
    step_o = from_utility(step())
    return [
        (cyc, lambda: check_weak_order(cyc, [A, B, C])),
        (rdu, lambda: check_independence(rdu, 10 ** 3, 11, region=Interval.closed(0.0, 10.0))),
        (lex, lambda: check_segmental_continuity(lex, dirac(1.0), dirac(0.5), dirac(0.0), 10 ** 4)),
        (log_o, lambda: falsify_weakstar_closedness(log_o, 300, rng_seed=11)),
        (step_o, lambda: falsify_weakstar_closedness(step_o, 300, rng_seed=11, region=REAL_LINE)),
        (log_o, lambda: check_sequential_continuity(log_o, trivial_exhaustion(POSITIVE_HALF_LINE), 300,
                                                    rng_seed=11)),
    ]


def test_criterion_11_determinism(record_criterion):
    replayed, total, same, falsified = 0, 0, 0, 0
    runs = _falsified_runs()
    for o, make in runs:
        first, second = make(), make()
        falsified += first.falsified
        same += first.to_json() == second.to_json()
        for ok in replay_report(first, o):
            total += 1
            replayed += ok
    ok = falsified == len(runs) and replayed == total and same == len(runs)
    record_criterion(11, ok, f"determinism: {falsified}/{len(runs)} reports falsified, {replayed}/{total} witnesses "
                             f"replay, {same}/{len(runs)} reruns identical")
    assert ok
