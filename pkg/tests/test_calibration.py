import math
from fractions import Fraction

import numpy as np
import pytest

from vnm.calibration import (DEFAULT_TOL, CalibrationResult, affine_match, calibrate,
                             calibrate_point, calibrate_point_detail, parse_grid, pick_anchors)
from vnm.errors import CalibrationError, DomainError, NoFitError
from vnm.lottery import dirac
from vnm.preference import PreferenceOracle, Verdict, from_utility
from vnm.space import POSITIVE_HALF_LINE
from vnm.utility import affine, constant, crra, linear, log_utility, sqrt_utility

E = math.e
TOL = DEFAULT_TOL
LOG = from_utility(log_utility())
LOG_GRID = list(np.exp(np.linspace(-2.0, 2.0, 50)))


def test_calibrate_point_examples():
    assert calibrate_point(LOG, math.sqrt(E), E, 1.0, TOL) == pytest.approx(0.5, abs=TOL)
    assert calibrate_point(LOG, E * E, E, 1.0, TOL) == pytest.approx(2.0, abs=4 * TOL)
    assert calibrate_point(LOG, 1 / E, E, 1.0, TOL) == pytest.approx(-1.0, abs=4 * TOL)


def test_pick_anchors_examples():
    assert pick_anchors(LOG, [1.0, E]) == (E, 1.0)
    assert pick_anchors(from_utility(constant(5.0)), [1.0, 2.0, 3.0]) is None
    assert pick_anchors(from_utility(linear(-1.0)), [1.0, 2.0]) == (1.0, 2.0)


def test_pick_anchors_preconditions():
    with pytest.raises(DomainError):
        pick_anchors(LOG, [])
    with pytest.raises(DomainError):
        pick_anchors(LOG, [-1.0, 2.0])


def test_anchor_precondition():
    with pytest.raises(DomainError):
        calibrate_point(LOG, 2.0, 1.0, E)
    with pytest.raises(DomainError):
        calibrate_point(LOG, 2.0, E, 1.0, tol=0.0)


def test_log_grid_table():
    res = calibrate(LOG, LOG_GRID, TOL, anchors=(E, 1.0))
    want = np.log(LOG_GRID)
    got = np.array([res.table[x] for x in LOG_GRID])
    assert np.max(np.abs(got - want)) <= 1e-8
    a, b, r = affine_match(res, log_utility(), LOG_GRID)
    assert r <= 1e-8 and a == pytest.approx(1.0) and b == pytest.approx(0.0, abs=1e-8)
    assert res.verification["mismatches"] == 0


def test_affine_transform_gives_the_same_table():
    a = calibrate(LOG, LOG_GRID, TOL, anchors=(E, 1.0))
    b = calibrate(from_utility(affine(2, 3, log_utility())), LOG_GRID, TOL, anchors=(E, 1.0))
    assert a.table == b.table


def test_anchors_are_exact():
    res = calibrate(from_utility(sqrt_utility()), [0.5, 1.0, 4.0, 9.0])
    x_star, y_star = res.anchors
    assert (x_star, y_star) == (9.0, 0.5)
    assert res.table[x_star] == 1.0 and res.table[y_star] == 0.0


def test_constant_oracle_sets_the_flag():
    res = calibrate(from_utility(constant(5.0)), [1.0, 2.0, 3.0])
    assert res.constant_flag
    assert res.table == {}
    assert res.to_json()["anchors"] is None


def test_affine_match_examples():
    grid = list(np.linspace(0.5, 20.0, 50))
    a, b, r = affine_match(affine(2, 3, log_utility()), log_utility(), grid)
    assert a == pytest.approx(2.0, abs=1e-9) and b == pytest.approx(3.0, abs=1e-9) and r < 1e-9
    a, b, r = affine_match(sqrt_utility(), sqrt_utility(), grid)
    assert a == pytest.approx(1.0, abs=1e-12) and b == pytest.approx(0.0, abs=1e-12) and r < 1e-12


def test_affine_match_crra_table():
    grid = parse_grid("log:50:[0.1,10]")
    res = calibrate(from_utility(crra(2)), grid, TOL)
    a, b, r = affine_match(res, crra(2), grid)
    assert a > 0 and r < 100 * TOL


def test_affine_match_errors():
    grid = [1.0, 2.0, 3.0]
    with pytest.raises(NoFitError):
        affine_match(log_utility(), constant(1.0), grid)
    with pytest.raises(DomainError):
        affine_match(log_utility(), log_utility(), grid[:2])


def test_iteration_bound():
    res = calibrate(LOG, LOG_GRID, TOL, anchors=(E, 1.0))
    bound = math.ceil(math.log2(1 / TOL)) + 1
    assert max(res.iterations_used.values()) <= bound


@pytest.mark.parametrize("x", [0.2, 0.5, 1.0, 1.3, 2.0, E, 3.5, 7.0, 20.0])
def test_case_consistency(x):
    x_star, y_star = E, 1.0
    val, case, _ = calibrate_point_detail(LOG, x, x_star, y_star)
    dx, dxs, dys = dirac(x), dirac(x_star), dirac(y_star)
    inside = LOG.weakly_prefers(dxs, dx) and LOG.weakly_prefers(dx, dys)
    assert (0 <= val <= 1) == inside
    assert (val > 1) == LOG.prefers(dx, dxs)
    assert (val < 0) == LOG.prefers(dys, dx)
    assert case == ("inside" if inside else "above" if val > 1 else "below")


def test_repeat_calibration_is_bitwise_identical():
    grid = LOG_GRID[::5]
    a = calibrate(LOG, grid, TOL)
    b = calibrate(LOG, grid, TOL)
    assert a.table == b.table
    assert a.to_json() == b.to_json()


def _zigzag_oracle():
    # log EU, except that gambles between e and 1 against δ_√e zigzag in the weight on e
    target = dirac(math.sqrt(E))

    def compare(P, Q):
        if Q == target and P.support <= {E, 1.0}:
            w = P.atoms.get(E, Fraction(0))
            good = Fraction(1, 4) < w < Fraction(1, 2) or w > Fraction(5, 8)
            return Verdict.FIRST_STRICT if good else Verdict.SECOND_STRICT
        if P == target and Q.support <= {E, 1.0}:
            return compare(Q, P).flip()
        return LOG.compare(P, Q)

    return PreferenceOracle(compare, POSITIVE_HALF_LINE, "zigzag")


def test_non_monotone_oracle_raises_calibration_error():
    with pytest.raises(CalibrationError, match="independence"):
        calibrate_point(_zigzag_oracle(), math.sqrt(E), E, 1.0)


def test_iteration_cap_raises_calibration_error():
    # log 2 is not dyadic, so the bracket never closes before the cap
    with pytest.raises(CalibrationError):
        calibrate_point_detail(LOG, 2.0, E, 1.0, tol=1e-30, cap=8)


def test_parse_grid():
    assert parse_grid("lin:3:[0,1]") == [0.0, 0.5, 1.0]
    g = parse_grid("log:3:[1,100]")
    assert g[1] == pytest.approx(10.0)
    with pytest.raises(DomainError):
        parse_grid("cubic:3:[0,1]")


def test_result_json_shape():
    res = calibrate(LOG, [1.0, 2.0, E], TOL)
    js = res.to_json()
    assert js["anchors"] == {"x_star": E, "y_star": 1.0}
    assert [p["x"] for p in js["points"]] == [1.0, 2.0, E]
    assert isinstance(res, CalibrationResult)
