import math

import pytest

from vnm.errors import DomainError, ValidationError
from vnm.space import (NONNEGATIVE_HALF_LINE, POSITIVE_HALF_LINE, REAL_LINE, Interval,
                       OutcomeSpace, Region, parse_space)


def test_infinite_endpoints_are_open():
    iv = Interval(-math.inf, 3.0, True, True)
    assert not iv.lower_closed
    assert iv.upper_closed


def test_membership_respects_open_ends():
    assert 0.0 not in POSITIVE_HALF_LINE
    assert 0.0 in NONNEGATIVE_HALF_LINE
    assert 1e308 in POSITIVE_HALF_LINE
    assert float("nan") not in REAL_LINE


def test_empty_and_degenerate():
    assert Interval(1.0, 0.0).is_empty
    assert Interval(1.0, 1.0, True, False).is_empty
    assert not Interval.closed(2.0, 2.0).is_empty


def test_outcome_space_needs_interior():
    with pytest.raises((DomainError, ValidationError)):
        OutcomeSpace(1.0, 1.0)


def test_closedness_is_relative_to_the_space():
    # [1, inf[ is closed in ]0, inf[; ]0, 1] is closed in ]0, inf[ too
    assert Interval(1.0, math.inf, True, False).is_closed_in(POSITIVE_HALF_LINE)
    assert Interval(0.0, 1.0, False, True).is_closed_in(POSITIVE_HALF_LINE)
    assert not Interval(0.5, 1.0, False, True).is_closed_in(POSITIVE_HALF_LINE)
    assert POSITIVE_HALF_LINE.is_closed_in(POSITIVE_HALF_LINE)
    assert POSITIVE_HALF_LINE.is_open_in(POSITIVE_HALF_LINE)


def test_interior_in_space():
    X = Interval.closed(0.0, 1.0)
    space = NONNEGATIVE_HALF_LINE
    inner = X.interior_in(space)
    # 0 is a boundary point of the space, so it stays interior
    assert 0.0 in inner
    assert 1.0 not in inner


def test_region_merges_and_orders():
    r = Region.of(Interval.closed(2.0, 3.0), Interval.closed(0.0, 1.0), Interval(1.0, 2.0, False, False))
    assert len(r.pieces) == 1
    assert r.pieces[0] == Interval.closed(0.0, 3.0)


def test_region_subset_needs_one_component():
    two = Region.of(Interval.closed(0.0, 1.0), Interval.closed(2.0, 3.0))
    assert not Region.of(Interval.closed(0.5, 2.5)).issubset(two)
    assert Region.of(Interval.closed(2.1, 2.9)).issubset(two)


def test_region_json_round_trip():
    r = Region.of(Interval(-math.inf, -1.0, False, True), Interval.open(1.0, 4.0))
    assert Region.from_json(r.to_json()) == r


@pytest.mark.parametrize("text,expected", [
    ("]0,inf[", POSITIVE_HALF_LINE),
    ("[0,inf[", NONNEGATIVE_HALF_LINE),
    ("]-inf,inf[", REAL_LINE),
])
def test_parse_space(text, expected):
    assert parse_space(text) == expected
