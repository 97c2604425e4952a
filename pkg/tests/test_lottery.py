import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given

from strategies import lotteries, probabilities
from vnm.errors import DomainError, ValidationError
from vnm.lottery import (DensityMeasure, SimpleLottery, dirac, discretize, mix, random_lottery,
                         rationalize, support)
from vnm.space import POSITIVE_HALF_LINE, Interval
from vnm.utility import expectation, linear
from vnm.weakstar import dudley_distance


def test_dirac_and_support():
    assert dirac(2).atoms == {2: 1}
    assert support(dirac(2)) == {2}
    assert support(dirac(7)) == {7}


def test_mix_examples():
    assert mix(1, dirac(1), dirac(3)) == dirac(1)
    assert mix(Fraction(1, 2), dirac(1), dirac(3)).atoms == {1: Fraction(1, 2), 3: Fraction(1, 2)}
    t = Fraction(1, 3)
    a, b = mix(t, dirac(0), dirac(5)), mix(1 - t, dirac(5), dirac(0))
    assert a == b
    assert a.atoms == {0: Fraction(1, 3), 5: Fraction(2, 3)}
    half = Fraction(1, 2)
    nested = mix(half, mix(half, dirac(0), dirac(4)), dirac(4))
    assert nested == mix(Fraction(1, 4), dirac(0), dirac(4))
    assert nested.atoms == {0: Fraction(1, 4), 4: Fraction(3, 4)}


def test_duplicate_atoms_merge():
    assert support(mix(Fraction(1, 2), dirac(1), dirac(1))) == {1}
    L = SimpleLottery([(1.0, "1/4"), (1.0, "1/4"), (2.0, "1/2")])
    assert L.atoms == {1.0: Fraction(1, 2), 2.0: Fraction(1, 2)}


def test_support_of_two_atoms():
    assert support(SimpleLottery({1: Fraction(1, 2), 3: Fraction(1, 2)})) == {1, 3}


def test_weights_must_sum_to_one():
    with pytest.raises(ValidationError):
        SimpleLottery({1.0: Fraction(1, 3), 2.0: Fraction(1, 3)})
    with pytest.raises(ValidationError):
        SimpleLottery({1.0: Fraction(-1, 2), 2.0: Fraction(3, 2)})


def test_float_weights_are_refused():
    with pytest.raises(DomainError):
        SimpleLottery({1.0: 0.5, 2.0: 0.5})


def test_mix_weight_out_of_range():
    with pytest.raises(DomainError):
        mix(Fraction(3, 2), dirac(0), dirac(1))


def test_non_finite_outcomes_rejected():
    with pytest.raises(DomainError):
        dirac(math.inf)
    with pytest.raises(DomainError):
        dirac(float("nan"))


def test_dirac_space_check():
    with pytest.raises(DomainError):
        dirac(-1.0, POSITIVE_HALF_LINE)


def test_json_round_trip_with_big_outcome():
    big = mpmath.mpf(2) ** 5000
    L = mix(Fraction(1, 3), dirac(big), dirac(1.5))
    back = SimpleLottery.from_json(L.to_json())
    assert back[1.5] == Fraction(2, 3)
    assert mpmath.almosteq(back.max_outcome(), big, rel_eps=mpmath.mpf(10) ** -15)


def test_json_rejects_extra_keys():
    with pytest.raises(ValidationError):
        SimpleLottery.from_json({"atoms": [{"x": 1.0, "p": "1/1"}], "extra": 1})


def test_discretize_uniform_midpoints():
    M = DensityMeasure.from_catalog("uniform", (0.0, 1.0))
    assert discretize(M, 2).atoms == {0.25: Fraction(1, 2), 0.75: Fraction(1, 2)}
    L4 = discretize(M, 4)
    assert sum(Fraction(x) * p for x, p in L4.items()) == Fraction(1, 2)


def test_discretize_triangular_close_to_measure():
    M = DensityMeasure.from_catalog("triangular", (0.0, 1.0))  # density 2x
    assert M.pdf(0.5) == pytest.approx(1.0, rel=1e-6)
    assert dudley_distance(M, discretize(M, 100)) < 0.02


def test_triangular_reference_quadrature():
    # independent oracle: E[x] = 2/3 for density 2x on [0, 1]
    M = DensityMeasure.from_catalog("triangular", (0.0, 1.0))
    xs, ws = M.quadrature(10 ** 6)
    assert float(np.sum(xs * ws)) == pytest.approx(2 / 3, abs=1e-9)


def test_density_must_integrate_to_one():
    with pytest.raises(ValidationError):
        DensityMeasure((0.0, 1.0), lambda x: 2.0 * np.ones_like(x))


def test_density_json_round_trip():
    M = DensityMeasure.from_catalog("beta", (0.0, 2.0), alpha=2.0, beta=3.0)
    M2 = DensityMeasure.from_json(M.to_json())
    assert M2.to_json() == M.to_json()
    assert M2.pdf(0.7) == pytest.approx(M.pdf(0.7))


def test_rationalize_sums_to_one():
    fr = rationalize([0.1, 0.2, 0.7, 0.0])
    assert sum(fr) == 1
    assert fr[3] == 0
    assert all(f > 0 for f in fr[:3])


def test_random_lottery_respects_region():
    rng = np.random.default_rng(3)
    region = Interval.closed(2.0, 5.0)
    for _ in range(50):
        L = random_lottery(rng, region)
        assert all(x in region for x in L.atoms)
        assert 1 <= len(L) <= 5
        assert all(p.denominator <= 2 ** 16 for p in L.atoms.values())


def test_random_lottery_is_seeded():
    a = random_lottery(np.random.default_rng(11), POSITIVE_HALF_LINE)
    b = random_lottery(np.random.default_rng(11), POSITIVE_HALF_LINE)
    assert a == b


@given(lotteries(), lotteries(), probabilities(), probabilities())
def test_mixture_set_laws(P, Q, s, t):
    assert mix(1, P, Q) == P
    assert mix(t, P, Q) == mix(1 - t, Q, P)
    assert mix(t, mix(s, P, Q), Q) == mix(s * t, P, Q)


@given(lotteries(), lotteries(), probabilities())
def test_mix_keeps_total_mass_and_support(P, Q, t):
    M = mix(t, P, Q)
    assert sum(M.atoms.values()) == 1
    assert M.support <= P.support | Q.support
    if 0 < t < 1:
        assert M.support == P.support | Q.support


@given(lotteries(), lotteries(), probabilities())
def test_mixture_expectation_is_exactly_linear(P, Q, t):
    u = linear()
    lhs = sum(Fraction(x) * p for x, p in mix(t, P, Q).items())
    rhs = t * sum(Fraction(x) * p for x, p in P.items()) + (1 - t) * sum(Fraction(x) * p for x, p in Q.items())
    assert lhs == rhs
    assert expectation(mix(t, P, Q), u) == pytest.approx(float(rhs), abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3, 7, 64, 1000])
def test_discretize_is_valid_for_every_k(k):
    M = DensityMeasure.from_catalog("beta", (0.0, 1.0), alpha=0.5, beta=0.5)
    L = discretize(M, k)
    assert sum(L.atoms.values()) == 1
    assert all(0 < x < 1 for x in L.atoms)
