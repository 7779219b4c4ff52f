from fractions import Fraction as F

import pytest

from laminate_forge.analysis import (TailTable, default_thresholds, degeneracy_profile, fit_exponent,
                                     mass_profile, pushforward_volume, rank_collapse, tail, tail_inverse)
from laminate_forge.errors import InsufficientPoints
from laminate_forge.laminate import Laminate, det_expectation, replay
from laminate_forge.matrix import diag, identity
from laminate_forge.sets import EXACT_3D, A, B
from laminate_forge.staircase3d import split_A_3d

E = EXACT_3D
DIRAC = Laminate.dirac(identity(3))
HALVES = Laminate([(F(1, 2), diag(F(1, 2), 1, 1)), (F(1, 2), diag(F(3, 2), 1, 1))])


def synthetic(ts, f):
    return TailTable([float(t) for t in ts], [f(t) for t in ts], [])


def test_mass_profile_examples():
    prof = mass_profile(DIRAC, 1)
    assert prof.masses == {A(1, 1, mode=E): 1} and prof.unclassified == 0
    three = replay(split_A_3d(diag(1, 1, 2), 1, 2))
    prof = mass_profile(three, 2)
    assert prof.masses == {A(2, 2, mode=E): F(4, 9), B(2, 2, mode=E): F(5, 9)}


def test_mass_profile_reports_unclassified():
    prof = mass_profile(Laminate([(F(1, 2), identity(3)), (F(1, 2), diag(5, 5, 5))]), 1)
    assert prof.unclassified == F(1, 2) and prof.total() == 1


def test_constructed_stages_are_fully_classified(stages3d):
    for st in stages3d:
        assert mass_profile(st.nu, st.j).unclassified == 0


def test_tail_examples(stages3d):
    assert tail(DIRAC, [2]).masses == [0.0]
    assert tail(Laminate([(F(1, 2), diag(1, 1, 3)), (F(1, 2), identity(3))]), [2]).exact == [F(1, 2)]
    t6 = tail(stages3d[5].nu, [3, 5])
    assert t6.masses[0] >= t6.masses[1]


def test_tail_inverse_examples(stages3d):
    assert tail_inverse(DIRAC, [2, 3, 4]).masses == [0.0, 0.0, 0.0]
    assert tail_inverse(HALVES, [F(3, 2)]).exact == [F(1, 4)]
    ms = tail_inverse(stages3d[5].nu, default_thresholds(6)).masses
    assert all(b <= a for a, b in zip(ms, ms[1:])) and ms[0] <= 1


def test_thresholds_must_ascend():
    with pytest.raises(ValueError):
        tail(DIRAC, [3, 2])


@pytest.mark.parametrize("power", [-2, -3, 0])
def test_fit_recovers_power_laws(power):
    fit = fit_exponent(synthetic([2, 4, 8, 16], lambda t: 0.7 * t ** power))
    assert fit.slope == pytest.approx(power, abs=1e-9)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.range == (2.0, 16.0)


def test_fit_skips_zeros_and_needs_three_points():
    fit = fit_exponent(synthetic([2, 3, 4, 5], lambda t: 0.0 if t == 5 else t ** -2.0))
    assert fit.slope == pytest.approx(-2, abs=1e-9) and fit.range == (2.0, 4.0)
    with pytest.raises(InsufficientPoints):
        fit_exponent(synthetic([2, 3, 4], lambda t: 0.0 if t == 4 else 1.0))
    with pytest.raises(InsufficientPoints):
        fit_exponent(synthetic([2, 4, 8, 16], lambda t: t ** -2.0), range=(4, 8))


def test_pushforward_volume_examples():
    assert pushforward_volume(DIRAC) == {identity(3): 1}
    assert pushforward_volume(HALVES) == {diag(F(1, 2), 1, 1): F(1, 4), diag(F(3, 2), 1, 1): F(3, 4)}
    six = replay(split_A_3d(identity(3), 1, 2))
    assert sum(pushforward_volume(six).values()) == 1 == det_expectation(six)


def test_degeneracy_examples():
    prof = degeneracy_profile(DIRAC, [F(1, 2)])
    assert prof["mass_smallest_below"][F(1, 2)] == 0 and prof["mass_largest_above"][F(1, 2)] == 0
    prof = degeneracy_profile(HALVES, [F(2, 3), F(3, 4), 1])
    assert prof["mass_smallest_below"] == {F(2, 3): F(1, 2), F(3, 4): F(1, 2), 1: F(1, 2)}
    assert prof["mass_largest_above"] == {F(2, 3): 0, F(3, 4): F(1, 2), 1: F(1, 2)}
    with pytest.raises(ValueError):
        degeneracy_profile(HALVES, [2])


def test_rank_collapse_trend(stages3d):
    pairs = [rank_collapse(st.nu, st.j) for st in stages3d[1:]]
    c_a, c_b = 2 * float(pairs[0][0]), 2 * float(pairs[0][1])
    for st, (a, b) in zip(stages3d[2:], pairs[1:]):
        assert st.j * float(a) <= 1.2 * c_a and st.j * float(b) <= 1.2 * c_b
