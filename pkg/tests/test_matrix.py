from fractions import Fraction as F

import pytest

from laminate_forge.matrix import (DiagMatrix, as_rational, det, diag, dist, format_rational, identity,
                                   inverse, op_norm, parse_rational, sorted_spectrum)


@pytest.mark.parametrize("d, expected", [
    (diag(1, 1, 1), F(1)),
    (diag(F(1, 2), 2, 2), F(2)),
    (diag(F(1, 2), F(1, 2), 1), F(1, 4)),
])
def test_det(d, expected):
    assert det(d) == expected


@pytest.mark.parametrize("d, expected", [
    (diag(1, 1, 1), diag(1, 1, 1)),
    (diag(F(1, 2), 2, 2), diag(2, F(1, 2), F(1, 2))),
    (diag(F(1, 3), F(1, 2), 1), diag(3, 2, 1)),
])
def test_inverse(d, expected):
    assert inverse(d) == expected


@pytest.mark.parametrize("d, expected", [
    (diag(1, 1, 1), 1), (diag(F(1, 2), 2, 2), 2), (diag(3, F(1, 4), 2), 3),
])
def test_op_norm(d, expected):
    assert op_norm(d) == expected


@pytest.mark.parametrize("d, expected", [
    (diag(2, 1, 2), (1, 2, 2)),
    (diag(F(1, 2), 2, F(1, 2)), (F(1, 2), F(1, 2), 2)),
    (diag(1, 1, 1), (1, 1, 1)),
])
def test_sorted_spectrum(d, expected):
    assert sorted_spectrum(d) == tuple(F(x) for x in expected)


def test_entries_must_be_positive_rationals():
    with pytest.raises(Exception):
        diag(1, 0, 1)
    with pytest.raises(Exception):
        diag(1, -2)
    with pytest.raises(TypeError):
        as_rational(0.5)


def test_rational_text_round_trip():
    for q in (F(3), F(-7, 9), F(123456789, 1000000007)):
        assert parse_rational(format_rational(q)) == q
    assert format_rational(F(4, 2)) == "2"


def test_dist_and_identity():
    assert dist(identity(3), diag(1, 2, F(1, 2))) == 1
    assert identity(2) == diag(1, 1)
    assert hash(diag(1, 2)) == hash(DiagMatrix([F(1), F(2)]))


def test_json_round_trip():
    d = diag(F(1, 3), 5, F(7, 2))
    assert DiagMatrix.from_json(d.to_json()) == d
