import math

import pytest

from laminate_forge.constants import constants_run, constants_run_exact, detect_bounded
from laminate_forge.errors import InvalidParams


def test_first_step_examples():
    t = constants_run(0.5, 2.0, 3, 2, keep_rows=2)
    assert t.c1_rows[1][1] == 64 and t.c2_rows[1][1] == 64 and t.c2_rows[1][0] == 0
    assert t.c1_rows[2][1] == 192
    assert t.c2_rows[2][1] == 128
    assert t.c1_rows[2][2] == 256


def test_exact_agrees_with_float():
    exact = constants_run_exact(0.1, 2, 3, 100)
    approx = constants_run(0.1, 2.0, 3, 100).m
    worst = max(abs(float(e) - a) / float(e) for e, a in zip(exact, approx))
    assert worst < 1e-12


def test_m_is_nondecreasing():
    for eps, ct in ((0.1, 2.0), (0.5, 2.0), (0.05, 2.0 * 16 ** 3)):
        logs = constants_run(eps, ct, 3, 500).log_m
        assert all(b >= a - 1e-12 for a, b in zip(logs, logs[1:]))


def test_short_runs_are_not_judged():
    rep = detect_bounded(constants_run(0.1, 2.0, 3, 5))
    assert not rep.plateaued and "insufficient length" in rep.reason


def test_huge_values_do_not_overflow():
    t = constants_run(0.05, 2.0 * 16 ** 4, 4, 2000)
    assert all(math.isfinite(x) for x in t.log_m)
    assert t.log_m[-1] / math.log(10) > 308     # far beyond a double, still tracked


@pytest.mark.parametrize("args", [(0, 2, 3, 10), (0.1, 1, 3, 10), (0.1, 2, 1, 10), (0.1, 2, 3, 0)])
def test_invalid_params(args):
    with pytest.raises(InvalidParams):
        constants_run(*args)


def test_csv_rows_shape():
    rows = constants_run(0.1, 2.0, 3, 4).rows_csv()
    assert [r[0] for r in rows] == [1, 2, 3, 4]
    assert rows[0][1] == 64
