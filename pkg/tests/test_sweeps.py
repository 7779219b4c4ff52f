import json

import pytest

from laminate_forge.sets import Params
from laminate_forge.sweeps import LEMMAS, lemma_cells, rate_probe, run_sweep

P411 = Params(4, 1, 1)


def test_cells():
    assert len(lemma_cells("split_A_nd", 3)) == 9
    assert lemma_cells("push_B_row_nd", 2) == [(1, 1), (1, 2), (2, 2)]


@pytest.mark.parametrize("lemma", LEMMAS)
def test_small_sweep_exact_bullets_hold(lemma):
    res = run_sweep(lemma, P411, samples=2, grid=3, seed=1)
    exact = [b for b in res.bullets.values() if b.kind == "exact"]
    assert exact and all(b.failures == 0 for b in exact), [b.name for b in exact if b.failures]
    json.dumps(res.to_json())


def test_sweeps_are_reproducible():
    a = run_sweep("split_B_nd", P411, samples=2, grid=2, seed=4).to_json()
    b = run_sweep("split_B_nd", P411, samples=2, grid=2, seed=4).to_json()
    assert a == b


def test_unknown_lemma():
    with pytest.raises(ValueError):
        run_sweep("split_Q", P411)


def test_rate_probe_shapes():
    out = rate_probe("split_A_nd", P411, [(1, 1), (2, 2)])
    assert all(len(v) == 2 for v in out.values()) and "mass B" in out
