from fractions import Fraction as F

import pytest

from laminate_forge.errors import NotInSet
from laminate_forge.laminate import barycenter, merge_atoms, replay
from laminate_forge.matrix import diag, identity
from laminate_forge.sets import EXACT_3D, A, B, member
from laminate_forge.staircase3d import (advance_3d, build_sequence_3d, initial_stage_3d, push_A_row_3d,
                                        push_B_row_3d, split_A_3d, split_B_3d)

E = EXACT_3D


def masses_on(nu, sets):
    out = {s: F(0) for s in sets}
    for w, m in nu:
        hits = [s for s in sets if member(m, s)]
        assert hits, f"{m!r} outside {sets}"
        out[hits[-1]] += w
    return out


def test_split_A_sigma_i_case():
    nu = replay(split_A_3d(diag(1, 1, 2), 1, 2))
    assert merge_atoms(nu) == merge_atoms([(F(4, 9), diag(F(1, 2), F(1, 2), 2)), (F(2, 9), diag(F(1, 2), 2, 2)),
                                           (F(1, 3), diag(2, 1, 2))])
    assert len(nu) == 3
    assert masses_on(nu, [A(2, 2, mode=E), B(2, 2, mode=E)])[B(2, 2, mode=E)] == F(5, 9)


def test_split_A_sigma_i_minus_one_case():
    nu = replay(split_A_3d(identity(3), 1, 2))
    assert nu.weights() == [F(4, 9), F(2, 27), F(4, 27), F(1, 9), F(4, 27), F(2, 27)]
    assert barycenter(nu) == identity(3)
    assert masses_on(nu, [A(2, 2, mode=E), B(2, 2, mode=E)])[B(2, 2, mode=E)] == F(7, 27)


def test_split_A_is_permutation_equivariant():
    base = replay(split_A_3d(diag(1, 1, 2), 1, 2))
    moved = replay(split_A_3d(diag(1, 2, 1), 1, 2))
    assert moved.weights() == base.weights()
    swap = lambda m: diag(m[0], m[2], m[1])
    assert [swap(m) for m in moved.matrices()] == base.matrices()


def test_split_A_rejects_non_members():
    with pytest.raises(NotInSet):
        split_A_3d(diag(5, 5, 5), 1, 2)


def _b_ratios(k, i):
    m = diag(F(1, k), i, i)
    nu = replay(split_B_3d(m, k, i))
    assert barycenter(nu) == m
    got = masses_on(nu, [A(k, i + 1, mode=E), B(k, i + 1, mode=E)])
    return float(got[A(k, i + 1, mode=E)]) * i, float(got[B(k, i + 1, mode=E)] - F(i, i + 1) ** 2) * (i * k) ** 2


def test_split_B_example_within_fitted_constant():
    cells = [(k, i) for k in range(1, 7) for i in range(1, 7) if (k, i) != (1, 1)]
    ratios = {c: _b_ratios(*c) for c in cells}
    c_a = max(r[0] for r in ratios.values())
    c_b = max(r[1] for r in ratios.values())
    ra, rb = _b_ratios(2, 2)
    assert ra <= c_a and rb <= max(c_b, 0)
    # no upward drift of the A-mass ratio on the outer shell
    shell = lambda s: max(r[0] for c, r in ratios.items() if max(c) == s)
    assert shell(6) <= 1.2 * shell(5)
    assert c_a < 2


def test_push_A_row_examples():
    nu = replay(push_A_row_3d(diag(F(1, 2), F(1, 2), 2), 2, 2))
    masses_on(nu, [A(3, 2, mode=E), A(3, 3, mode=E), B(3, 3, mode=E)])
    a = diag(F(1, 3), F(1, 3), 1)
    assert barycenter(replay(push_A_row_3d(a, 1, 3))) == a


def test_push_B_row_examples():
    a = diag(1, 2, 2)
    nu = replay(push_B_row_3d(a, 2, 2))
    assert barycenter(nu) == a
    got = masses_on(nu, [A(3, 3, mode=E), B(2, 3, mode=E), B(3, 3, mode=E)])
    # the leading mass may fall short of (j/(j+1))^2 but never exceed it by more than C/(ij)^2
    assert got[B(2, 3, mode=E)] - F(2, 3) ** 2 <= F(1, 16)


def test_initial_stage_and_first_advance():
    s1 = initial_stage_3d()
    assert s1.nu.atoms[0].matrix == identity(3) and s1.atom_count == 1
    s2 = advance_3d(s1)
    assert barycenter(s2.nu) == identity(3)
    assert sum(s2.masses.values()) == 1


def test_build_sequence(stages3d):
    assert [s.j for s in build_sequence_3d(1)] == [1]
    assert len(stages3d) == 6
    for st in stages3d:
        assert barycenter(st.nu) == identity(3)
        assert sum(st.masses.values()) == 1
    assert [s.atom_count for s in stages3d] == [1, 6, 14, 20, 26, 32]


def test_stage_six_A_ratios_stable(stages3d):
    def top(st):
        return max(r for s, r in st.ratios.items() if s.family == "A")
    assert top(stages3d[5]) <= 1.2 * max(top(stages3d[2]), top(stages3d[3]))


def test_push_A_row_starts_with_the_A_split():
    a = diag(F(1, 2), F(1, 2), 2)
    head = split_A_3d(a, 2, 2).steps
    assert push_A_row_3d(a, 2, 2).steps[:len(head)] == head


def test_fit_c0_bounds_the_observed_growth(stages3d):
    from laminate_forge.staircase3d import fit_c0
    c0 = fit_c0(list(stages3d))
    assert c0 > 0
    for a, b in zip(stages3d, stages3d[1:]):
        assert b.cj <= a.cj * (1 + 12 * c0 / a.j ** 2) * (1 + 1e-12)
