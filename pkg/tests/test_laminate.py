from fractions import Fraction as F

import pytest

from laminate_forge.errors import BadIndex, NonConvexSplit, RootMismatch
from laminate_forge.laminate import (Atom, CertificateBuilder, Laminate, SplitCertificate, SplitStep,
                                     apply_split, barycenter, compose, det_expectation, inverse_laminate,
                                     invert_certificate, merge_atoms, replay, validate_certificate)
from laminate_forge.matrix import diag, identity
from laminate_forge.staircase3d import split_A_3d

THREE_ATOM = Laminate([(F(4, 9), diag(F(1, 2), F(1, 2), 2)), (F(2, 9), diag(F(1, 2), 2, 2)),
                       (F(1, 3), diag(2, 1, 2))])
HALVES = Laminate([(F(1, 2), diag(F(1, 2), 1, 1)), (F(1, 2), diag(F(3, 2), 1, 1))])


def six_atom():
    return replay(split_A_3d(identity(3), 1, 2))


def test_barycenter_examples():
    assert barycenter(Laminate.dirac(identity(3))) == identity(3)
    assert barycenter(THREE_ATOM) == diag(1, 1, 2)
    assert barycenter(HALVES) == identity(3)


def test_apply_split_examples():
    root = SplitCertificate(diag(1, 1, 2))
    out = apply_split(root, SplitStep(0, 1, F(1, 2), F(2), F(2, 3)))
    assert list(replay(out).atoms) == [Atom(F(2, 3), diag(F(1, 2), 1, 2)), Atom(F(1, 3), diag(2, 1, 2))]
    out = apply_split(SplitCertificate(diag(1, 1)), SplitStep(0, 2, F(1, 2), F(3, 2), F(1, 2)))
    assert list(replay(out).atoms) == [Atom(F(1, 2), diag(1, F(1, 2))), Atom(F(1, 2), diag(1, F(3, 2)))]


@pytest.mark.parametrize("step, exc", [
    (SplitStep(0, 1, F(1, 2), F(2), F(1, 2)), NonConvexSplit),      # wrong mean
    (SplitStep(0, 1, F(1, 2), F(3, 2), F(0)), NonConvexSplit),      # lambda outside (0, 1)
    (SplitStep(0, 1, F(-1), F(3), F(1, 2)), NonConvexSplit),        # leaves the positive cone
    (SplitStep(1, 1, F(1, 2), F(3, 2), F(1, 2)), BadIndex),
    (SplitStep(0, 4, F(1, 2), F(3, 2), F(1, 2)), BadIndex),
])
def test_apply_split_rejects(step, exc):
    with pytest.raises(exc):
        apply_split(SplitCertificate(identity(3)), step)


def test_replay_examples():
    assert list(replay(SplitCertificate(identity(3))).atoms) == [Atom(F(1), identity(3))]
    assert merge_atoms(replay(split_A_3d(diag(1, 1, 2), 1, 2))) == merge_atoms(THREE_ATOM)
    assert six_atom().weights() == [F(4, 9), F(2, 27), F(4, 27), F(1, 9), F(4, 27), F(2, 27)]


def test_compose_examples():
    a, b, c, d = diag(1, 1), diag(3, 1), diag(F(1, 2), 1), diag(2, 1)
    nu = Laminate([(F(1, 2), a), (F(1, 2), b)])
    assert compose(nu, {}) == merge_atoms(nu)
    child = Laminate([(F(2, 3), c), (F(1, 3), d)])
    assert compose(nu, {a: child}) == merge_atoms([(F(1, 3), c), (F(1, 6), d), (F(1, 2), b)])
    cert = split_A_3d(diag(1, 1, 2), 1, 2)
    assert compose(Laminate.dirac(diag(1, 1, 2)), {diag(1, 1, 2): cert}) == merge_atoms(replay(cert))


def test_compose_root_mismatch():
    with pytest.raises(RootMismatch):
        compose(Laminate.dirac(identity(3)), {identity(3): split_A_3d(diag(1, 1, 2), 1, 2)})


def test_merge_atoms_examples():
    a, b, c = diag(1, 1), diag(2, 1), diag(3, 1)
    assert list(merge_atoms([(F(1, 2), a), (F(1, 2), a)]).atoms) == [Atom(F(1), a)]
    assert list(merge_atoms([(F(1, 3), a), (F(0), b), (F(2, 3), c)]).atoms) == [Atom(F(1, 3), a), Atom(F(2, 3), c)]
    once = merge_atoms(THREE_ATOM)
    assert merge_atoms(once) == once


def test_det_expectation_examples():
    assert det_expectation(Laminate.dirac(diag(1, 1, 2))) == 2
    assert det_expectation(THREE_ATOM) == 2
    assert det_expectation(six_atom()) == 1


def test_inverse_laminate_examples():
    assert inverse_laminate(Laminate.dirac(identity(3))) == Laminate.dirac(identity(3))
    assert inverse_laminate(HALVES) == merge_atoms([(F(1, 4), diag(2, 1, 1)), (F(3, 4), diag(F(2, 3), 1, 1))])
    inv = inverse_laminate(six_atom())
    assert inv.weight_of(diag(2, 2, 1)) == F(3, 27)
    assert inv.weight_of(diag(F(1, 2), 1, F(1, 2))) == F(12, 27)


def test_invert_certificate_replays_to_inverse_laminate():
    cert = split_A_3d(identity(3), 1, 2)
    assert merge_atoms(replay(invert_certificate(cert))) == inverse_laminate(replay(cert))


def test_validate_certificate():
    cert = split_A_3d(identity(3), 1, 2)
    nu = replay(cert)
    assert validate_certificate(cert, nu)
    w = list(nu.atoms)
    w[0] = Atom(w[0].weight + F(1, 10 ** 6), w[0].matrix)
    w[1] = Atom(w[1].weight - F(1, 10 ** 6), w[1].matrix)
    res = validate_certificate(cert, Laminate(w))
    assert not res and "weight mismatch" in res.reason
    steps = list(cert.steps)
    s = steps[2]
    steps[2] = SplitStep(s.atom_index, s.position, s.low, s.high, s.lam + F(1, 100))
    res = validate_certificate(SplitCertificate(cert.root, steps), nu)
    assert not res and res.step_index == 2 and "non-convex" in res.reason


def test_certificate_json_round_trip_is_bit_exact():
    cert = split_A_3d(identity(3), 1, 2)
    text = cert.dumps()
    back = SplitCertificate.loads(text)
    assert back == cert and back.dumps() == text


def test_builder_tracks_atoms():
    b = CertificateBuilder(diag(1, 1))
    b.split(0, 1, F(1, 2), F(3, 2), F(1, 2))
    b.split(1, 2, F(1, 2), F(3, 2), F(1, 2))
    cert = b.build()
    assert replay(cert).weights() == [F(1, 2), F(1, 4), F(1, 4)]
    assert replay(SplitCertificate(cert.root, cert.steps)) == replay(cert)
