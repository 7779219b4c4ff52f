"""Three-dimensional staircase laminates (n = 3, m1 = m2 = 1).

The stage measures nu_j have barycenter I and live on the union of the
exact sets A_j^i and B_i^j, i <= j.  Each stage is obtained from the previous
one by pushing every atom one step along its row with the split lemmas below.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional

from .errors import InvariantViolation, NotInSet
from .laminate import (CertificateBuilder, Laminate, SplitCertificate, barycenter, compose,
                       invert_certificate)
from .matrix import DiagMatrix, identity, inverse, sort_order
from .parallel import parallel_map
from .sets import EXACT_3D, PARAMS_3D, SetId, classify, member

I3 = identity(3)


def _A(k, i) -> SetId:
    return SetId("A", k, i, None, EXACT_3D, PARAMS_3D)


def _B(k, i) -> SetId:
    return SetId("B", k, i, None, EXACT_3D, PARAMS_3D)


@lru_cache(maxsize=None)
def split_A_3d(a: DiagMatrix, k: int, i: int) -> SplitCertificate:
    """Split a member of A_k^i into a laminate on A_{k+1}^i and B_{k+1}^i.

    Two small coordinates move from 1/k to 1/(k+1) with weight
    mu = (i - 1/k)/(i - 1/(k+1)), or jump to i.  When the large entry is
    i - 1 it is also pushed to i, with weight
    lam = (i - 1 - 1/(k+1))/(i - 1/(k+1)).
    """
    if not member(a, _A(k, i)):
        raise NotInSet(f"{a!r} is not in {_A(k, i)}")
    if k == 1 and i == 1:
        # A_1^1 = {I}: mu would be 0, so the split is a no-op
        return SplitCertificate(a)
    p1, p2, p3 = (p + 1 for p in sort_order(a))
    sigma = a.entries[p3 - 1]
    lo = Fraction(1, k + 1)
    mu = (i - Fraction(1, k)) / (i - lo)
    b = CertificateBuilder(a)
    b.split(0, p1, lo, i, mu)
    b.split(0, p2, lo, i, mu)
    if sigma != i:
        lam = (i - 1 - lo) / (i - lo)
        b.split(1, p3, i, lo, lam)
        b.split(3, p3, i, lo, lam)
        b.split(4, p2, lo, i, mu)
    return b.build()


@lru_cache(maxsize=None)
def split_B_3d(a: DiagMatrix, k: int, i: int) -> SplitCertificate:
    """Split a member of B_k^i into a laminate on A_k^{i+1} and B_k^{i+1}.

    Built as the inverse of the A-split of a^-1, which lies in A_i^k: every
    step x = lam*b + (1-lam)*c is mirrored by the reciprocal split with
    weight lam*b/x.
    """
    if not member(a, _B(k, i)):
        raise NotInSet(f"{a!r} is not in {_B(k, i)}")
    return invert_certificate(split_A_3d(inverse(a), i, k))


def _embed_rounds(builder: CertificateBuilder, rounds) -> None:
    """Apply sub-certificates to atoms of ``builder`` round by round.

    ``rounds`` yields (target set, splitter) pairs; each atom in the target
    set is replaced by the splitter's tree.  Atoms are visited from the back
    so that earlier indices stay valid.
    """
    for target, splitter in rounds:
        for idx in range(len(builder.atoms) - 1, -1, -1):
            m = builder.atoms[idx].matrix
            if not member(m, target):
                continue
            sub = splitter(m)
            for st in sub.steps:
                builder.split(idx + st.atom_index, st.position, st.low, st.high, st.lam)


def _start(cert: SplitCertificate) -> CertificateBuilder:
    b = CertificateBuilder(cert.root)
    for st in cert.steps:
        b.split(st.atom_index, st.position, st.low, st.high, st.lam)
    return b


@lru_cache(maxsize=None)
def push_A_row_3d(a: DiagMatrix, i: int, j: int) -> SplitCertificate:
    """Move a member of A_j^i into the stage-(j+1) union.

    One A-split, then j - i + 1 rounds of B-splits on the atoms sitting in
    B_{j+1}^{i+l-1}.
    """
    if i > j:
        raise NotInSet(f"row push needs i <= j, got i={i}, j={j}")
    if not member(a, _A(j, i)):
        raise NotInSet(f"{a!r} is not in {_A(j, i)}")
    if a == I3:
        # identity: use its reading as the i-1 member of A_1^2
        return split_A_3d(a, 1, 2)
    b = _start(split_A_3d(a, j, i))
    rounds = ((_B(j + 1, i + l - 1), (lambda m, r=i + l - 1: split_B_3d(m, j + 1, r)))
              for l in range(1, j - i + 2))
    _embed_rounds(b, rounds)
    return b.build()


@lru_cache(maxsize=None)
def push_B_row_3d(a: DiagMatrix, i: int, j: int) -> SplitCertificate:
    """Move a member of B_i^j into the stage-(j+1) union.

    One B-split, then j - i + 1 rounds of A-splits on the atoms sitting in
    A_{i+l-1}^{j+1}.
    """
    if i > j:
        raise NotInSet(f"row push needs i <= j, got i={i}, j={j}")
    if not member(a, _B(i, j)):
        raise NotInSet(f"{a!r} is not in {_B(i, j)}")
    b = _start(split_B_3d(a, i, j))
    rounds = ((_A(i + l - 1, j + 1), (lambda m, r=i + l - 1: split_A_3d(m, r, j + 1)))
              for l in range(1, j - i + 2))
    _embed_rounds(b, rounds)
    return b.build()


@dataclass
class StageMeasure3D:
    j: int
    nu: Laminate
    masses: Dict[SetId, Fraction]
    cj: float
    epsilon: float = 0.1
    ratios: Dict[SetId, float] = field(default_factory=dict)

    @property
    def atom_count(self) -> int:
        return len(self.nu)


def stage_ratios(j: int, masses: Dict[SetId, Fraction], epsilon: float) -> Dict[SetId, float]:
    """nu_j(A_j^i) i^(3-eps) and nu_j(B_i^j) i^(2-eps) j^2 for every set."""
    out = {}
    for s, w in masses.items():
        if s.family == "A":
            out[s] = float(w) * s.i ** (3 - epsilon)
        else:
            out[s] = float(w) * s.k ** (2 - epsilon) * j * j
    return out


def _masses(nu: Laminate, j: int) -> Dict[SetId, Fraction]:
    masses: Dict[SetId, Fraction] = {}
    for w, m in nu:
        s = classify(m, j, PARAMS_3D, EXACT_3D)
        if s is None:
            raise InvariantViolation(f"atom {m!r} of stage {j} lies outside the stage union")
        masses[s] = masses.get(s, Fraction(0)) + w
    return dict(sorted(masses.items(), key=lambda kv: kv[0].sort_key()))


def _make_stage(j: int, nu: Laminate, epsilon: float) -> StageMeasure3D:
    if barycenter(nu) != I3:
        raise InvariantViolation(f"stage {j} barycenter is {barycenter(nu)!r}, not I")
    masses = _masses(nu, j)
    ratios = stage_ratios(j, masses, epsilon)
    return StageMeasure3D(j, nu, masses, max(ratios.values()), epsilon, ratios)


def initial_stage_3d(epsilon: float = 0.1) -> StageMeasure3D:
    return _make_stage(1, Laminate.dirac(I3), epsilon)


def _push(args):
    m, label, j = args
    if label.family == "A":
        return push_A_row_3d(m, label.i, j)
    return push_B_row_3d(m, label.k, j)


def advance_3d(stage: StageMeasure3D, threads: Optional[int] = None) -> StageMeasure3D:
    j = stage.j
    jobs = [(m, classify(m, j, PARAMS_3D, EXACT_3D), j) for _, m in stage.nu]
    certs = parallel_map(_push, jobs, threads)
    nu = compose(stage.nu, {m: c for (m, _, _), c in zip(jobs, certs)})
    return _make_stage(j + 1, nu, stage.epsilon)


def build_sequence_3d(j_max: int, epsilon: float = 0.1, threads: Optional[int] = None) -> List[StageMeasure3D]:
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    stages = [initial_stage_3d(epsilon)]
    while stages[-1].j < j_max:
        stages.append(advance_3d(stages[-1], threads))
    return stages


def fit_c0(stages: List[StageMeasure3D]) -> float:
    """Smallest C0 with C_{j+1} <= C_j (1 + 12 C0 j^-2) along the observed C_j."""
    c0 = 0.0
    for a, b in zip(stages, stages[1:]):
        c0 = max(c0, (b.cj / a.cj - 1) * a.j ** 2 / 12)
    return c0
