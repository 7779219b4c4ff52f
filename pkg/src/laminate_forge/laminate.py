"""Finite-order laminates of diagonal matrices and their split certificates."""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .errors import BadIndex, InvariantViolation, NonConvexSplit, RootMismatch
from .matrix import DiagMatrix, det, format_rational, inverse, parse_rational

ONE = Fraction(1)
ZERO = Fraction(0)


class Atom(NamedTuple):
    weight: Fraction
    matrix: DiagMatrix


class Laminate:
    """A finite probability measure on positive diagonal matrices."""

    __slots__ = ("atoms",)

    def __init__(self, atoms: Iterable, check: bool = True):
        items = tuple(a if isinstance(a, Atom) else Atom(Fraction(a[0]), a[1]) for a in atoms)
        if check:
            if not items:
                raise InvariantViolation("a laminate needs at least one atom")
            n = items[0].matrix.n
            total = ZERO
            for w, m in items:
                if w < 0:
                    raise InvariantViolation(f"negative weight {w}")
                if m.n != n:
                    raise InvariantViolation("atoms of different dimensions")
                total += w
            if total != 1:
                raise InvariantViolation(f"weights sum to {total}, not 1")
        self.atoms = items

    @classmethod
    def dirac(cls, m: DiagMatrix) -> "Laminate":
        return cls([Atom(ONE, m)], check=False)

    @property
    def n(self) -> int:
        return self.atoms[0].matrix.n

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __eq__(self, other) -> bool:
        return isinstance(other, Laminate) and self.atoms == other.atoms

    def __hash__(self):
        return hash(self.atoms)

    def __repr__(self) -> str:
        body = ", ".join(f"({format_rational(w)}, {m!r})" for w, m in self.atoms)
        return f"Laminate[{body}]"

    def weights(self) -> List[Fraction]:
        return [a.weight for a in self.atoms]

    def matrices(self) -> List[DiagMatrix]:
        return [a.matrix for a in self.atoms]

    def weight_of(self, m: DiagMatrix) -> Fraction:
        return sum((w for w, x in self.atoms if x == m), ZERO)

    def to_json(self) -> list:
        return [{"weight": format_rational(w), "matrix": m.to_json()} for w, m in self.atoms]

    @classmethod
    def from_json(cls, data, check: bool = True) -> "Laminate":
        return cls((Atom(parse_rational(d["weight"]), DiagMatrix.from_json(d["matrix"])) for d in data),
                   check=check)


@dataclass(frozen=True)
class SplitStep:
    """Replace one coordinate of one atom by two values.

    ``low`` receives weight ``lam`` and ``high`` receives ``1 - lam``; the
    names follow the file format and do not imply an ordering.
    ``atom_index`` is 0-based, ``position`` is 1-based.
    """

    atom_index: int
    position: int
    low: Fraction
    high: Fraction
    lam: Fraction

    def to_json(self) -> dict:
        return {
            "atom_index": self.atom_index,
            "position": self.position,
            "low": format_rational(self.low),
            "high": format_rational(self.high),
            "lambda": format_rational(self.lam),
        }

    @classmethod
    def from_json(cls, d) -> "SplitStep":
        return cls(int(d["atom_index"]), int(d["position"]), parse_rational(d["low"]),
                   parse_rational(d["high"]), parse_rational(d["lambda"]))


def _apply_step(atoms: List[Atom], step: SplitStep) -> None:
    """Apply ``step`` in place. The first child keeps the parent's slot."""
    if not 0 <= step.atom_index < len(atoms):
        raise BadIndex(f"atom index {step.atom_index} out of range 0..{len(atoms) - 1}")
    w, m = atoms[step.atom_index]
    if not 1 <= step.position <= m.n:
        raise BadIndex(f"position {step.position} out of range 1..{m.n}")
    lam = step.lam
    if not 0 < lam < 1:
        raise NonConvexSplit(f"lambda {lam} is not in the open interval (0, 1)")
    if step.low == step.high:
        raise NonConvexSplit("both children carry the same value")
    if step.low <= 0 or step.high <= 0:
        raise NonConvexSplit("children must stay positive definite")
    entry = m.entries[step.position - 1]
    if lam * step.low + (1 - lam) * step.high != entry:
        raise NonConvexSplit(
            f"{lam}*{step.low} + (1-{lam})*{step.high} != {entry} at position {step.position}")
    first = Atom(w * lam, m.replace(step.position - 1, step.low))
    second = Atom(w * (1 - lam), m.replace(step.position - 1, step.high))
    atoms[step.atom_index] = first
    atoms.insert(step.atom_index + 1, second)


class SplitCertificate:
    """Root matrix plus the ordered splits that build a laminate from it."""

    __slots__ = ("root", "steps", "_atoms")

    def __init__(self, root: DiagMatrix, steps: Sequence[SplitStep] = ()):
        self.root = root
        self.steps = tuple(steps)
        self._atoms: Optional[List[Atom]] = None

    def __eq__(self, other) -> bool:
        return isinstance(other, SplitCertificate) and (self.root, self.steps) == (other.root, other.steps)

    def __repr__(self) -> str:
        return f"SplitCertificate(root={self.root!r}, steps={len(self.steps)})"

    def atoms(self) -> List[Atom]:
        """Unmerged atom list in replay order (cached)."""
        if self._atoms is None:
            atoms = [Atom(ONE, self.root)]
            for step in self.steps:
                _apply_step(atoms, step)
            self._atoms = atoms
        return list(self._atoms)

    def to_json(self) -> dict:
        return {"root": self.root.to_json(), "steps": [s.to_json() for s in self.steps]}

    @classmethod
    def from_json(cls, d) -> "SplitCertificate":
        return cls(DiagMatrix.from_json(d["root"]), [SplitStep.from_json(s) for s in d["steps"]])

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, s: str) -> "SplitCertificate":
        return cls.from_json(json.loads(s))


class CertificateBuilder:
    """Incremental builder used by the split lemmas.

    Keeps the current atom list so callers can address atoms by index while
    the tree grows.
    """

    def __init__(self, root: DiagMatrix):
        self.root = root
        self.steps: List[SplitStep] = []
        self.atoms: List[Atom] = [Atom(ONE, root)]

    def split(self, atom_index: int, position: int, low, high, lam) -> None:
        step = SplitStep(atom_index, position, Fraction(low), Fraction(high), Fraction(lam))
        _apply_step(self.atoms, step)
        self.steps.append(step)

    def build(self) -> SplitCertificate:
        cert = SplitCertificate(self.root, self.steps)
        cert._atoms = list(self.atoms)
        return cert


def barycenter(nu: Laminate) -> DiagMatrix:
    n = nu.n
    acc = [ZERO] * n
    for w, m in nu.atoms:
        for k, e in enumerate(m.entries):
            acc[k] += w * e
    return DiagMatrix(acc)


def apply_split(cert: SplitCertificate, step: SplitStep) -> SplitCertificate:
    atoms = cert.atoms()
    _apply_step(atoms, step)
    out = SplitCertificate(cert.root, cert.steps + (step,))
    out._atoms = atoms
    return out


def replay(cert: SplitCertificate) -> Laminate:
    """Terminal measure of ``cert`` in replay order (not merged)."""
    return Laminate(cert.atoms(), check=False)


def merge_atoms(nu) -> Laminate:
    """Sum weights of equal matrices, drop zeros, sort lexicographically."""
    acc: Dict[DiagMatrix, Fraction] = {}
    for w, m in nu:
        acc[m] = acc.get(m, ZERO) + w
    return Laminate(sorted((Atom(w, m) for m, w in acc.items() if w != 0),
                           key=lambda a: a.matrix.entries), check=False)


def compose(nu: Laminate, children: Mapping[DiagMatrix, object]) -> Laminate:
    """Replace each keyed atom of ``nu`` by its child laminate, scaled.

    Values may be SplitCertificates or Laminates. Unkeyed atoms stay Diracs.
    """
    acc: Dict[DiagMatrix, Fraction] = {}
    present = {m for _, m in nu.atoms}
    for key in children:
        if key not in present:
            raise RootMismatch(f"{key!r} is not an atom of the outer laminate")
    for w, m in nu.atoms:
        child = children.get(m)
        if child is None:
            acc[m] = acc.get(m, ZERO) + w
            continue
        if isinstance(child, SplitCertificate):
            if child.root != m:
                raise RootMismatch(f"certificate root {child.root!r} does not match atom {m!r}")
            parts = child.atoms()
        else:
            if barycenter(child) != m:
                raise RootMismatch(f"child barycenter does not match atom {m!r}")
            parts = child.atoms
        for cw, cm in parts:
            acc[cm] = acc.get(cm, ZERO) + w * cw
    return Laminate(sorted((Atom(w, m) for m, w in acc.items() if w != 0),
                           key=lambda a: a.matrix.entries), check=False)


def det_expectation(nu: Laminate) -> Fraction:
    return sum((w * det(m) for w, m in nu.atoms), ZERO)


def inverse_laminate(nu: Laminate) -> Laminate:
    """Determinant-weighted pushforward under inversion, normalized."""
    d = det(barycenter(nu))
    return merge_atoms(Atom(w * det(m) / d, inverse(m)) for w, m in nu.atoms)


def invert_certificate(cert: SplitCertificate) -> SplitCertificate:
    """Certificate whose replay is the inverse laminate of ``cert``'s replay.

    A split x = lam*b + (1-lam)*c of one diagonal entry inverts to
    1/x = lam'*(1/b) + (1-lam')*(1/c) with lam' = lam*b/x, which is also the
    determinant ratio of the first child to its parent.
    """
    atoms = [Atom(ONE, cert.root)]
    builder = CertificateBuilder(inverse(cert.root))
    for step in cert.steps:
        x = atoms[step.atom_index].matrix.entries[step.position - 1]
        _apply_step(atoms, step)
        builder.split(step.atom_index, step.position, 1 / step.low, 1 / step.high, step.lam * step.low / x)
    return builder.build()


@dataclass(frozen=True)
class Validation:
    ok: bool
    reason: str = ""
    step_index: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


def validate_certificate(cert: SplitCertificate, claimed: Laminate) -> Validation:
    atoms = [Atom(ONE, cert.root)]
    for idx, step in enumerate(cert.steps):
        try:
            _apply_step(atoms, step)
        except (NonConvexSplit, BadIndex) as exc:
            kind = "non-convex split" if isinstance(exc, NonConvexSplit) else "bad index"
            return Validation(False, f"{kind} at step {idx}: {exc}", idx)
    mine = merge_atoms(atoms)
    theirs = merge_atoms(claimed)
    if [m for _, m in mine] != [m for _, m in theirs]:
        return Validation(False, "support mismatch")
    for (w1, m), (w2, _) in zip(mine, theirs):
        if w1 != w2:
            return Validation(False, f"weight mismatch at {m!r}: certificate {w1}, claimed {w2}")
    return Validation(True)
