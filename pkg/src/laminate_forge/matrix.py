"""Exact positive diagonal matrices.

Entries are kept positionally (not sorted); the sorted view is what set
membership looks at.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


def as_rational(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        raise TypeError("floats are not accepted as exact rationals; pass a string or Fraction")
    return Fraction(x)


def format_rational(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse_rational(s: str) -> Fraction:
    if not isinstance(s, str):
        raise TypeError(f"expected 'p/q' string, got {type(s).__name__}")
    return Fraction(s)


class DiagMatrix:
    """Positive diagonal matrix with exact rational entries."""

    __slots__ = ("entries", "_hash", "_spec")

    def __init__(self, entries: Iterable):
        vals = tuple(as_rational(e) for e in entries)
        if len(vals) < 2:
            raise ValueError("a DiagMatrix needs at least two entries")
        for v in vals:
            if v <= 0:
                raise ValueError(f"diagonal entries must be positive, got {v}")
        object.__setattr__(self, "entries", vals)
        object.__setattr__(self, "_hash", hash(vals))
        object.__setattr__(self, "_spec", None)

    @classmethod
    def _trusted(cls, vals: tuple) -> "DiagMatrix":
        # skip validation for values produced internally
        obj = cls.__new__(cls)
        object.__setattr__(obj, "entries", vals)
        object.__setattr__(obj, "_hash", hash(vals))
        object.__setattr__(obj, "_spec", None)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("DiagMatrix is immutable")

    @property
    def n(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, idx):
        return self.entries[idx]

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, DiagMatrix) and self.entries == other.entries

    def __lt__(self, other: "DiagMatrix") -> bool:
        return self.entries < other.entries

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return "diag(" + ", ".join(format_rational(e) for e in self.entries) + ")"

    def replace(self, position: int, value: Fraction) -> "DiagMatrix":
        """Copy with the entry at 0-based ``position`` swapped for ``value``."""
        vals = list(self.entries)
        vals[position] = value
        return DiagMatrix._trusted(tuple(vals))

    def permuted(self, order: Sequence[int]) -> "DiagMatrix":
        return DiagMatrix._trusted(tuple(self.entries[p] for p in order))

    def to_floats(self) -> tuple:
        return tuple(float(e) for e in self.entries)

    def to_json(self) -> list:
        return [format_rational(e) for e in self.entries]

    @classmethod
    def from_json(cls, data) -> "DiagMatrix":
        return cls(parse_rational(s) for s in data)


def diag(*entries) -> DiagMatrix:
    return DiagMatrix(entries)


def identity(n: int) -> DiagMatrix:
    return DiagMatrix([1] * n)


def det(d: DiagMatrix) -> Fraction:
    out = Fraction(1)
    for e in d.entries:
        out *= e
    return out


def inverse(d: DiagMatrix) -> DiagMatrix:
    return DiagMatrix._trusted(tuple(1 / e for e in d.entries))


def op_norm(d: DiagMatrix) -> Fraction:
    return max(d.entries)


def sorted_spectrum(d: DiagMatrix) -> tuple:
    if d._spec is None:
        object.__setattr__(d, "_spec", tuple(sorted(d.entries)))
    return d._spec


def sort_order(d: DiagMatrix) -> list:
    """Stable permutation p with d[p[0]] <= d[p[1]] <= ..."""
    return sorted(range(d.n), key=lambda k: d.entries[k])


def dist(a: DiagMatrix, b: DiagMatrix) -> Fraction:
    """Operator-norm distance |a - b| between two diagonal matrices."""
    return max(abs(x - y) for x, y in zip(a.entries, b.entries))
