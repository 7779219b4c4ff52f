"""Spectral set families A_k^i, B_k^i, S_{k,i}^a and stage classification.

Two modes are supported:

* ``exact-3d``: n = 3, m1 = m2 = 1, sets defined by exact equalities of the
  sorted spectrum.
* ``open-nd``: open bands around 1/(k+1) (small eigenvalues) and i or i+1
  (large eigenvalues), with a second layout used when m1 + m2 >= n, in which
  a block of middle eigenvalues sits in (1/2, 2).
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Callable, Iterator, List, Optional, Tuple

from .errors import AmbiguousMembership, InvalidParams, InvalidSetId
from .matrix import DiagMatrix, identity, inverse, sorted_spectrum

EXACT_3D = "exact-3d"
OPEN_ND = "open-nd"
MODES = (EXACT_3D, OPEN_ND)

QUARTER = Fraction(1, 4)
HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Params:
    n: int
    m1: int
    m2: int

    def __post_init__(self):
        if self.n < 3:
            raise InvalidParams(f"n must be at least 3, got {self.n}")
        for name, m in (("m1", self.m1), ("m2", self.m2)):
            if not 1 <= m <= self.n - 2:
                raise InvalidParams(f"{name}={m} outside 1..n-2 for n={self.n}")

    @property
    def frozen(self) -> int:
        """Number of middle eigenvalues held fixed (0 when m1 + m2 <= n - 1)."""
        return max(0, self.m1 + self.m2 - self.n + 1)

    @property
    def high_regime(self) -> bool:
        return self.m1 + self.m2 >= self.n

    @property
    def m1p(self) -> int:
        return self.m1 - self.frozen

    @property
    def m2p(self) -> int:
        return self.m2 - self.frozen

    @property
    def np_(self) -> int:
        return self.n - self.frozen

    def reduced(self) -> "Params":
        return Params(self.np_, self.m1p, self.m2p)

    def s_range(self) -> range:
        """Admissible interpolation indices a (empty unless m1 + m2 < n - 1)."""
        if self.high_regime:
            return range(0)
        return range(self.m2 + 1, self.n - self.m1)


PARAMS_3D = Params(3, 1, 1)


@dataclass(frozen=True)
class SetId:
    family: str
    k: int
    i: int
    a: Optional[int] = None
    mode: str = OPEN_ND
    params: Params = field(default=PARAMS_3D, compare=True)

    def __post_init__(self):
        if self.family not in ("A", "B", "S"):
            raise InvalidSetId(f"unknown family {self.family!r}")
        if self.mode not in MODES:
            raise InvalidSetId(f"unknown mode {self.mode!r}")
        if self.k < 1 or self.i < 1:
            raise InvalidSetId(f"indices must be positive, got k={self.k}, i={self.i}")
        if self.mode == EXACT_3D:
            if self.params != PARAMS_3D:
                raise InvalidSetId("exact-3d sets live in n=3, m1=m2=1")
            if self.family == "S":
                raise InvalidSetId("S sets are not used in exact-3d mode")
        if self.family == "S":
            if self.a not in self.params.s_range():
                raise InvalidSetId(f"a={self.a} not in {list(self.params.s_range())}")
        elif self.a is not None:
            raise InvalidSetId("only S sets carry an a index")

    def __str__(self) -> str:
        if self.family == "S":
            return f"S[k={self.k},i={self.i},a={self.a}]"
        return f"{self.family}[k={self.k},i={self.i}]"

    def sort_key(self):
        return (self.family, self.k, self.i, self.a or 0)


_SETID_RE = re.compile(r"^([ABS])\[k=(\d+),i=(\d+)(?:,a=(\d+))?\]$")


def parse_set_id(text: str, params: Params = PARAMS_3D, mode: str = OPEN_ND) -> SetId:
    m = _SETID_RE.match(text.strip())
    if not m:
        raise InvalidSetId(f"cannot parse set id {text!r}")
    fam, k, i, a = m.groups()
    return SetId(fam, int(k), int(i), int(a) if a else None, mode, params)


def A(k, i, params=PARAMS_3D, mode=OPEN_ND) -> SetId:
    return SetId("A", k, i, None, mode, params)


def B(k, i, params=PARAMS_3D, mode=OPEN_ND) -> SetId:
    return SetId("B", k, i, None, mode, params)


def S(k, i, a, params=PARAMS_3D) -> SetId:
    return SetId("S", k, i, a, OPEN_ND, params)


# -- band intervals -----------------------------------------------------------

def narrow(k: int) -> Tuple[Fraction, Fraction]:
    """Open band |x - 1/(k+1)| < (k+1)^-2 / 4."""
    c = Fraction(1, k + 1)
    r = c * c / 4
    return c - r, c + r


def wide(k: int) -> Tuple[Fraction, Fraction]:
    """Open band ((k+1)^-1 - (k+1)^-2/4, k^-1 + k^-2/4)."""
    lo = narrow(k)[0]
    hi = Fraction(1, k) + Fraction(1, 4 * k * k)
    return lo, hi


def near(v: int) -> Tuple[Fraction, Fraction]:
    """Open band |x - v| < 1/4."""
    return v - QUARTER, v + QUARTER


def large(i: int) -> Tuple[Fraction, Fraction]:
    """Open band (i - 1/4, i + 5/4)."""
    return i - QUARTER, i + Fraction(5, 4)


MIDDLE = (HALF, Fraction(2))


@lru_cache(maxsize=65536)
def _fband(lo: Fraction, hi: Fraction):
    flo, fhi = float(lo), float(hi)
    tol = 1e-9 * max(1.0, abs(fhi))
    return flo - tol, flo + tol, fhi - tol, fhi + tol


def in_band(x: Fraction, band: Tuple[Fraction, Fraction]) -> bool:
    """lo < x < hi for an open band, deciding by floats away from the edges."""
    lo_out, lo_in, hi_in, hi_out = _fband(*band)
    f = x.numerator / x.denominator
    if f <= lo_out or f >= hi_out:
        return False
    if lo_in < f < hi_in:
        return True
    return band[0] < x < band[1]


def open_intervals(s: SetId) -> List[Tuple[Fraction, Fraction]]:
    """Per sorted slot, the open interval that slot must lie in (open-nd only)."""
    p = s.params
    n, m1, m2 = p.n, p.m1, p.m2
    k, i = s.k, s.i
    if s.family == "S":
        return [narrow(k)] * s.a + [near(i + 1)] * (n - s.a)
    if not p.high_regime:
        if s.family == "A":
            return [narrow(k)] * (n - m1) + [large(i)] * m1
        return [wide(k)] * m2 + [near(i + 1)] * (n - m2)
    if s.family == "A":
        mid = m1 + m2 - n + 1
        return [narrow(k)] * (n - m1) + [MIDDLE] * mid + [large(i)] * (n - m2 - 1)
    mid = m1 + m2 - n + 1
    return [wide(k)] * (n - m1 - 1) + [MIDDLE] * mid + [near(i + 1)] * (n - m2)


def _member_exact(spec: tuple, s: SetId) -> bool:
    s1, s2, s3 = spec
    k, i = s.k, s.i
    if s.family == "A":
        small = Fraction(1, k)
        if s1 != small or s2 != small:
            return False
        return s3 == i or (i > 1 and s3 == i - 1)
    if s2 != i or s3 != i:
        return False
    ok = s1 == Fraction(1, k) or (k > 1 and s1 == Fraction(1, k - 1))
    return ok and spec != (1, 1, 1)


@lru_cache(maxsize=65536)
def _bands(s: SetId):
    # exact intervals plus float copies widened/narrowed by a safety margin
    out = []
    for lo, hi in open_intervals(s):
        flo, fhi = float(lo), float(hi)
        tol = 1e-9 * max(1.0, abs(fhi))
        out.append((lo, hi, flo - tol, flo + tol, fhi - tol, fhi + tol))
    return tuple(out)


def member(d: DiagMatrix, s: SetId) -> bool:
    if d.n != s.params.n:
        raise InvalidSetId(f"matrix has n={d.n}, set expects n={s.params.n}")
    spec = sorted_spectrum(d)
    if s.mode == EXACT_3D:
        return _member_exact(spec, s)
    for x, (lo, hi, lo_out, lo_in, hi_in, hi_out) in zip(spec, _bands(s)):
        f = x.numerator / x.denominator
        if f <= lo_out or f >= hi_out:
            return False
        if lo_in < f < hi_in:
            continue
        if not lo < x < hi:      # close to an edge: decide exactly
            return False
    return True


def margin(d: DiagMatrix, s: SetId) -> Fraction:
    """Smallest distance from the sorted spectrum to the set's band edges.

    Positive exactly for members of an open-nd set; any entrywise
    perturbation smaller than this keeps membership.
    """
    if s.mode != OPEN_ND:
        raise InvalidSetId("margins are defined for open-nd sets only")
    spec = sorted_spectrum(d)
    return min(min(x - lo, hi - x) for x, (lo, hi) in zip(spec, open_intervals(s)))


def inverse_set(s: SetId) -> Callable[[DiagMatrix], bool]:
    """Predicate D -> member(D^-1, s), i.e. membership in s^-1."""
    def pred(d: DiagMatrix) -> bool:
        return member(inverse(d), s)
    return pred


def stage_sets(j: int, params: Params, mode: str) -> Iterator[SetId]:
    """All sets in the stage-j union, without duplicates."""
    for i in range(1, j + 1):
        yield SetId("A", j, i, None, mode, params)
        yield SetId("B", i, j, None, mode, params)
    if mode == OPEN_ND:
        for a in params.s_range():
            for i in range(1, j + 1):
                yield SetId("S", j, i, a, mode, params)
                if i != j:
                    yield SetId("S", i, j, a, mode, params)


def _varying_index(s: SetId) -> int:
    # A_j^i varies in i, B_i^j in k; used for adjacent-index ties
    return s.i if s.family == "A" else s.k


def resolve(hits: List[SetId], mode: str) -> SetId:
    """Pick one set among several that contain the same matrix.

    Adjacent sets of one family overlap by construction of the bands; such
    ties go to the larger index in exact-3d and the smaller in open-nd.
    Anything else is a genuine ambiguity.
    """
    if len(hits) == 1:
        return hits[0]
    fams = {h.family for h in hits}
    if len(fams) == 1 and fams <= {"A", "B"}:
        idx = sorted(_varying_index(h) for h in hits)
        if all(b - a == 1 for a, b in zip(idx, idx[1:])):
            pick = idx[-1] if mode == EXACT_3D else idx[0]
            return next(h for h in hits if _varying_index(h) == pick)
    raise AmbiguousMembership("matrix lies in " + ", ".join(str(h) for h in hits))


def classify(d: DiagMatrix, j: int, params: Params = PARAMS_3D, mode: str = EXACT_3D) -> Optional[SetId]:
    """The stage-j set containing ``d``, or None when it lies in none."""
    if mode == EXACT_3D and params != PARAMS_3D:
        raise InvalidSetId("exact-3d classification requires n=3, m1=m2=1")
    hits = [s for s in stage_sets(j, params, mode) if member(d, s)]
    if not hits:
        return None
    return resolve(hits, mode)


def random_member(s: SetId, rng: random.Random, denom: int = 997, shuffle: bool = True,
                  tries: int = 200) -> DiagMatrix:
    """Seeded rational member of an open-nd set.

    Each sorted slot gets a point of its interval, shrunk by a fifth of the
    width on each side, on a grid of spacing width/denom.
    """
    if s.mode != OPEN_ND:
        raise InvalidSetId("random members are drawn from open-nd sets")
    ivs = open_intervals(s)
    for _ in range(tries):
        vals = []
        for lo, hi in ivs:
            w = hi - lo
            t = Fraction(rng.randint(1, denom - 1), denom)
            vals.append(lo + w / 5 + t * w * Fraction(3, 5))
        if shuffle:
            rng.shuffle(vals)
        d = DiagMatrix(vals)
        if member(d, s):
            return d
    raise InvalidSetId(f"could not draw a member of {s}")
