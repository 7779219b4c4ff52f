"""Randomized contract sweeps for the n-D split and push lemmas.

Each lemma has a list of bullets.  Exact bullets are checked with rational
comparisons on every sample.  Rate bullets record quantity / rate; a
constant is fitted per bullet as the largest ratio seen.

Cells are grouped in shells by their largest index, and a ratio must not
drift upward: the maximum over the outermost shell may exceed the maximum
over the shell before it by at most ``drift`` (20%).  Power-law growth of
order one or more fails.  So can a ratio with a finite but slowly reached
limit, since factors like (k/(k+1))^6 still climb about 18% per shell at
k = 5; ``drifting`` lists the flagged bullets so they can be probed on a
larger range with ``rate_probe``.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from .laminate import barycenter, merge_atoms
from .matrix import DiagMatrix, dist, inverse
from .parallel import parallel_map
from .sets import OPEN_ND, Params, SetId, classify, member, random_member
from .staircase_nd import (a_leaf_weight_bound, a_leading_weight, inverse_transport, push_A_row_nd,
                           push_B_row_nd, split_A_nd, split_B_nd, split_S_nd, transport)

LEMMAS = ("split_A_nd", "split_B_nd", "split_S_nd", "push_A_row_nd", "push_B_row_nd")


def _sid(fam, k, i, p, a=None) -> SetId:
    return SetId(fam, k, i, a, OPEN_ND, p)


def _masses(nu, allowed: List[SetId]) -> Tuple[Dict[SetId, Fraction], bool]:
    """Mass per allowed set; the flag is False if some atom hits none of them."""
    out = {s: Fraction(0) for s in allowed}
    ok = True
    for w, m in nu:
        hits = [s for s in allowed if member(m, s)]
        if not hits:
            ok = False
            continue
        out[hits[0]] += w
    return out, ok


def _pr(p: Params):
    return (p.reduced() if p.high_regime else p)


# every check returns a list of (bullet, kind, value); kind "exact" -> bool, "rate" -> ratio

def check_split_A(a: DiagMatrix, k: int, i: int, p: Params) -> list:
    leaves = []
    cert = split_A_nd(a, k, i, p, leaves=leaves)
    atoms = cert.atoms()
    nu = merge_atoms(atoms)
    q = _pr(p)
    n_, m1_, m2_ = q.n, q.m1, q.m2
    S = [_sid("S", k + 1, i, p, x) for x in p.s_range()]
    masses, ok = _masses(nu, [_sid("A", k + 1, i, p), _sid("B", k + 1, i, p)] + S)
    w1, m1 = atoms[0]
    weights = [w for w, _ in atoms]
    out = [
        ("barycenter", "exact", barycenter(nu) == a),
        ("support", "exact", ok),
        ("mass A <= 1", "exact", masses[_sid("A", k + 1, i, p)] <= 1),
        ("mass B", "rate", float(masses[_sid("B", k + 1, i, p)]) / (k * k * i) ** (m1_ + m2_ - n_)),
        ("M1 in A_{k+1}^i", "exact", member(m1, _sid("A", k + 1, i, p))),
        ("|A-M1| <= k^-2", "exact", dist(a, m1) <= Fraction(1, k * k)),
        ("|A^-1-M1^-1|", "rate", float(dist(inverse(a), inverse(m1)))),
        ("1-lambda1", "rate", float(1 - w1) * k * k * i),
        ("lambda1 = product", "exact", w1 == a_leading_weight(a, k, i, p)),
        ("leaf weight cap", "exact", all(w <= a_leaf_weight_bound(c, k, i)
                                         for w, (c, _) in zip(weights, leaves))),
    ]
    for s in S:
        out.append((f"mass S[a={s.a}]", "rate", float(masses[s]) / (k * k * i) ** (m1_ + s.a - n_)))
    return out


def check_split_B(a: DiagMatrix, k: int, i: int, p: Params) -> list:
    cert = split_B_nd(a, k, i, p)
    atoms = cert.atoms()
    nu = merge_atoms(atoms)
    q = _pr(p)
    n_, m1_, m2_ = q.n, q.m1, q.m2
    A_, B_ = _sid("A", k, i + 1, p), _sid("B", k, i + 1, p)
    S = [_sid("S", k, i + 1, p, x) for x in p.s_range()]
    masses, ok = _masses(nu, [A_, B_] + S)
    w1, m1 = atoms[0]
    lead = (Fraction(i + 2, i + 3)) ** (n_ - m2_)
    out = [
        ("barycenter", "exact", barycenter(nu) == a),
        ("support", "exact", ok),
        ("mass A", "rate", float(masses[A_]) / i ** (m1_ + m2_ - n_)),
        ("mass B - lead", "rate", float(masses[B_] - lead) * (k * i) ** 2),
        ("M1 in B_k^{i+1}", "exact", member(m1, B_)),
        ("|A-M1| = 1", "exact", dist(a, m1) == 1),
        ("|A^-1-M1^-1| <= i^-2", "exact", dist(inverse(a), inverse(m1)) <= Fraction(1, i * i)),
        ("1-lambda1", "rate", float(1 - w1) * i),
    ]
    for s in S:
        out.append((f"mass S[a={s.a}]", "rate", float(masses[s]) / i ** (m2_ - s.a)))
    return out


def check_split_S(a: DiagMatrix, k: int, i: int, p: Params, a0: int) -> list:
    cert = split_S_nd(a, k, i, a0, p)
    nu = merge_atoms(cert.atoms())
    n, m1, m2 = p.n, p.m1, p.m2
    A_, B_ = _sid("A", k + 1, i + 1, p), _sid("B", k + 1, i + 1, p)
    S = [_sid("S", k + 1, i + 1, p, x) for x in p.s_range()]
    masses, ok = _masses(nu, [A_, B_] + S)
    out = [
        ("barycenter", "exact", barycenter(nu) == a),
        ("support", "exact", ok),
        ("mass A", "rate", float(masses[A_]) / i ** (a0 + m1 - n)),
        ("mass B", "rate", float(masses[B_]) / (k * k * i) ** (m2 - a0)),
        ("transport", "rate", float(transport(a, nu))),
        ("inverse transport", "rate", float(inverse_transport(a, nu))),
    ]
    for s in S:
        w = masses[s]
        if s.a < a0:
            out.append((f"mass S[a={s.a}]", "rate", float(w) / (k * k * i) ** (s.a - a0)))
        elif s.a == a0:
            lead = Fraction(i + 2, i + 3) ** (n - a0)
            out.append((f"mass S[a={s.a}] - lead", "rate", float(w - lead) * (k * i) ** 2))
        else:
            out.append((f"mass S[a={s.a}]", "rate", float(w) / i ** (a0 - s.a)))
    return out


def check_push_A(a: DiagMatrix, i: int, j: int, p: Params) -> list:
    cert = push_A_row_nd(a, i, j, p)
    nu = merge_atoms(cert.atoms())
    q = _pr(p)
    n_, m1_, m2_ = q.n, q.m1, q.m2
    As = [_sid("A", j + 1, i + b, p) for b in range(0, j - i + 2)]
    Bj = _sid("B", j + 1, j + 1, p)
    Ss = [_sid("S", j + 1, i + b, p, x) for b in range(0, j - i + 2) for x in p.s_range()]
    masses, ok = _masses(nu, As + [Bj] + Ss)
    e = 2 * (m1_ + m2_ - n_)
    out = [
        ("barycenter", "exact", barycenter(nu) == a),
        ("support", "exact", ok),
        ("mass A_{j+1}^i <= 1", "exact", masses[As[0]] <= 1),
        ("mass B_{j+1}^{j+1}", "rate",
         float(masses[Bj]) / (float(j) ** (2 * m1_ + 3 * m2_ - 3 * n_) * i ** m1_)),
        ("transport", "rate", float(transport(a, nu)) * j * j),
        ("inverse transport", "rate", float(inverse_transport(a, nu))),
    ]
    for b, s in enumerate(As[1:], start=1):
        rate = float(j) ** e * i ** m1_ / (i + b) ** (m1_ + 2)
        out.append(("mass A_{j+1}^{i+b}", "rate", float(masses[s]) / rate))
    for s in Ss:
        if s.i == i:
            rate = float(j * j * i) ** (m1_ + s.a - n_)
        else:
            rate = float(j) ** e * i ** m1_ * float(s.i) ** (2 * m2_ - s.a - n_)
        out.append((f"mass S_{{j+1,{'i' if s.i == i else 'i+b'}}}", "rate", float(masses[s]) / rate))
    return out


def check_push_B(a: DiagMatrix, i: int, j: int, p: Params) -> list:
    cert = push_B_row_nd(a, i, j, p)
    nu = merge_atoms(cert.atoms())
    q = _pr(p)
    n_, m1_, m2_ = q.n, q.m1, q.m2
    Aj = _sid("A", j + 1, j + 1, p)
    Bs = [_sid("B", i + b, j + 1, p) for b in range(0, j - i + 2)]
    Ss = [_sid("S", i + b, j + 1, p, x) for b in range(0, j - i + 2) for x in p.s_range()]
    masses, ok = _masses(nu, [Aj] + Bs + Ss)
    lead = Fraction(j + 2, j + 3) ** (n_ - m2_)
    e = 2 * (m1_ + m2_ - n_)
    out = [
        ("barycenter", "exact", barycenter(nu) == a),
        ("support", "exact", ok),
        ("mass A_{j+1}^{j+1}", "rate", float(masses[Aj]) / float(j) ** (m1_ + m2_ - n_)),
        ("mass B_i^{j+1} - lead", "rate", float(masses[Bs[0]] - lead) * (i * j) ** 2),
        ("transport", "rate", float(transport(a, nu))),
        ("inverse transport", "rate", float(inverse_transport(a, nu)) * j * j),
    ]
    for b, s in enumerate(Bs[1:], start=1):
        out.append(("mass B_{i+b}^{j+1}", "rate", float(masses[s]) / float((i + b) * (j + 3)) ** e))
    for s in Ss:
        if s.k == i:
            rate = float(j) ** (m2_ - s.a)
        else:
            rate = float(j) ** (m1_ + m2_ - n_) * float((s.k - 1) ** 2 * (j + 1)) ** (m1_ + s.a - n_)
        out.append((f"mass S_{{{'i' if s.k == i else 'i+b'},j+1}}", "rate", float(masses[s]) / rate))
    return out


# -- driver -------------------------------------------------------------------------

@dataclass
class BulletResult:
    name: str
    kind: str
    samples: int = 0
    failures: int = 0
    fitted_c: float = float("-inf")
    shell_max: Dict[int, float] = field(default_factory=dict)
    drift_ok: bool = True

    def to_json(self) -> dict:
        d = dict(self.__dict__)
        if d["fitted_c"] == float("-inf"):
            d["fitted_c"] = None
        d["shell_max"] = {str(k): v for k, v in sorted(self.shell_max.items())}
        return d


@dataclass
class SweepResult:
    lemma: str
    params: Params
    samples_per_cell: int
    cells: List[Tuple[int, int]]
    bullets: Dict[str, BulletResult] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(b.failures == 0 and b.drift_ok and (b.kind == "exact" or math.isfinite(b.fitted_c))
                   for b in self.bullets.values())

    @property
    def drifting(self) -> List[str]:
        return [b.name for b in self.bullets.values() if not b.drift_ok]

    def to_json(self) -> dict:
        return {
            "lemma": self.lemma,
            "params": [self.params.n, self.params.m1, self.params.m2],
            "samples_per_cell": self.samples_per_cell,
            "cells": [list(c) for c in self.cells],
            "ok": self.ok,
            "drifting": self.drifting,
            "bullets": [b.to_json() for b in self.bullets.values()],
        }


def lemma_cells(lemma: str, grid: int) -> List[Tuple[int, int]]:
    if lemma.startswith("push"):
        return [(i, j) for j in range(1, grid + 1) for i in range(1, j + 1)]
    return [(k, i) for k in range(1, grid + 1) for i in range(1, grid + 1)]


def _source_set(lemma: str, cell, p: Params, a0) -> SetId:
    x, y = cell
    if lemma == "split_A_nd":
        return _sid("A", x, y, p)
    if lemma == "split_B_nd":
        return _sid("B", x, y, p)
    if lemma == "split_S_nd":
        return _sid("S", x, y, p, a0)
    if lemma == "push_A_row_nd":
        return _sid("A", y, x, p)      # A_j^i
    return _sid("B", x, y, p)          # B_i^j


def _run_cell(args):
    lemma, cell, p, samples, seed, a0 = args
    rng = random.Random(f"{seed}:{lemma}:{cell[0]}:{cell[1]}:{a0}")
    src = _source_set(lemma, cell, p, a0)
    rows = []
    for _ in range(samples):
        m = random_member(src, rng)
        x, y = cell
        if lemma == "split_A_nd":
            rows.append(check_split_A(m, x, y, p))
        elif lemma == "split_B_nd":
            rows.append(check_split_B(m, x, y, p))
        elif lemma == "split_S_nd":
            rows.append(check_split_S(m, x, y, p, a0))
        elif lemma == "push_A_row_nd":
            rows.append(check_push_A(m, x, y, p))
        else:
            rows.append(check_push_B(m, x, y, p))
    return rows


def run_sweep(lemma: str, params: Params, samples: int = 100, grid: int = 6, seed: int = 0,
              drift: float = 1.2, threads: Optional[int] = None,
              a0: Optional[int] = None) -> SweepResult:
    if lemma not in LEMMAS:
        raise ValueError(f"unknown lemma {lemma!r}")
    if lemma == "split_S_nd" and a0 is None:
        a0 = min(params.s_range())
    cells = lemma_cells(lemma, grid)
    jobs = [(lemma, c, params, samples, seed, a0) for c in cells]
    per_cell = parallel_map(_run_cell, jobs, threads)
    res = SweepResult(lemma, params, samples, cells)
    for cell, rows in zip(cells, per_cell):
        shell = max(cell)
        for row in rows:
            for name, kind, val in row:
                b = res.bullets.setdefault(name, BulletResult(name, kind))
                b.samples += 1
                if kind == "exact":
                    b.failures += 0 if val else 1
                    continue
                b.fitted_c = max(b.fitted_c, val)
                b.shell_max[shell] = max(b.shell_max.get(shell, float("-inf")), val)
    for b in res.bullets.values():
        if b.kind != "rate" or grid < 2:
            continue
        last, prev = b.shell_max.get(grid, float("-inf")), b.shell_max.get(grid - 1, float("-inf"))
        if last > 0:
            b.drift_ok = prev > 0 and last <= drift * prev
    return res


def rate_probe(lemma: str, params: Params, cells: List[Tuple[int, int]], seed: int = 0,
               a0: Optional[int] = None) -> Dict[str, List[float]]:
    """Largest ratio per rate bullet for one sample in each given cell, in order.

    Used to look past the sweep grid when a bullet is flagged as drifting.
    """
    if lemma == "split_S_nd" and a0 is None:
        a0 = min(params.s_range())
    out: Dict[str, List[float]] = {}
    for pos, cell in enumerate(cells):
        for name, kind, val in _run_cell((lemma, cell, params, 1, seed, a0))[0]:
            if kind != "rate":
                continue
            row = out.setdefault(name, [])
            while len(row) <= pos:
                row.append(float("-inf"))
            row[pos] = max(row[pos], val)
    return out
