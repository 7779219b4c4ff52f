"""Measure analytics: mass profiles, tails of nu and nu^-1, exponent fits,
pushforward volumes and degeneracy (rank-collapse) profiles.

These functions accept any laminate, certified or not.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import InsufficientPoints
from .laminate import Laminate, inverse_laminate
from .matrix import DiagMatrix, det, op_norm, sorted_spectrum
from .sets import EXACT_3D, PARAMS_3D, Params, SetId, classify, inverse_set, member


@dataclass
class MassProfile:
    masses: Dict[SetId, Fraction]
    unclassified: Fraction

    def total(self) -> Fraction:
        return sum(self.masses.values(), Fraction(0)) + self.unclassified


@dataclass
class TailTable:
    thresholds: List[float]
    masses: List[float]
    exact: List[Fraction]

    def rows(self) -> List[Tuple[float, float]]:
        return list(zip(self.thresholds, self.masses))


@dataclass
class ExponentFit:
    slope: float
    intercept: float
    r2: float
    range: Tuple[float, float]

    def to_json(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2,
                "range": list(self.range)}


def mass_profile(nu: Laminate, j: int, params: Params = PARAMS_3D, mode: str = EXACT_3D) -> MassProfile:
    masses: Dict[SetId, Fraction] = {}
    lost = Fraction(0)
    for w, m in nu:
        s = classify(m, j, params, mode)
        if s is None:
            lost += w
        else:
            masses[s] = masses.get(s, Fraction(0)) + w
    return MassProfile(dict(sorted(masses.items(), key=lambda kv: kv[0].sort_key())), lost)


def default_thresholds(j: int) -> List[int]:
    return list(range(2, max(j, 2) + 1))


def _check_ascending(thresholds) -> List[Fraction]:
    ts = [Fraction(t) for t in thresholds]
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise ValueError("thresholds must be strictly ascending")
    return ts


def tail(nu: Laminate, thresholds: Sequence) -> TailTable:
    """nu({|A| > t}) for each threshold, with |A| the operator norm."""
    ts = _check_ascending(thresholds)
    norms = [(w, op_norm(m)) for w, m in nu]
    exact = [sum((w for w, s in norms if s > t), Fraction(0)) for t in ts]
    return TailTable([float(t) for t in ts], [float(x) for x in exact], exact)


def tail_inverse(nu: Laminate, thresholds: Sequence) -> TailTable:
    return tail(inverse_laminate(nu), thresholds)


def fit_exponent(table: TailTable, range: Optional[Tuple[float, float]] = None) -> ExponentFit:
    """Least-squares slope of log(mass) against log(t), natural logs, unweighted.

    Zero masses are skipped; fewer than three remaining points is an error.
    """
    lo, hi = range if range is not None else (-math.inf, math.inf)
    pts = [(t, m) for t, m in zip(table.thresholds, table.masses) if lo <= t <= hi and m > 0]
    if len(pts) < 3:
        raise InsufficientPoints(f"need 3 positive points in range, have {len(pts)}")
    xs = [math.log(t) for t, _ in pts]
    ys = [math.log(m) for _, m in pts]
    slope, intercept = statistics.linear_regression(xs, ys)
    mean = statistics.fmean(ys)
    ss_tot = sum((y - mean) ** 2 for y in ys)
    ss_res = sum((y - slope * x - intercept) ** 2 for x, y in zip(xs, ys))
    r2 = 1.0 if ss_tot == 0 else 1 - ss_res / ss_tot
    return ExponentFit(slope, intercept, r2, (pts[0][0], pts[-1][0]))


def pushforward_volume(nu: Laminate) -> Dict[DiagMatrix, Fraction]:
    """lambda * det(A) per atom: image-volume fractions before normalizing."""
    return {m: w * det(m) for w, m in nu}


def degeneracy_profile(nu: Laminate, thresholds: Sequence) -> dict:
    """Mass with sigma_1 < theta and mass with sigma_n > 1/theta, per theta in (0, 1].

    Both sides measure distance from the identity band, so a Dirac mass at
    I carries no degenerate mass for any theta < 1.
    """
    ts = [Fraction(t) for t in thresholds]
    if any(not 0 < t <= 1 for t in ts):
        raise ValueError("degeneracy thresholds must lie in (0, 1]")
    spec = [(w, sorted_spectrum(m)) for w, m in nu]
    below = {t: sum((w for w, s in spec if s[0] < t), Fraction(0)) for t in ts}
    above = {t: sum((w for w, s in spec if s[-1] * t > 1), Fraction(0)) for t in ts}
    return {"mass_smallest_below": below, "mass_largest_above": above}


def rank_collapse(nu: Laminate, j: int, params: Params = PARAMS_3D,
                  mode: str = EXACT_3D) -> Tuple[Fraction, Fraction]:
    """(1 - nu(union_i A_j^i), 1 - nu^-1(union_i (B_i^j)^-1)) for a stage-j laminate."""
    a_sets = [SetId("A", j, i, None, mode, params) for i in range(1, j + 1)]
    b_preds = [inverse_set(SetId("B", i, j, None, mode, params)) for i in range(1, j + 1)]
    a_mass = sum((w for w, m in nu if any(member(m, s) for s in a_sets)), Fraction(0))
    inv = inverse_laminate(nu)
    b_mass = sum((w for w, m in inv if any(p(m) for p in b_preds)), Fraction(0))
    return 1 - a_mass, 1 - b_mass
