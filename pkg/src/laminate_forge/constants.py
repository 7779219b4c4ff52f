"""The recursive constant families C^1_{j,i}, C^2_{j,i}, M_j and a plateau test.

Every recurrence is linear and homogeneous in (C^1, C^2, M), so the float
run keeps the current rows divided by a running scale and tracks the scale
in natural-log form.  Very large values (c_tilde = 2*16^n, small eps')
therefore never overflow; the archived suprema are kept as logs and turned
into floats only on request.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from .errors import InvalidParams

RESCALE_AT = 1e150


@dataclass
class ConstantsTrace:
    epsilon_prime: float
    c_tilde: float
    n: int
    j_max: int
    log_m: List[float]          # log M_j for j = 1..j_max
    log_c2: List[float]         # log max_i C^2_{j,i}
    scaled: List[tuple] = field(default_factory=list)   # (M_j, max C2, log scale) before rescaling
    c1_rows: Dict[int, List[float]] = field(default_factory=dict)   # j -> [_, C1_{j,1}, ..., C1_{j,j}]
    c2_rows: Dict[int, List[float]] = field(default_factory=dict)   # j -> [C2_{j,0}, ..., C2_{j,j}]

    def __len__(self) -> int:
        return len(self.log_m)

    @property
    def m(self) -> List[float]:
        return [_unscale(m, ls) for m, _, ls in self.scaled]

    @property
    def c2_max(self) -> List[float]:
        return [_unscale(c, ls) for _, c, ls in self.scaled]

    def rows_csv(self) -> List[tuple]:
        """(j, M_j, max_i C^2_{j,i}, log10 M_j, log10 max C^2) per row."""
        k = 1 / math.log(10)
        return [(j + 1, m, c, a * k, b * k)
                for j, (m, c, a, b) in enumerate(zip(self.m, self.c2_max, self.log_m, self.log_c2))]


def _unscale(x: float, log_scale: float) -> float:
    # exact while no rescaling has happened
    return x if log_scale == 0 else _exp(math.log(x) + log_scale)


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _validate(epsilon_prime, c_tilde, n, j_max):
    if not epsilon_prime > 0:
        raise InvalidParams(f"epsilon_prime must be positive, got {epsilon_prime}")
    if not c_tilde > 1:
        raise InvalidParams(f"c_tilde must exceed 1, got {c_tilde}")
    if n < 2:
        raise InvalidParams(f"n must be at least 2, got {n}")
    if j_max < 1:
        raise InvalidParams(f"j_max must be at least 1, got {j_max}")


def constants_run(epsilon_prime: float, c_tilde: float, n: int, j_max: int,
                  keep_rows: int = 0) -> ConstantsTrace:
    """Run the recurrences up to row j_max.

    Only the current row pair is stored; rows j <= ``keep_rows`` are also
    archived unscaled for the stage mass checks.
    """
    _validate(epsilon_prime, c_tilde, n, j_max)
    ct, eps = float(c_tilde), float(epsilon_prime)
    c1 = np.array([4.0 ** n])                 # C1_{j,i}, i = 1..j
    c2 = np.array([0.0, 4.0 ** n])            # C2_{j,i}, i = 0..j
    log_scale = 0.0
    trace = ConstantsTrace(eps, ct, n, j_max, [], [])
    for j in range(1, j_max + 1):
        m, c2_top = float(c1.max()), float(c2.max())
        trace.scaled.append((m, c2_top, log_scale))
        trace.log_m.append(math.log(m) + log_scale)
        trace.log_c2.append(math.log(c2_top) + log_scale)
        if j <= keep_rows:
            f = math.exp(log_scale)
            trace.c1_rows[j] = [math.nan] + [float(x) * f for x in c1]
            trace.c2_rows[j] = [float(x) * f for x in c2]
        if j == j_max:
            break
        i = np.arange(1, j + 1, dtype=float)
        new_c1 = np.empty(j + 1)
        new_c1[:j] = c1 + ct * m / (j * j) + ct * c2[:j] * (j + 2 - i) ** -2
        new_c1[j] = ct * (m + c2[j]) * j ** -eps
        new_c2 = np.empty(j + 2)
        new_c2[0] = 0.0
        new_c2[1:j + 1] = c2[:j] * (1 + ct * i ** -2) + ct * m * i ** (-2 + eps)
        new_c2[j + 1] = c2[j] * (1 + ct / (j * j)) + ct * m * j ** -4.0
        c1, c2 = new_c1, new_c2
        top = max(float(c1.max()), float(c2.max()))
        if top > RESCALE_AT:
            c1 = c1 / top
            c2 = c2 / top
            log_scale += math.log(top)
    return trace


def constants_run_exact(epsilon_prime: float, c_tilde, n: int, j_max: int) -> List[Fraction]:
    """M_j with rational arithmetic, for cross-checking the float run.

    The irrational powers j^-eps' are rounded to doubles once and then used
    as exact rationals, so any disagreement comes from float accumulation.
    """
    _validate(epsilon_prime, c_tilde, n, j_max)
    ct = Fraction(c_tilde)
    pw = lambda x, e: Fraction(float(x) ** e)
    c1 = [None, Fraction(4) ** n]
    c2 = [Fraction(0), Fraction(4) ** n]
    ms = []
    for j in range(1, j_max + 1):
        m = max(c1[1:])
        ms.append(m)
        if j == j_max:
            break
        n1 = [None] * (j + 2)
        n2 = [Fraction(0)] * (j + 2)
        for i in range(1, j + 1):
            n1[i] = c1[i] + ct * m / (j * j) + ct * c2[i - 1] / (j + 2 - i) ** 2
            n2[i] = c2[i - 1] * (1 + ct / (i * i)) + ct * m * pw(i, -2 + epsilon_prime)
        n1[j + 1] = ct * (m + c2[j]) * pw(j, -epsilon_prime)
        n2[j + 1] = c2[j] * (1 + ct / (j * j)) + ct * m / j ** 4
        c1, c2 = n1, n2
    return ms


@dataclass
class BoundedReport:
    m_sup_estimate: float
    c2_sup_estimate: float
    plateaued: bool
    reason: str = ""
    m_rel_increment: Optional[float] = None
    c2_rel_increment: Optional[float] = None
    log10_m_sup: Optional[float] = None
    log10_c2_sup: Optional[float] = None

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _rel_increment(logs: List[float]) -> float:
    # (sup_end - sup_mid) / sup_end over the last half, computed from logs
    run, best = [], -math.inf
    for x in logs:
        best = max(best, x)
        run.append(best)
    mid = run[len(run) // 2 - 1]
    return -math.expm1(mid - run[-1])


def detect_bounded(trace: ConstantsTrace, tol: float = 1e-6, min_length: int = 10) -> BoundedReport:
    """Plateau iff both running suprema grew by less than ``tol`` (relative)
    over the last half of the run."""
    if len(trace) < min_length:
        return BoundedReport(math.nan, math.nan, False,
                             f"insufficient length: {len(trace)} rows, need at least {min_length}")
    lm, lc = max(trace.log_m), max(trace.log_c2)
    dm, dc = _rel_increment(trace.log_m), _rel_increment(trace.log_c2)
    ok = dm < tol and dc < tol
    reason = "" if ok else (f"relative tail increments M: {dm:.3g}, C2: {dc:.3g} (need < {tol:g})")
    k = 1 / math.log(10)
    return BoundedReport(_exp(lm), _exp(lc), ok, reason, dm, dc, lm * k, lc * k)
