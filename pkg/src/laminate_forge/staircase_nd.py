"""General-dimension staircase at the measure level (open set families).

All split lemmas work in sorted coordinates: slot s of a matrix is its
s-th smallest entry, and every split is emitted at the original position
holding that slot.  Trees are grown depth first with the "main" child kept
in the parent's slot, so the leading atom M_1 is always atom 0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import (CounterViolation, InvariantViolation, MassBoundViolation, NotInSet,
                     RegimeMismatch, UnsupportedRegime)
from .laminate import (Atom, CertificateBuilder, Laminate, SplitCertificate, barycenter, compose,
                       merge_atoms)
from .matrix import DiagMatrix, identity, sort_order
from .parallel import parallel_map
from .sets import OPEN_ND, Params, SetId, classify, in_band, member, narrow, near, wide

QUARTER = Fraction(1, 4)


_inside = in_band

@dataclass(frozen=True)
class SplitCounters:
    beta1: int
    beta2: int
    beta3: int
    gamma1: int
    gamma2: int
    gamma3: int


# -- tree growth ----------------------------------------------------------------

Chooser = Callable[[List[Fraction]], Optional[Tuple[int, Fraction, Fraction]]]


def _grow(builder: CertificateBuilder, idx: int, vals: List[Fraction], slot_pos: Sequence[int],
          choose: Chooser) -> int:
    """Split atom ``idx`` (slot values ``vals``) until ``choose`` says stop.

    ``choose`` returns (slot, main value, other value) or None at a leaf.
    Returns the number of leaves produced.
    """
    pick = choose(vals)
    if pick is None:
        return 1
    slot, main, other = pick
    x = vals[slot]
    lam = (other - x) / (other - main)
    builder.split(idx, slot_pos[slot] + 1, main, other, lam)
    left = list(vals)
    left[slot] = main
    right = list(vals)
    right[slot] = other
    n_left = _grow(builder, idx, left, slot_pos, choose)
    return n_left + _grow(builder, idx + n_left, right, slot_pos, choose)


def _build(a: DiagMatrix, choose: Chooser) -> SplitCertificate:
    order = sort_order(a)
    vals = [a.entries[p] for p in order]
    b = CertificateBuilder(a)
    _grow(b, 0, vals, order, choose)
    return b.build()


# -- the m1 + m2 >= n reduction -----------------------------------------------------

def _frozen_slots(params: Params, family: str) -> range:
    n, m1, m2 = params.n, params.m1, params.m2
    if family == "A":
        return range(n - m1, m2 + 1)      # sorted slots n-m1+1 .. m2+1, 1-based
    if family == "B":
        return range(n - m1 - 1, m2)      # sorted slots n-m1 .. m2, 1-based
    raise RegimeMismatch(f"no frozen block for family {family!r}")


def reduce_freeze(a: DiagMatrix, params: Params, family: str = "A") -> Tuple[DiagMatrix, Tuple[int, ...]]:
    """Drop the middle eigenvalues held fixed when m1 + m2 >= n.

    Returns the n'-dimensional matrix of remaining entries (positional order
    kept) and the 0-based positions that were frozen.
    """
    if not params.high_regime:
        raise RegimeMismatch(f"m1+m2={params.m1 + params.m2} < n={params.n}: nothing to freeze")
    if a.n != params.n:
        raise RegimeMismatch(f"matrix has n={a.n}, params expect n={params.n}")
    order = sort_order(a)
    frozen = tuple(sorted(order[s] for s in _frozen_slots(params, family)))
    for p in frozen:
        if not Fraction(1, 2) < a.entries[p] < 2:
            raise RegimeMismatch(f"entry {a.entries[p]} at position {p + 1} is not in (1/2, 2)")
    keep = [e for p, e in enumerate(a.entries) if p not in frozen]
    return DiagMatrix(keep), frozen


def _keep_positions(n: int, frozen: Sequence[int]) -> List[int]:
    return [p for p in range(n) if p not in frozen]


def expand_certificate(cert: SplitCertificate, original: DiagMatrix, frozen: Sequence[int]) -> SplitCertificate:
    """Lift a certificate built on the reduced matrix back to ``original``."""
    keep = _keep_positions(original.n, frozen)
    if len(keep) != cert.root.n or [original.entries[p] for p in keep] != list(cert.root.entries):
        raise RegimeMismatch("reduced root does not match the original matrix")
    b = CertificateBuilder(original)
    for st in cert.steps:
        b.split(st.atom_index, keep[st.position - 1] + 1, st.low, st.high, st.lam)
    return b.build()


def expand(nu: Laminate, original: DiagMatrix, frozen: Sequence[int]) -> Laminate:
    """Re-insert the frozen entries of ``original`` into every atom of ``nu``."""
    keep = _keep_positions(original.n, frozen)
    out = []
    for w, m in nu:
        vals = list(original.entries)
        for p, e in zip(keep, m.entries):
            vals[p] = e
        out.append(Atom(w, DiagMatrix(vals)))
    return Laminate(out, check=False)


def _maybe_reduced(a: DiagMatrix, params: Params, family: str, build: Callable) -> SplitCertificate:
    if not params.high_regime:
        return build(a, params)
    red, frozen = reduce_freeze(a, params, family)
    return expand_certificate(build(red, params.reduced()), a, frozen)


# -- A split ------------------------------------------------------------------------

def _a_chooser(k: int, i: int, params: Params, b: int, leaves: Optional[list]) -> Chooser:
    n, m1, m2 = params.n, params.m1, params.m2
    nk, nk1, ni1 = narrow(k), narrow(k + 1), near(i + 1)
    lo, hi = Fraction(1, k + 2), Fraction(i + 1)
    small = range(0, n - m1)
    mid = range(n - m1, n - b)

    def counters(vals) -> SplitCounters:
        b1 = sum(_inside(vals[s], nk) for s in small)
        b2 = sum(_inside(vals[s], nk1) for s in small)
        b3 = sum(_inside(vals[s], ni1) for s in small)
        g1 = sum(i - QUARTER < vals[s] <= i + Fraction(3, 4) for s in mid)
        g2 = sum(_inside(vals[s], nk1) for s in mid)
        g3 = sum(_inside(vals[s], ni1) for s in mid)
        return SplitCounters(b1, b2, b3, g1, g2, g3)

    def choose(vals):
        c = counters(vals)
        if c.beta1 + c.beta2 + c.gamma2 > n - m1:
            raise CounterViolation(f"small-eigenvalue count exceeds n-m1 at {c}")
        if c.beta3 + c.gamma1 + c.gamma3 > n - m2 - b:
            raise CounterViolation(f"large-eigenvalue count exceeds n-m2-b at {c}")
        if c.beta1 + c.beta2 + c.beta3 + c.gamma1 + c.gamma2 + c.gamma3 != n - b:
            raise CounterViolation(f"counters do not cover n-b slots at {c}")
        label = None
        if c.beta2 + c.gamma2 == n - m1:
            label = "A"
        elif c.beta3 + c.gamma3 == n - m2 - b:
            label = "B"
        elif c.beta1 + c.gamma1 == 0:
            label = f"S{c.beta2 + c.gamma2}"
        if label is not None:
            if leaves is not None:
                leaves.append((c, label))
            return None
        if c.beta1 > 0 and c.beta3 + c.gamma1 + c.gamma3 < n - m2 - b:
            slot = next(s for s in small if _inside(vals[s], nk))
        else:
            if c.gamma1 == 0:
                raise CounterViolation(f"second case reached with no splittable large slot at {c}")
            slot = next(s for s in mid if i - QUARTER < vals[s] <= i + Fraction(3, 4))
        return slot, lo, hi

    return choose


def _large_count(a: DiagMatrix, i: int, params: Params) -> int:
    spec = sorted(a.entries)
    return sum(x > i + Fraction(3, 4) for x in spec[params.n - params.m1:])


def split_A_nd(a: DiagMatrix, k: int, i: int, params: Params,
               leaves: Optional[list] = None) -> SplitCertificate:
    """Split a member of A_k^i onto A_{k+1}^i, B_{k+1}^i and the S_{k+1,i}^a.

    Small eigenvalues go to (k+2)^-1 or i+1 one coordinate at a time, with
    a fixed case selection and lowest-index rule.
    ``k = 0`` is accepted only for the identity, which seeds stage 1.
    ``leaves``, when given, receives (counters, label) per terminal node.
    """
    if k == 0:
        if a != identity(params.n):
            raise NotInSet("k = 0 is reserved for the identity seed")
    elif not member(a, SetId("A", k, i, None, OPEN_ND, params)):
        raise NotInSet(f"{a!r} is not in A[k={k},i={i}]")

    def build(m: DiagMatrix, p: Params) -> SplitCertificate:
        return _build(m, _a_chooser(k, i, p, _large_count(m, i, p), leaves))

    return _maybe_reduced(a, params, "A", build)


def a_leaf_weight_bound(c: SplitCounters, k: int, i: int) -> Fraction:
    """(2/(i(k+1)^2))^beta3 * (2/i)^gamma2, the per-leaf weight cap."""
    return Fraction(2, i * (k + 1) ** 2) ** c.beta3 * Fraction(2, i) ** c.gamma2


def a_leading_weight(a: DiagMatrix, k: int, i: int, params: Params) -> Fraction:
    """Closed-form weight of the leading atom: prod over small slots of (i+1-s)/(i+1-(k+2)^-1)."""
    p = params.reduced() if params.high_regime else params
    spec = sorted(a.entries)
    out = Fraction(1)
    for s in spec[: p.n - p.m1]:
        out *= (i + 1 - s) / (i + 1 - Fraction(1, k + 2))
    return out


# -- B split ------------------------------------------------------------------------

def _b_chooser(k: int, i: int, params: Params) -> Chooser:
    n, m1, m2 = params.n, params.m1, params.m2
    nk, wk, ni1, ni2 = narrow(k), wide(k), near(i + 1), near(i + 2)
    lo = Fraction(1, k + 1)
    smalls = range(0, m2)
    larges = range(m2, n)

    def choose(vals):
        fixed = sum(_inside(vals[s], nk) for s in smalls)
        e1 = [s for s in smalls if _inside(vals[s], wk) and not _inside(vals[s], nk)]
        e2 = sum(_inside(vals[s], ni2) for s in smalls)
        d1 = [s for s in larges if _inside(vals[s], ni1)]
        d2 = sum(_inside(vals[s], ni2) for s in larges)
        d3 = sum(_inside(vals[s], nk) for s in larges)
        low, high = fixed + d3, e2 + d2
        if low + len(e1) > n - m1 or high > n - m2:
            raise CounterViolation(f"B-split counts out of range: low={low}, high={high}, pending={len(e1)}")
        if high == n - m2:
            return None
        if low == n - m1 and not e1:
            return None
        if not e1 and not d1:
            if not m2 < low < n - m1:
                raise CounterViolation(f"B-split leaf with {low} small slots fits no set")
            return None
        if d1 and low + len(e1) < n - m1:
            s = d1[0]
            return s, vals[s] + 1, lo
        if not e1:
            raise CounterViolation("B-split has nothing admissible to split")
        return e1[0], lo, Fraction(i + 2)

    return choose


def split_B_nd(a: DiagMatrix, k: int, i: int, params: Params) -> SplitCertificate:
    """Split a member of B_k^i onto A_k^{i+1}, B_k^{i+1} and the S_{k,i+1}^a.

    Large eigenvalues x (near i+1) go first, lowest slot first, to x+1 or
    (k+1)^-1.  Small ones already in the (k+1)^-1 band are never touched;
    the other small ones go to (k+1)^-1 or i+2.  A large eigenvalue is only
    sent down while the count of small slots plus pending small ones stays
    below n-m1, which keeps every leaf inside one target set.
    """
    if not member(a, SetId("B", k, i, None, OPEN_ND, params)):
        raise NotInSet(f"{a!r} is not in B[k={k},i={i}]")
    return _maybe_reduced(a, params, "B", lambda m, p: _build(m, _b_chooser(k, i, p)))


# -- S split ------------------------------------------------------------------------

def _s_chooser(k: int, i: int, a0: int, params: Params) -> Chooser:
    n, m1, m2 = params.n, params.m1, params.m2
    nk, nk1, ni1 = narrow(k), narrow(k + 1), near(i + 1)
    lo = Fraction(1, k + 2)

    def choose(vals):
        s1 = [s for s in range(a0) if _inside(vals[s], nk)]
        down = sum(_inside(v, nk1) for v in vals)
        l1 = [s for s in range(a0, n) if _inside(vals[s], ni1)]
        side = len(s1) + down
        if not m2 <= side <= n - m1:
            raise CounterViolation(f"S-split small side {side} outside [{m2}, {n - m1}]")
        if not s1 and side == n - m1:
            return None
        if not l1 and side == m2:
            return None
        if not s1 and not l1:
            return None
        if s1 and side > m2:
            return s1[0], lo, Fraction(i + 2)
        if not l1:
            raise CounterViolation("S-split has nothing admissible to split")
        s = l1[0]
        return s, vals[s] + 1, lo

    return choose


def split_S_nd(a: DiagMatrix, k: int, i: int, a0: int, params: Params) -> SplitCertificate:
    """Split a member of S_{k,i}^{a0} onto the (k+1, i+1) sets.

    Small eigenvalues go to (k+2)^-1 or i+2, large ones to x+1 or (k+2)^-1,
    keeping the small side between m2 and n-m1.  The leading atom moves
    every coordinate the cheap way and lands in S_{k+1,i+1}^{a0}.
    """
    if params.high_regime or not params.s_range():
        raise UnsupportedRegime(f"no S sets for n={params.n}, m1={params.m1}, m2={params.m2}")
    if not member(a, SetId("S", k, i, a0, OPEN_ND, params)):
        raise NotInSet(f"{a!r} is not in S[k={k},i={i},a={a0}]")
    return _build(a, _s_chooser(k, i, a0, params))


# -- row pushes ---------------------------------------------------------------------

def _start(cert: SplitCertificate) -> CertificateBuilder:
    b = CertificateBuilder(cert.root)
    for st in cert.steps:
        b.split(st.atom_index, st.position, st.low, st.high, st.lam)
    return b


def _rounds(builder: CertificateBuilder, rounds) -> None:
    for target, splitter in rounds:
        for idx in range(len(builder.atoms) - 1, -1, -1):
            m = builder.atoms[idx].matrix
            if not member(m, target):
                continue
            for st in splitter(m).steps:
                builder.split(idx + st.atom_index, st.position, st.low, st.high, st.lam)


def _b_rounds(builder, k: int, i_from: int, i_to: int, params: Params) -> None:
    """Split B_k^{i'} atoms for i' = i_from .. i_to in turn."""
    _rounds(builder, ((SetId("B", k, r, None, OPEN_ND, params),
                       (lambda m, r=r: split_B_nd(m, k, r, params)))
                      for r in range(i_from, i_to + 1)))


def _a_rounds(builder, i: int, k_from: int, k_to: int, params: Params) -> None:
    """Split A_{k'}^i atoms for k' = k_from .. k_to in turn."""
    _rounds(builder, ((SetId("A", r, i, None, OPEN_ND, params),
                       (lambda m, r=r: split_A_nd(m, r, i, params)))
                      for r in range(k_from, k_to + 1)))


def push_A_row_nd(a: DiagMatrix, i: int, j: int, params: Params) -> SplitCertificate:
    """A_j^i -> stage j+1: one A-split, then B-splits on B_{j+1}^{i+l-1}, l = 1..j-i+1."""
    if i > j:
        raise NotInSet(f"row push needs i <= j, got i={i}, j={j}")
    b = _start(split_A_nd(a, j, i, params))
    _b_rounds(b, j + 1, i, j, params)
    return b.build()


def push_B_row_nd(a: DiagMatrix, i: int, j: int, params: Params) -> SplitCertificate:
    """B_i^j -> stage j+1: one B-split, then A-splits on A_{i+l-1}^{j+1}, l = 1..j-i+1."""
    if i > j:
        raise NotInSet(f"row push needs i <= j, got i={i}, j={j}")
    b = _start(split_B_nd(a, i, j, params))
    _a_rounds(b, j + 1, i, j, params)
    return b.build()


def push_S_nd(a: DiagMatrix, k: int, i: int, a0: int, j: int, params: Params) -> SplitCertificate:
    """S_{k,i}^{a0} at stage j (k = j or i = j) -> stage j+1.

    The S-split lands on the (k+1, i+1) sets; B_{j+1}^{i+1} (when k = j) or
    A_{k+1}^{j+1} (when i = j) is outside the stage union unless k = i, so
    those atoms are walked along their row like the A and B pushes do.
    """
    if k != j and i != j:
        raise NotInSet(f"S[k={k},i={i}] is not a stage-{j} set")
    b = _start(split_S_nd(a, k, i, a0, params))
    if k == j:
        _b_rounds(b, j + 1, i + 1, j, params)
    else:
        _a_rounds(b, j + 1, k + 1, j, params)
    return b.build()


# -- transport ----------------------------------------------------------------------

def transport(a: DiagMatrix, nu: Laminate) -> Fraction:
    """sum lambda |A - M|."""
    from .matrix import dist
    return sum((w * dist(a, m) for w, m in nu), Fraction(0))


def inverse_transport(a: DiagMatrix, nu: Laminate) -> Fraction:
    """(1/det A) sum lambda det(M) |A^-1 - M^-1|."""
    from .matrix import det, dist, inverse
    ai = inverse(a)
    return sum((w * det(m) * dist(ai, inverse(m)) for w, m in nu), Fraction(0)) / det(a)


# -- stages -------------------------------------------------------------------------

@dataclass
class StageMeasureND:
    j: int
    params: Params
    nu: Laminate
    masses: Dict[SetId, Fraction]
    epsilon_prime: float
    c_tilde: float
    bound_ratios: Dict[SetId, float] = field(default_factory=dict)

    @property
    def atom_count(self) -> int:
        return len(self.nu)


def _mass_bound(s: SetId, j: int, p: Params, eps: float, c1, c2) -> float:
    """Right-hand side of the stage mass items for set ``s``."""
    n_, m1_, m2_ = p.np_, p.m1p, p.m2p
    if s.family == "A":
        i = s.i
        return c1[j][i] * i ** (-m1_ - 2 + eps)
    if s.family == "B":
        i = s.k
        return c1[j][i] * i ** (-2 + eps) * (j + 2) ** (m2_ - n_)
    if s.k == j:
        i = s.i
        return c2[j][i] * (i + 2) ** (s.a - n_) * (j + 1 - i) ** -2.0
    i = s.k
    return c2[j][i] * (j + 2) ** (s.a - n_) * (j + 1 - i) ** -2.0


def check_mass_items(j: int, masses: Dict[SetId, Fraction], params: Params, eps: float,
                     trace) -> Dict[SetId, float]:
    """Ratio mass / bound for every set; raise MassBoundViolation above 1."""
    ratios = {}
    for s, w in masses.items():
        bound = _mass_bound(s, j, params, eps, trace.c1_rows, trace.c2_rows)
        r = float(w) / bound if bound > 0 else math.inf
        ratios[s] = r
        if r > 1:
            raise MassBoundViolation(f"stage {j}: mass {float(w):.6g} on {s} exceeds bound {bound:.6g}")
    return ratios


def _classify_all(nu: Laminate, j: int, params: Params) -> Tuple[List[SetId], Dict[SetId, Fraction]]:
    labels, masses = [], {}
    for w, m in nu:
        s = classify(m, j, params, OPEN_ND)
        if s is None:
            raise InvariantViolation(f"support: atom {m!r} of stage {j} lies outside the stage union")
        labels.append(s)
        masses[s] = masses.get(s, Fraction(0)) + w
    return labels, dict(sorted(masses.items(), key=lambda kv: kv[0].sort_key()))


def _make_stage(j, params, nu, eps, c_tilde, trace) -> StageMeasureND:
    if barycenter(nu) != identity(params.n):
        raise InvariantViolation(f"barycenter of stage {j} is {barycenter(nu)!r}, not I")
    _, masses = _classify_all(nu, j, params)
    ratios = check_mass_items(j, masses, params, eps, trace) if trace is not None else {}
    return StageMeasureND(j, params, nu, masses, eps, c_tilde, ratios)


def initial_stage_nd(params: Params, epsilon_prime: float = 0.1, c_tilde: float = 2.0,
                     trace=None) -> StageMeasureND:
    """Stage 1: the identity split as an A-set member with k = 0, i = 1."""
    cert = split_A_nd(identity(params.n), 0, 1, params)
    nu = merge_atoms(cert.atoms())
    return _make_stage(1, params, nu, epsilon_prime, c_tilde, trace)


def _dispatch(args):
    m, s, j, params = args
    if s.family == "A":
        return push_A_row_nd(m, s.i, j, params)
    if s.family == "B":
        return push_B_row_nd(m, s.k, j, params)
    return push_S_nd(m, s.k, s.i, s.a, j, params)


def advance_nd(stage: StageMeasureND, trace=None, threads: Optional[int] = None) -> StageMeasureND:
    j, params = stage.j, stage.params
    labels, _ = _classify_all(stage.nu, j, params)
    jobs = [(m, s, j, params) for (_, m), s in zip(stage.nu, labels)]
    certs = parallel_map(_dispatch, jobs, threads)
    nu = compose(stage.nu, {m: c for (m, _, _, _), c in zip(jobs, certs)})
    return _make_stage(j + 1, params, nu, stage.epsilon_prime, stage.c_tilde, trace)


def build_sequence_nd(params: Params, j_max: int, epsilon_prime: float = 0.1, c_tilde: float = 2.0,
                      check_bounds: bool = True, threads: Optional[int] = None) -> List[StageMeasureND]:
    """Stages 1..j_max; with ``check_bounds`` the stage mass items are checked
    against constants traces run with the same epsilon' and c_tilde."""
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    trace = None
    if check_bounds:
        from .constants import constants_run
        trace = constants_run(epsilon_prime, c_tilde, params.n, max(j_max, 2), keep_rows=j_max)
    stages = [initial_stage_nd(params, epsilon_prime, c_tilde, trace)]
    while stages[-1].j < j_max:
        stages.append(advance_nd(stages[-1], trace, threads))
    return stages


def admissible_params(n: int) -> List[Params]:
    return [Params(n, m1, m2) for m1 in range(1, n - 1) for m2 in range(1, n - 1)]
