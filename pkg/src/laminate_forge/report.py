"""Stage records and their JSON / CSV renderings.

Everything here is a pure function of the stage data, so identical runs
produce byte-identical files.
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Optional

from .analysis import (default_thresholds, degeneracy_profile, fit_exponent, mass_profile,
                       rank_collapse, tail, tail_inverse)
from .errors import InsufficientPoints, InvariantViolation
from .matrix import format_rational
from .sets import EXACT_3D, OPEN_ND, PARAMS_3D, Params


def _q(x: Fraction) -> dict:
    return {"p_over_q": format_rational(x), "float": float(x)}


def _fit(table) -> Optional[dict]:
    try:
        return fit_exponent(table).to_json()
    except InsufficientPoints as exc:
        return {"error": str(exc)}


def stage_record(j: int, nu, params: Params = PARAMS_3D, mode: str = EXACT_3D) -> dict:
    prof = mass_profile(nu, j, params, mode)
    if prof.unclassified:
        raise InvariantViolation(f"support: stage {j} has unclassified mass {prof.unclassified}")
    ts = default_thresholds(j)
    t_fwd, t_inv = tail(nu, ts), tail_inverse(nu, ts)
    thetas = sorted(Fraction(1, t) for t in ts)
    deg = degeneracy_profile(nu, thetas)
    ra, rb = rank_collapse(nu, j, params, mode)
    return {
        "stage": j,
        "atom_count": len(nu),
        "masses": [{"set": str(s), "mass_p_over_q": format_rational(w), "mass_float": float(w)}
                   for s, w in prof.masses.items()],
        "tail": [{"t": t, "mass": m} for t, m in t_fwd.rows()],
        "tail_inverse": [{"t": t, "mass": m} for t, m in t_inv.rows()],
        "fits": {"tail": _fit(t_fwd), "tail_inverse": _fit(t_inv)},
        "degeneracy": {
            "mass_smallest_below": [{"theta": format_rational(t), **_q(w)}
                                    for t, w in deg["mass_smallest_below"].items()],
            "mass_largest_above": [{"theta": format_rational(t), **_q(w)}
                                   for t, w in deg["mass_largest_above"].items()],
            "one_minus_A_mass": _q(ra),
            "one_minus_inverse_B_mass": _q(rb),
        },
    }


def staircase3d_report(stages, seed: int) -> dict:
    recs = []
    for st in stages:
        rec = stage_record(st.j, st.nu, PARAMS_3D, EXACT_3D)
        rec["c_j"] = st.cj
        rec["ratios"] = {str(s): r for s, r in st.ratios.items()}
        recs.append(rec)
    from .staircase3d import fit_c0
    return {"command": "staircase3d", "seed": seed, "epsilon": stages[0].epsilon,
            "jmax": stages[-1].j, "c0_fit": fit_c0(stages), "stages": recs}


def staircase_nd_report(stages, params: Params, seed: int, sweeps: Iterable = ()) -> dict:
    recs = []
    for st in stages:
        rec = stage_record(st.j, st.nu, params, OPEN_ND)
        rec["bound_ratios"] = {str(s): r for s, r in st.bound_ratios.items()}
        recs.append(rec)
    first = stages[0]
    return {"command": "staircase-nd", "seed": seed,
            "params": {"n": params.n, "m1": params.m1, "m2": params.m2},
            "epsilon_prime": first.epsilon_prime, "c_tilde": first.c_tilde,
            "jmax": stages[-1].j, "stages": recs,
            "sweeps": [s.to_json() for s in sweeps]}


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False, allow_nan=True) + "\n"


def _csv(rows: List[list], header: List[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def masses_csv(report: dict) -> str:
    rows = [[r["stage"], m["set"], m["mass_p_over_q"], repr(m["mass_float"])]
            for r in report["stages"] for m in r["masses"]]
    return _csv(rows, ["stage", "set", "mass_p_over_q", "mass_float"])


def tails_csv(report: dict) -> str:
    rows = []
    for r in report["stages"]:
        for fwd, inv in zip(r["tail"], r["tail_inverse"]):
            rows.append([r["stage"], repr(fwd["t"]), repr(fwd["mass"]), repr(inv["mass"])])
    return _csv(rows, ["stage", "t", "tail", "tail_inverse"])


def write_report(report: dict, out: Path) -> List[Path]:
    """Write the JSON report plus its two CSV mirrors next to it."""
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    paths = [out, out.with_suffix(".masses.csv"), out.with_suffix(".tails.csv")]
    for p, text in zip(paths, (dumps(report), masses_csv(report), tails_csv(report))):
        p.write_text(text, encoding="utf-8")
    return paths


def write_figures(report: dict, directory: Path) -> List[Path]:
    """Log-log tail plots per stage.  Needs the optional matplotlib extra."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for key in ("tail", "tail_inverse"):
        fig, ax = plt.subplots(figsize=(5, 4))
        for r in report["stages"]:
            pts = [(x["t"], x["mass"]) for x in r[key] if x["mass"] > 0]
            if len(pts) >= 2:
                ax.loglog(*zip(*pts), marker="o", label=f"j={r['stage']}")
        ax.set_xlabel("t")
        ax.set_ylabel("mass above t")
        ax.set_title(key.replace("_", " "))
        if ax.get_legend_handles_labels()[0]:
            ax.legend()
        path = directory / f"{key}.png"
        fig.savefig(path, dpi=100, metadata={"Software": None})
        plt.close(fig)
        written.append(path)
    return written
