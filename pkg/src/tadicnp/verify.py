"""Verification workflow: compute everything for one instance, then assess
each bound and identity and assemble a machine-readable report.

Computation and assessment are separate stages so that an assessment can be
re-run on modified data (fault injection in the test suite).

Bound semantics. A computed ``ord_T(c_i)`` is an upper bound for the true
order (a coefficient nonzero mod p^M is nonzero), so a finite point below a
convex lower bound is a genuine counterexample. A marker ``>=N`` decides an
abscissa only when the bound there is at most ``N``. The certified range is
the initial run of decided abscissae.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .config import InstanceConfig, validate_config
from .dwork import StabilizedSeries, TruncationError, stabilize_truncation, verify_entry_bounds
from .ledger import PrecisionLedger
from .polygons import (
    AtLeast,
    NewtonPointSet,
    Polygon,
    arithmetic_polygon,
    fraction_str,
    hodge_polygon,
    lower_convex_hull,
)
from .polytope import ConeData
from .sums import (
    CFunctionApprox,
    all_sums,
    c_function,
    check_lc_identities,
    newton_points,
    specialize_cyclotomic,
)
from .tseries import SPolynomial

CONSISTENT = "certified-consistent"
VIOLATION = "violation"
INSUFFICIENT = "insufficient-precision"
SKIPPED = "skipped"

EXIT_OK, EXIT_VIOLATION, EXIT_INSUFFICIENT = 0, 2, 3


@dataclass
class ComputedData:
    """Raw results of the compute stage."""

    cfg: InstanceConfig
    cone: ConeData
    m_max: int
    hodge: Polygon
    arithmetic: Polygon
    ledger: PrecisionLedger | None = None
    direct: CFunctionApprox | None = None
    dwork: StabilizedSeries | None = None
    dwork_error: str | None = None
    entry_report: dict | None = None
    specializations: dict[int, NewtonPointSet] = field(default_factory=dict)


def polygon_range(cfg: InstanceConfig, cone: ConeData) -> int:
    base = cone.normalized_volume + 10
    if cfg.m_max is not None:
        base = cfg.m_max
    return base if cfg.flags.polygon_only else max(base, cfg.K)


def compute(cfg: InstanceConfig) -> ComputedData:
    cone = validate_config(cfg, warn=False)
    m_max = polygon_range(cfg, cone)
    data = ComputedData(
        cfg,
        cone,
        m_max,
        hodge_polygon(cone, m_max),
        arithmetic_polygon(cone, cfg.p, m_max),
    )
    if cfg.flags.polygon_only:
        return data
    f = cfg.laurent()
    data.ledger = cfg.ledger(cone.D)
    if cfg.flags.direct:
        data.direct = c_function(f, data.ledger, all_sums(f, data.ledger))
        for m in cfg.flags.specialize:
            data.specializations[m] = specialize_cyclotomic(data.direct.C, m)
    if cfg.flags.dwork:
        try:
            data.dwork = stabilize_truncation(f, cone, cfg.p, cfg.b, cfg.M_target, cfg.N, cfg.K)
        except TruncationError as exc:
            data.dwork_error = str(exc)
        else:
            data.entry_report = verify_entry_bounds(data.dwork.matrix, cone, f).as_dict()
        if data.direct is None and data.dwork is not None:
            for m in cfg.flags.specialize:
                data.specializations[m] = specialize_cyclotomic(data.dwork.series, m)
    return data


# -- assessment -------------------------------------------------------------


def _verdict(status: str, **fields) -> dict:
    return {"status": status, **fields}


def _ord_str(y) -> str:
    return str(y) if isinstance(y, AtLeast) else fraction_str(y)


def check_points_against(points: NewtonPointSet, bound: Callable[[int], Fraction]) -> dict:
    """Compare every point with a convex lower bound."""
    violations, undecided = [], []
    for i, y in points.points:
        b = Fraction(bound(i))
        if isinstance(y, AtLeast):
            if b > y.bound:
                undecided.append(i)
        elif y < b:
            violations.append({"m": i, "ord": fraction_str(y), "bound": fraction_str(b)})
    abscissae = [i for i, _ in points.points]
    certified = -1
    for i in abscissae:
        if i in undecided:
            break
        certified = i
    try:
        hull = lower_convex_hull(points)
        hull_info = {
            "hull_vertices": [[x, fraction_str(y)] for x, y in hull.vertices],
            "hull_certified_up_to": hull.certified_up_to,
        }
    except ValueError:
        hull_info = {"hull_vertices": [], "hull_certified_up_to": -1}
    if violations:
        status = VIOLATION
    elif certified < 1 and len(abscissae) > 1:
        status = INSUFFICIENT
    else:
        status = CONSISTENT
    return {
        "status": status,
        "certified_range": [0, certified],
        "undecided": undecided,
        "violations": violations,
        "points": [[i, _ord_str(y)] for i, y in points.points],
        "bound": [fraction_str(Fraction(bound(i))) for i, _ in points.points],
        **hull_info,
    }


def _reproducer(cfg: InstanceConfig) -> dict:
    return {
        "instance": cfg.to_dict(),
        "precision": {"M_target": cfg.M_target, "N": cfg.N, "K": cfg.K},
        "command": "tadicnp verify --config <instance.json>",
    }


def _with_reproducer(verdict: dict, cfg: InstanceConfig) -> dict:
    if verdict["status"] == VIOLATION:
        verdict["reproducer"] = _reproducer(cfg)
    return verdict


def polygon_comparison_verdict(data: ComputedData) -> dict:
    """p_Delta >= (p-1) H on [0, m_max] with equality at n!Vol."""
    p, vol = data.cfg.p, data.cone.normalized_volume
    bad = []
    for m in range(data.m_max + 1):
        a, h = data.arithmetic.value(m), (p - 1) * data.hodge.value(m)
        if a < h:
            bad.append({"m": m, "arithmetic": fraction_str(a), "scaled_hodge": fraction_str(h)})
    at_vol = None
    detail = {}
    if vol <= data.m_max:
        a, h = data.arithmetic.value(vol), (p - 1) * data.hodge.value(vol)
        at_vol = a == h
        # p_Delta is integer valued, so equality needs an integral Hodge value
        detail = {
            "arithmetic_at_volume": fraction_str(a),
            "scaled_hodge_at_volume": fraction_str(h),
            "equals_ceiling_at_volume": a == math.ceil(h),
        }
    equal_at = [m for m in range(data.m_max + 1) if data.arithmetic.value(m) == (p - 1) * data.hodge.value(m)]
    status = VIOLATION if bad or at_vol is False else CONSISTENT
    extra = {}
    if not _hypothesis(data):
        extra = {"observed_status": status, "reason": "hypothesis p > 3D not met"}
        status = SKIPPED
    return {
        "status": status,
        **extra,
        "certified_range": [0, data.m_max],
        "normalized_volume": vol,
        "equality_at_volume": at_vol,
        **detail,
        "equality_abscissae": equal_at,
        "violations": bad,
        "hypothesis_p_gt_3D": _hypothesis(data),
    }


def _hypothesis(data: ComputedData) -> bool:
    return data.cfg.p > 3 * data.cone.D


def _primary_points(data: ComputedData) -> tuple[str, NewtonPointSet] | None:
    if data.direct is not None:
        return "direct", newton_points(data.direct.C)
    if data.dwork is not None:
        return "dwork", newton_points(data.dwork.series)
    return None


def _bound_verdict(data, points_src, bound, needs_hypothesis: bool, reason: str = "") -> dict:
    if points_src is None:
        return _verdict(SKIPPED, reason=reason or "no engine was run")
    source, points = points_src
    v = check_points_against(points, bound)
    v["source"] = source
    if needs_hypothesis and not _hypothesis(data):
        v["observed_status"] = v["status"]
        v["status"] = SKIPPED
        v["reason"] = "hypothesis p > 3D not met"
    return _with_reproducer(v, data.cfg)


def assess(data: ComputedData) -> dict:
    """Turn computed data into the report dictionary."""
    cfg = data.cfg
    b, p = cfg.b, cfg.p
    verdicts = {"polygon_comparison": _with_reproducer(polygon_comparison_verdict(data), cfg)}
    if cfg.flags.polygon_only:
        return _report(data, verdicts)
    prim = _primary_points(data)
    verdicts["hodge_bound"] = _bound_verdict(data, prim, lambda i: b * (p - 1) * data.hodge.value(i), False)
    verdicts["arithmetic_bound"] = _bound_verdict(data, prim, lambda i: b * data.arithmetic.value(i), True)

    dw = ("dwork", newton_points(data.dwork.series)) if data.dwork is not None else None
    cbm = _bound_verdict(data, dw, lambda i: b * data.arithmetic.value(i), True, "dwork engine not run")
    if dw is not None:
        unscaled = check_points_against(dw[1], lambda i: data.arithmetic.value(i))
        cbm["unscaled_bound_status"] = unscaled["status"]
    elif data.dwork_error:
        cbm = _verdict(INSUFFICIENT, reason=data.dwork_error)
    verdicts["coefficient_bound"] = cbm

    levels = {}
    for m, pts in sorted(data.specializations.items()):
        v = check_points_against(pts, lambda i: b * data.arithmetic.value(i))
        if not _hypothesis(data):
            v["observed_status"], v["status"] = v["status"], SKIPPED
        levels[f"pi_{m}"] = _with_reproducer(v, cfg)
    if levels:
        verdicts["specialized_bound"] = _combine(levels)
    else:
        verdicts["specialized_bound"] = _verdict(SKIPPED, reason="no specialization requested")

    if data.direct is not None and data.direct.L is not None:
        rep = check_lc_identities(data.direct.C, data.direct.L, cfg.n, cfg.q).as_dict()
        v = _verdict(CONSISTENT if rep["ok"] else VIOLATION, certified_range=[0, cfg.K], **rep)
        verdicts["lc_identities"] = _with_reproducer(v, cfg)
    else:
        verdicts["lc_identities"] = _verdict(SKIPPED, reason="direct engine not run")

    verdicts["cross_engine"] = _with_reproducer(_cross_engine(data), cfg)
    verdicts["sum_constant_terms"] = _with_reproducer(_constant_terms(data), cfg)
    if data.entry_report is not None:
        er = data.entry_report
        v = _verdict(CONSISTENT if er["ok"] else VIOLATION, certified_range=[0, cfg.K], **er)
        verdicts["entry_bounds"] = _with_reproducer(v, cfg)
    else:
        verdicts["entry_bounds"] = _verdict(
            INSUFFICIENT if data.dwork_error else SKIPPED,
            reason=data.dwork_error or "dwork engine not run",
        )
    return _report(data, verdicts)


def _combine(parts: dict) -> dict:
    statuses = [v["status"] for v in parts.values()]
    for s in (VIOLATION, INSUFFICIENT, CONSISTENT, SKIPPED):
        if s in statuses:
            status = s
            break
    return {"status": status, "levels": parts}


def _first_mismatch(a: SPolynomial, b: SPolynomial):
    for i, (x, y) in enumerate(zip(a.coeffs, b.coeffs)):
        if x.coeffs != y.coeffs:
            j = next(j for j, (s, t) in enumerate(zip(x.coeffs, y.coeffs)) if s != t)
            return {"s_index": i, "T_index": j, "direct": x.coeffs[j], "dwork": y.coeffs[j]}
    return None


def _cross_engine(data: ComputedData) -> dict:
    if data.direct is None or (data.dwork is None and data.dwork_error is None):
        return _verdict(SKIPPED, reason="needs both engines")
    if data.dwork is None:
        return _verdict(INSUFFICIENT, reason=data.dwork_error)
    cfg = data.cfg
    mismatch = _first_mismatch(data.direct.C, data.dwork.series)
    return _verdict(
        VIOLATION if mismatch else CONSISTENT,
        certified_range=[0, cfg.K],
        compared_modulo={"p": cfg.M_target, "T": cfg.N, "s": cfg.K + 1},
        first_mismatch=mismatch,
    )


def _constant_terms(data: ComputedData) -> dict:
    if data.direct is None:
        return _verdict(SKIPPED, reason="direct engine not run")
    cfg = data.cfg
    bad = []
    for k, s in enumerate(data.direct.sums, start=1):
        expected = (cfg.q**k - 1) ** cfg.n % s.modulus
        if s.coeffs[0] != expected:
            bad.append({"k": k, "value": s.coeffs[0], "expected": expected})
    return _verdict(VIOLATION if bad else CONSISTENT, certified_range=[1, cfg.K], violations=bad)


def overall_status(verdicts: dict) -> str:
    statuses = {v["status"] for v in verdicts.values()}
    if VIOLATION in statuses:
        return VIOLATION
    if INSUFFICIENT in statuses:
        return INSUFFICIENT
    return CONSISTENT


def exit_code(report: dict) -> int:
    return {VIOLATION: EXIT_VIOLATION, INSUFFICIENT: EXIT_INSUFFICIENT}.get(report["status"], EXIT_OK)


def _report(data: ComputedData, verdicts: dict) -> dict:
    cfg = data.cfg
    out = {
        "instance": cfg.to_dict(),
        "status": overall_status(verdicts),
        "semantics": (
            "certified-consistent: no computed point lies below the bound and every "
            "abscissa in certified_range is decided at the stated precision; "
            "violation: a computed ordinate, an upper bound for the true one, lies below the bound"
        ),
        "polytope": {
            "D": data.cone.D,
            "normalized_volume": data.cone.normalized_volume,
            "hypothesis_p_gt_3D": _hypothesis(data),
        },
        "polygons": {
            "m_max": data.m_max,
            "hodge_values": [fraction_str(v) for v in data.hodge.values()],
            "arithmetic_values": [fraction_str(v) for v in data.arithmetic.values()],
        },
        "verdicts": verdicts,
    }
    if data.ledger is not None:
        out["ledger"] = data.ledger.as_dict()
    if data.dwork is not None:
        out["dwork_truncation"] = data.dwork.as_dict()
    return out


def run_verify(cfg: InstanceConfig) -> dict:
    return assess(compute(cfg))


def certified_values(report: dict) -> dict:
    """Verdict statuses plus every ordinate inside each certified range.

    Used to compare a run against one with bumped precision.
    """
    out = {"polygons": report["polygons"]}
    for name, v in report["verdicts"].items():
        parts = v.get("levels", {name: v})
        for key, part in parts.items():
            entry = {"status": part["status"]}
            lo, hi = part.get("certified_range", [0, -1])
            if "points" in part:
                entry["points"] = [pt for pt in part["points"] if lo <= pt[0] <= hi]
                entry["range"] = [lo, hi]
            out[key] = entry
    return out


def compare_certified(base: dict, bumped: dict) -> list[str]:
    """Differences between two reports' certified outputs, restricted to the
    base run's certified ranges."""
    a, b = certified_values(base), certified_values(bumped)
    diffs = []
    hodge_a, hodge_b = a["polygons"]["hodge_values"], b["polygons"]["hodge_values"]
    arith_a, arith_b = a["polygons"]["arithmetic_values"], b["polygons"]["arithmetic_values"]
    if hodge_a != hodge_b[: len(hodge_a)] or arith_a != arith_b[: len(arith_a)]:
        diffs.append("polygon values changed")
    for key, entry in a.items():
        if key == "polygons":
            continue
        other = b.get(key)
        if other is None:
            diffs.append(f"{key}: missing after bump")
            continue
        if entry["status"] == CONSISTENT and other["status"] != CONSISTENT:
            diffs.append(f"{key}: status {entry['status']} -> {other['status']}")
        if entry["status"] == VIOLATION and other["status"] != VIOLATION:
            diffs.append(f"{key}: status {entry['status']} -> {other['status']}")
        if "points" in entry:
            lo, hi = entry["range"]
            theirs = {pt[0]: pt[1] for pt in other.get("points", [])}
            for i, y in entry["points"]:
                t = theirs.get(i)
                refined = y.startswith(">=") and t is not None and _at_least(t, int(y[2:]))
                if t != y and not refined:
                    diffs.append(f"{key}: ord at {i} changed {y} -> {theirs.get(i)}")
    return diffs


def _at_least(value: str, bound: int) -> bool:
    if value.startswith(">="):
        return int(value[2:]) >= bound
    return Fraction(value) >= bound
