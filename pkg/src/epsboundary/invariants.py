"""Numerical invariant checks run by `epsb verify` and the test-suite.

Each check returns a CheckResult; failures carry enough context to locate the point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .analysis import (ContributorSet, angular_error, arc_sequences, extremal_pairs, local_rep,
                       outward_arc, representation_radius, tangent_estimate)
from .arrangement import disk_union_boundary, sample_boundary
from .classify import Inventory, classify_boundary, verify_partition
from .geometry import ArcKind, Point2, UnitDir, as_xy
from .setmodel import SetSpec, distance_to_set, finite_approximating_set
from .topology import complement_components, padded_bbox

LIPSCHITZ_SLACK = 1e-3
ORIENT_TOL = 1e-7


@dataclass
class CheckResult:
    name: str
    ok: bool
    checked: int = 0
    worst: float = 0.0
    bound: float = 0.0
    failures: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"name": self.name, "ok": self.ok, "checked": self.checked, "worst": self.worst,
                "bound": self.bound, "failures": self.failures[:20]}


# ---------------------------------------------------------------------------
# Lipschitz bounds of the local representation

def rep_slopes(rep, s_max: float = math.inf) -> tuple[float, float]:
    """Largest |df/ds| and |dg|/|ds| over all pairs of defined samples with s <= s_max."""
    ok = rep.defined & (rep.s <= s_max)
    s, f = rep.s[ok], rep.f[ok]
    if len(s) < 2:
        return 0.0, 0.0
    ds = np.abs(s[:, None] - s[None, :])
    np.fill_diagonal(ds, np.inf)
    slope_f = float((np.abs(f[:, None] - f[None, :]) / ds).max())
    g = rep.curve()[ok[rep.defined]]
    dg = np.hypot(g[:, None, 0] - g[None, :, 0], g[:, None, 1] - g[None, :, 1])
    slope_g = float((dg / ds).max())
    return slope_f, slope_g


def lipschitz_check(spec: SetSpec, records, eps: float, n=None, num_samples: int = 257,
                    limit: int | None = None) -> CheckResult:
    bf = 1 / (math.sqrt(3) * eps) + LIPSCHITZ_SLACK
    bg = 2 / math.sqrt(3) + LIPSCHITZ_SLACK
    res = CheckResult("lipschitz", True, bound=bf)
    for r in list(records)[:limit]:
        x = r.point
        try:
            pi = ContributorSet(x, r.contributors)
            pairs = extremal_pairs(x, pi, outward_arc(x, pi))
        except ValueError:
            continue
        for p in pairs:
            rep = local_rep(spec, x, p, eps, n=n, num_samples=num_samples)
            sf, sg = rep_slopes(rep, representation_radius(rep, spec))
            res.checked += 1
            res.worst = max(res.worst, sf)
            if sf > bf or sg > bg:
                res.ok = False
                res.failures.append({"point": [x.x, x.y], "xi": [p.xi.ux, p.xi.uy],
                                     "slope_f": sf, "slope_g": sg})
    return res


# ---------------------------------------------------------------------------
# orientation of outward directions

def orientation_check(records) -> CheckResult:
    res = CheckResult("orientation", True, bound=ORIENT_TOL)
    for r in records:
        if not r.xi:
            continue
        x = as_xy(r.point)
        dirs = [as_xy(u) for u in r.xi]
        if r.arc_kind in (ArcKind.PROPER, ArcKind.HALF) and len(dirs) == 2:
            m = dirs[0] + dirs[1]
            if np.hypot(*m) > 1e-9:
                dirs.append(m / np.hypot(*m))
        for y in r.contributors:
            v = (as_xy(y) - x)
            v = v / np.hypot(*v)
            for u in dirs:
                val = float(v @ u)
                res.checked += 1
                res.worst = max(res.worst, val)
                if val > ORIENT_TOL:
                    res.ok = False
                    res.failures.append({"point": r.point, "value": val})
    return res


# ---------------------------------------------------------------------------
# tangent secants versus extremal directions

def tangent_check(centers, eps: float, spacing: float, window: int = 1) -> CheckResult:
    """Secants of arrangement samples against the extremal directions of B_eps(centers)."""
    bound = 5 * spacing / eps
    res = CheckResult("tangent_agreement", True, bound=bound)
    bas = disk_union_boundary(centers, eps)
    samples = sample_boundary(bas, spacing)
    if not samples:
        return res
    C = np.asarray(bas.centers, dtype=float)
    tree = cKDTree(C)
    seqs = arc_sequences(samples)
    for i, smp in enumerate(samples):
        x = smp.position
        d, idx = tree.query(as_xy(x), k=min(8, len(C)))
        idx = np.atleast_1d(idx)[np.abs(np.atleast_1d(d) - eps) <= 1e-9 * max(1.0, eps)]
        members = tuple(Point2(*C[j]) for j in sorted(idx.tolist()))
        if not members:
            members = (smp.generating_center,)
        try:
            oa = outward_arc(x, ContributorSet(x, members))
            back, fwd = tangent_estimate(samples, i, window, seqs)
        except ValueError:
            continue
        targets = [oa.xi1, oa.xi2]
        err = max(min(angular_error(s, t) for t in targets) for s in (back, fwd))
        res.checked += 1
        res.worst = max(res.worst, err)
        if err > bound:
            res.ok = False
            res.failures.append({"point": x, "error": err})
    return res


# ---------------------------------------------------------------------------
# outward cone probes

def cone_probe_radius(spec: SetSpec, x, u, eps: float, r_max: float, steps: int = 40) -> float:
    """Largest r <= r_max (bisection) such that x + s u lies outside E_eps for s in (0, r]."""
    x, u = as_xy(x), as_xy(u)

    def clear(r):
        s = np.linspace(r / 16, r, 16)
        return bool((distance_to_set(spec, x + s[:, None] * u) > eps).all())

    if clear(r_max):
        return r_max
    lo, hi = 0.0, r_max
    for _ in range(steps):
        mid = (lo + hi) / 2
        if clear(mid):
            lo = mid
        else:
            hi = mid
    return lo


def cone_check(spec: SetSpec, records, eps: float) -> CheckResult:
    res = CheckResult("outward_cone", True)
    for r in records:
        if r.label not in ("S0", "S1") or len(r.xi) != 2:
            continue
        if r.arc_kind is not ArcKind.HALF and np.hypot(*(as_xy(r.xi[0]) + as_xy(r.xi[1]))) < 1e-9:
            continue
        u = UnitDir.from_vector(outward_mid(r))
        rp = cone_probe_radius(spec, r.point, u, eps, r.inspection_radius)
        res.checked += 1
        if not rp > 0:
            res.ok = False
            res.failures.append({"point": r.point, "r_probe": rp})
    return res


def _free_arcs(spec: SetSpec, x, eps: float, rho: float, m: int):
    t = np.linspace(0, 2 * math.pi, m, endpoint=False)
    P = as_xy(x) + rho * np.stack([np.cos(t), np.sin(t)], 1)
    free = distance_to_set(spec, P) > eps
    return t, np.nonzero(free != np.roll(free, 1))[0]


def _wrap(a: float) -> float:
    return abs((a + math.pi) % (2 * math.pi) - math.pi)


def outward_mid(r) -> np.ndarray:
    """Unit vector through the middle of a record's outward arc (normal for half circles)."""
    if r.arc_kind is ArcKind.HALF:
        m = as_xy(r.point) - as_xy(r.contributors[0])
    else:
        m = as_xy(r.xi[0]) + as_xy(r.xi[1])
    return m / np.hypot(*m)


def local_radius(spec: SetSpec, r, eps: float, sing_tree=None) -> float:
    """Finite-resolution bound on the radius of the local boundary representation.

    Smallest of the inspection radius, the distance to the nearest other singular
    record, and the free run along the outward bisector before E_eps is re-entered.
    """
    x = as_xy(r.point)
    cap = r.inspection_radius
    if sing_tree is not None:
        d = np.atleast_1d(sing_tree.query(x, k=2)[0])
        d = d[d > 1e-12 * max(1.0, eps)]
        if len(d):
            cap = min(cap, float(d[0]))
    run = cone_probe_radius(spec, x, UnitDir.from_vector(outward_mid(r)), eps, cap)
    return min(cap, run)


def complement_arc_check(spec: SetSpec, records, eps: float, h: float, m: int = 1440,
                         stride: int = 1) -> CheckResult:
    """Circles of radius rho in {r/4, r/2} around S0/S1 points meet the complement in one
    arc whose endpoints lie within 5 h / rho of the extremal directions.

    r is the local radius (see local_radius); stride thins out the S0 records.
    """
    res = CheckResult("complement_arc", True, bound=5.0)
    recs = list(records)
    sing = np.array([as_xy(r.point) for r in recs if r.label != "S0"]).reshape(-1, 2)
    stree = cKDTree(sing) if len(sing) else None
    s0 = 0
    for r in recs:
        if r.label not in ("S0", "S1") or len(r.xi) != 2:
            continue
        if r.label == "S0":
            s0 += 1
            if (s0 - 1) % stride:
                continue
        x = as_xy(r.point)
        cap = local_radius(spec, r, eps, stree)
        targets = [math.atan2(u.uy, u.ux) for u in r.xi]
        for rho in (cap / 4, cap / 2):
            if not rho > 0:
                continue
            t, flips = _free_arcs(spec, x, eps, rho, m)
            res.checked += 1
            if len(flips) != 2:
                res.ok = False
                res.failures.append({"point": [x[0], x[1]], "rho": rho, "arcs": len(flips) // 2})
                continue
            # endpoints are resolved to the probe's angular step
            err = max(max(min(_wrap(t[k] - g) for g in targets) for k in flips) - 2 * math.pi / m, 0.0)
            res.worst = max(res.worst, err * rho / h)
            if err > 5 * h / rho:
                res.ok = False
                res.failures.append({"point": [x[0], x[1]], "rho": rho, "error": err})
    return res


# ---------------------------------------------------------------------------
# partition and raster

def partition_check(inv: Inventory) -> CheckResult:
    rep = verify_partition(inv)
    return CheckResult("partition", rep.ok, checked=len(inv.records),
                       failures=[{"index": i, "reason": why} for i, why in rep.violations])


def raster_check(source, eps: float, h: float, bbox=None) -> CheckResult:
    bbox = padded_bbox(source, eps) if bbox is None else bbox
    a = len(complement_components(source, eps, bbox, h))
    b = len(complement_components(source, eps, bbox, h / 2))
    res = CheckResult("raster_stability", a == b, checked=2, worst=float(abs(a - b)))
    if a != b:
        res.failures.append({"h": h, "count_h": a, "count_h2": b})
    return res


def run_suite(spec: SetSpec, eps: float, level: int, spacing: float, h: float | None = None,
              inv: Inventory | None = None, lipschitz_limit: int = 200) -> dict:
    """Full invariant suite on one spec; returns {name: CheckResult}."""
    if inv is None:
        inv = classify_boundary(spec, eps, level, spacing)
    h = eps / 64 if h is None else h
    centers = finite_approximating_set(spec, level, eps).points
    # singular records first so the Lipschitz budget covers them
    recs = sorted(inv.records, key=lambda r: r.label == "S0")
    checks = [partition_check(inv), orientation_check(inv.records),
              lipschitz_check(spec, recs, eps, limit=lipschitz_limit),
              tangent_check(centers, eps, spacing), cone_check(spec, inv.records, eps),
              complement_arc_check(spec, inv.records, eps, h, stride=8),
              raster_check(spec, eps, h)]
    return {c.name: c for c in checks}
