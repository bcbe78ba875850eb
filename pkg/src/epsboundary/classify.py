"""Labels S0..S8 / Unresolved for boundary points at a declared resolution.

Pipeline: approximating set -> disk-union arcs -> candidate points -> exact
contributors -> outward arc -> per-direction alpha verdicts -> label.
Arrangement vertices are snapped to exact multi-contributor points of E_eps;
other samples are pushed along their normal onto the exact eps-level.
"""
from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .analysis import (ZERO_TOL, AlphaProfile, ContributorSet, OutwardArc, alpha_window,
                       contributors, opposing_pairs, outward_arc)
from .arrangement import LoopIndex, boundary_loops, disk_union_boundary, sample_boundary
from .geometry import ArcKind, Point2, as_xy
from .setmodel import SetSpec, _arrays, distance_to_set, finite_approximating_set

LABELS = ("S0", "S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8", "Unresolved")
ANGLE_TOL = 1e-3
RADIUS_FACTOR = 8.0
SNAP_TOL = 1e-9

KIND_TABLE = {
    "S0": {ArcKind.HALF}, "S4": {ArcKind.HALF}, "S5": {ArcKind.HALF},
    "S1": {ArcKind.PROPER},
    "S2": {ArcKind.SINGLETON}, "S6": {ArcKind.SINGLETON},
    "S3": {ArcKind.ANTIPODAL}, "S7": {ArcKind.ANTIPODAL}, "S8": {ArcKind.ANTIPODAL},
}


@dataclass
class SingularityRecord:
    point: Point2
    label: str
    arc_kind: ArcKind
    xi: tuple = ()
    contributors: tuple = ()
    angle: float | None = None
    evidence: dict = field(default_factory=dict)
    inspection_radius: float = 0.0
    level: int | None = None
    loop: int = -1
    loop_s: float = float("nan")


@dataclass
class Inventory:
    records: list
    eps: float
    level: int | None
    spacing: float
    pruned: list = field(default_factory=list)   # (Point2, reason)
    meta: dict = field(default_factory=dict)

    @property
    def counts(self) -> dict:
        c = Counter(r.label for r in self.records)
        return {lab: c.get(lab, 0) for lab in LABELS}

    def labelled(self, *labels) -> list:
        return [r for r in self.records if r.label in labels]


@dataclass
class PointBundle:
    """Everything classify_point looks at for one boundary point."""
    point: Point2
    contributors: ContributorSet
    arc: OutwardArc | None
    alphas: dict = field(default_factory=dict)   # direction -> AlphaProfile
    opposing: tuple | None = None
    wedge_sides: tuple = ((), ())                # distances of obtuse wedges per half-ball
    radius: float = 0.0
    level: int | None = None
    source: str = "sample"


# ---------------------------------------------------------------------------
# per-direction verdicts

def direction_verdict(prof: AlphaProfile, r: float, tol: float = ZERO_TOL) -> tuple[str, dict]:
    """'sharp', 'chain', 'none' or 'unresolved' from alpha on (0, r]."""
    keep = (prof.s > 0) & (prof.s <= r * (1 + 1e-12))
    s, a = prof.s[keep], prof.alpha[keep]
    neg = a < -tol
    starts = [float(s[k]) for k in range(1, len(s)) if not neg[k] and neg[k - 1]]
    info = {"zero_touches": starts, "chain_candidate": len(starts) >= 2}
    if len(s) == 0:
        return "unresolved", info
    if neg.all():
        return "sharp", info
    if not neg.any():
        return "none", info
    first_neg = float(s[int(np.argmax(neg))])
    info["first_negative"] = first_neg
    accumulating = len(starts) >= 2 and starts[0] < r / 4
    if not neg[0]:
        # blocked at the finest scale: only a zero-touch sequence makes it a chain side
        return ("chain" if accumulating else "none"), info
    if accumulating:
        return "chain", info
    if not starts or starts[0] >= r / 4:
        return "sharp", info
    return "unresolved", info


def _combine(verdicts: list[str]) -> str | None:
    if "unresolved" in verdicts:
        return "Unresolved"
    live = [v for v in verdicts if v != "none"]
    if not live:
        return None
    if len(live) == 1:
        return "S2" if live[0] == "sharp" else "S6"
    pair = sorted(live)
    if pair == ["sharp", "sharp"]:
        return "S3"
    if pair == ["chain", "chain"]:
        return "S7"
    return "S8"


def classify_point(b: PointBundle) -> SingularityRecord | None:
    """Label one analysed point; None means the point is not on the boundary in the limit."""
    members = b.contributors.members
    base = dict(point=b.point, contributors=tuple(members), inspection_radius=b.radius,
                level=b.level)
    ev = {"source": b.source, "multiplicity": len(members)}
    if b.arc is None:
        return None
    kind = b.arc.kind
    if kind is ArcKind.HALF:
        sides = [len(w) >= 2 and min(w) < b.radius / 4 for w in b.wedge_sides]
        ev["wedges_per_side"] = [list(map(float, w)) for w in b.wedge_sides]
        label = "S5" if all(sides) else ("S4" if any(sides) else "S0")
        return SingularityRecord(label=label, arc_kind=kind, xi=(b.arc.xi1, b.arc.xi2),
                                 evidence=ev, **base)
    theta = b.arc.width
    if kind is ArcKind.PROPER and ANGLE_TOL < theta < math.pi - ANGLE_TOL:
        return SingularityRecord(label="S1", arc_kind=kind, xi=(b.arc.xi1, b.arc.xi2),
                                 angle=theta, evidence=ev, **base)
    if kind is ArcKind.PROPER or b.opposing is None:
        ev["reason"] = "near-degenerate wedge" if kind is ArcKind.PROPER else "no opposing contributors"
        return SingularityRecord(label="Unresolved", arc_kind=kind, xi=(b.arc.xi1, b.arc.xi2),
                                 angle=theta, evidence=ev, **base)
    dirs = list(b.alphas)
    verdicts, per_dir = [], {}
    for xi in dirs:
        v, info = direction_verdict(b.alphas[xi], b.radius)
        verdicts.append(v)
        per_dir[f"{xi.ux + 0.0:.12g},{xi.uy + 0.0:.12g}"] = dict(verdict=v, **info)
    ev["directions"] = per_dir
    ev["chain_candidate"] = any(d["chain_candidate"] for d in per_dir.values())
    label = _combine(verdicts)
    if label is None:
        return None
    live = tuple(xi for xi, v in zip(dirs, verdicts) if v != "none")
    if label == "Unresolved":
        return SingularityRecord(label=label, arc_kind=kind, xi=tuple(dirs), evidence=ev, **base)
    if len(live) == 1 and kind is ArcKind.ANTIPODAL:
        kind = ArcKind.SINGLETON
        ev["pruned_directions"] = [(float(xi.ux), float(xi.uy)) for xi in dirs if xi not in live]
    return SingularityRecord(label=label, arc_kind=kind, xi=live, evidence=ev, **base)


# ---------------------------------------------------------------------------
# candidate points

def _features(spec: SetSpec):
    P, A, B = _arrays(spec)
    pts = np.vstack([P, A, B]) if len(A) else P
    pts = np.unique(np.round(pts, 15), axis=0) if len(pts) else pts.reshape(-1, 2)
    L = np.hypot(*(B - A).T) if len(A) else np.zeros(0)
    return pts, A[L > 0], B[L > 0]


def exact_singular_candidates(spec: SetSpec, eps: float) -> np.ndarray:
    """Points at distance exactly eps from E and from two of its features."""
    pts, A, B = _features(spec)
    out = []
    # point-point
    if len(pts) > 1:
        tree = cKDTree(pts)
        pairs = np.array(sorted(tree.query_pairs(2 * eps + 1e-9)), dtype=int).reshape(-1, 2)
        if len(pairs):
            p, q = pts[pairs[:, 0]], pts[pairs[:, 1]]
            mid = (p + q) / 2
            v = q - p
            d = np.hypot(v[:, 0], v[:, 1])
            hh = eps * eps - d * d / 4
            hh = np.where(np.abs(hh) < 1e-12 * eps * eps, 0.0, hh)
            ok = hh >= 0
            hgt = np.sqrt(np.maximum(hh, 0))[:, None]
            perp = np.stack([-v[:, 1], v[:, 0]], 1) / d[:, None]
            out += [(mid + hgt * perp)[ok], (mid - hgt * perp)[ok]]
    # point-line and line-line via offset lines
    if len(A):
        u = (B - A) / np.hypot(*(B - A).T)[:, None]
        nrm = np.stack([-u[:, 1], u[:, 0]], 1)
        for sgn in (1.0, -1.0):
            o = A + sgn * eps * nrm          # offset line through o with direction u
            if len(pts):
                w = pts[None, :, :] - o[:, None, :]
                along = np.einsum("kj,kmj->km", u, w)
                off = np.einsum("kj,kmj->km", nrm, w)
                rem = eps * eps - off * off
                ok = rem >= 0
                root = np.sqrt(np.maximum(rem, 0))
                for r_sgn in (1.0, -1.0):
                    t = along + r_sgn * root
                    c = o[:, None, :] + t[..., None] * u[:, None, :]
                    out.append(c[ok])
            for sgn2 in (1.0, -1.0):
                o2 = A + sgn2 * eps * nrm
                cross = u[:, None, 0] * u[None, :, 1] - u[:, None, 1] * u[None, :, 0]
                ok = np.abs(cross) > 1e-12
                w = o2[None, :, :] - o[:, None, :]
                t = (w[..., 0] * u[None, :, 1] - w[..., 1] * u[None, :, 0]) / np.where(ok, cross, 1.0)
                c = o[:, None, :] + t[..., None] * u[:, None, :]
                out.append(c[ok])
    if not out:
        return np.zeros((0, 2))
    C = np.vstack([c.reshape(-1, 2) for c in out])
    C = C[np.all(np.isfinite(C), axis=1)]
    if len(C) == 0:
        return C
    good = np.abs(distance_to_set(spec, C) - eps) <= SNAP_TOL * max(1.0, eps)
    return _dedupe(C[good])


def _dedupe(X, tol=1e-9):
    if len(X) == 0:
        return X.reshape(-1, 2)
    # collapse exact-ish repeats by rounding, then merge neighbours across rounding edges
    _, first = np.unique(np.round(X / tol).astype(np.int64), axis=0, return_index=True)
    X = X[np.sort(first)]
    X = X[np.lexsort((X[:, 1], X[:, 0]))]
    drop = set()
    for i, j in sorted(cKDTree(X).query_pairs(tol)):
        if i not in drop:
            drop.add(j)
    return X[[k for k in range(len(X)) if k not in drop]]


def normal_snap(spec: SetSpec, X, eps: float) -> np.ndarray:
    """Push each point along its nearest-point normal onto the exact eps-level."""
    from .setmodel import distance_and_projection
    out = np.empty_like(np.asarray(X, dtype=float))
    for i, x in enumerate(np.asarray(X, dtype=float)):
        pr = distance_and_projection(spec, x)
        p = as_xy(pr.argmin[0])
        v = x - p
        n = math.hypot(*v)
        out[i] = p + eps * v / n if n > 0 else x
    return out


# ---------------------------------------------------------------------------
# full pipeline

@dataclass
class _Candidate:
    pos: np.ndarray
    source: str
    loop: int
    loop_s: float


def boundary_cells(spec: SetSpec, eps: float, near_points, cell: float) -> np.ndarray:
    """Lattice cells (side `cell`) near the given points on which dist(., E) - eps changes sign."""
    near_points = np.asarray(near_points, dtype=float).reshape(-1, 2)
    if len(near_points) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    base = np.floor(near_points / cell).astype(np.int64)
    offs = np.array([(i, j) for i in (-1, 0, 1) for j in (-1, 0, 1)], dtype=np.int64)
    ij = np.unique((base[:, None, :] + offs[None]).reshape(-1, 2), axis=0)
    probes = np.array([(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (0.5, 0.5)])
    Z = (ij[:, None, :] + probes[None]) * cell
    phi = (distance_to_set(spec, Z.reshape(-1, 2)) - eps).reshape(len(ij), len(probes))
    keep = (phi <= 0).any(axis=1) & (phi > 0).any(axis=1)
    return ij[keep]


def _candidates(spec, eps, bas, samples, loops: LoopIndex, radius, spacing) -> tuple[list, int]:
    out = []
    exact = exact_singular_candidates(spec, eps)
    tree = cKDTree(exact) if len(exact) else None
    hit = set()
    dropped = 0
    for v in bas.vertices:
        near = tree.query_ball_point(v.position, radius) if tree is not None else []
        hit.update(near)
        dropped += not near
    for k in sorted(hit):
        # each exact point takes the loop position of its own nearest vertex
        out.append(_Candidate(exact[k], "vertex", *loops.locate(exact[k], tol=radius)))
    pos = np.array([[sm.position.x, sm.position.y] for sm in samples]).reshape(-1, 2)
    cells = boundary_cells(spec, eps, pos, spacing)
    if len(cells):
        snapped = normal_snap(spec, (cells + 0.5) * spacing, eps)
        good = np.abs(distance_to_set(spec, snapped) - eps) <= SNAP_TOL * max(1.0, eps)
        nearest = cKDTree(pos).query(snapped)[1]
        for k in np.flatnonzero(good):
            smp = samples[nearest[k]]
            out.append(_Candidate(snapped[k], "sample",
                                  *loops.position(smp.arc_id, smp.arclength_coord)))
    # first occurrence wins, vertices come first
    P = np.array([c.pos for c in out]).reshape(-1, 2)
    keep = np.ones(len(out), dtype=bool)
    if len(P):
        for i, j in sorted(cKDTree(P).query_pairs(1e-9 * max(1.0, eps))):
            if keep[i]:
                keep[j] = False
    return [c for c, k in zip(out, keep) if k], dropped


def analyze_point(spec: SetSpec, x, eps: float, radius: float, level=None,
                  source: str = "sample") -> PointBundle:
    pi = contributors(spec, x, eps, tol=1e-8)
    pt = pi.point
    try:
        oa = outward_arc(pt, pi)
    except ValueError:
        return PointBundle(pt, pi, None, radius=radius, level=level, source=source)
    b = PointBundle(pt, pi, oa, radius=radius, level=level, source=source)
    if oa.kind in (ArcKind.SINGLETON, ArcKind.ANTIPODAL) or (
            oa.kind is ArcKind.PROPER and oa.width <= ANGLE_TOL):
        opp = opposing_pairs(pt, pi.members, eps)
        if opp:
            b.opposing = opp[0]
            y1, y2 = opp[0]
            dirs = [oa.xi1] if oa.kind is ArcKind.SINGLETON else list(oa.arc.endpoints)
            if oa.kind is ArcKind.PROPER:
                dirs = [oa.xi1]
            for xi in dirs:
                b.alphas[xi] = alpha_window(spec, pt, xi, y1, y2, eps, radius)
    return b


def classify_boundary(spec: SetSpec, eps: float, n: int, spacing: float,
                      workers: int = 1) -> Inventory:
    """Classify the sampled boundary of E_eps at level n and sampling spacing.

    workers > 1 analyses candidate points on a thread pool; results keep input order.
    """
    if not eps > 0 or not spacing > 0:
        raise ValueError("eps and spacing must be positive")
    D = finite_approximating_set(spec, n, eps)
    bas = disk_union_boundary(D.points, eps, level=n)
    samples = sample_boundary(bas, spacing)
    loops = boundary_loops(bas)
    radius = min(RADIUS_FACTOR * spacing, eps / 2)
    snap_r = math.sqrt(2) * D.cell_size + 1e-9
    cands, dropped = _candidates(spec, eps, bas, samples, loops, snap_r, spacing)
    def run(c):
        return analyze_point(spec, c.pos, eps, radius, n, c.source)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            bundles = list(pool.map(run, cands))
    else:
        bundles = [run(c) for c in cands]

    inv = Inventory([], eps, n, spacing, meta={"label": spec.label, "inspection_radius": radius,
                                               "snap_radius": snap_r,
                                               "num_centers": int(len(D.points)),
                                               "num_arcs": len(bas.arcs),
                                               "num_vertices": len(bas.vertices),
                                               # arrangement vertices with no exact singular
                                               # point of E_eps nearby (interior in the limit)
                                               "vertices_dropped": int(dropped)})
    results: list = [None] * len(bundles)
    # multi-contributor points first: their wedges feed the shallow-type evidence
    for k, b in enumerate(bundles):
        if b.arc is not None and b.arc.kind is not ArcKind.HALF and cands[k].source == "vertex":
            results[k] = classify_point(b)
    wedges = np.array([as_xy(r.point) for r in results
                       if r is not None and r.label == "S1" and r.angle > math.pi / 2]).reshape(-1, 2)
    wtree = cKDTree(wedges) if len(wedges) else None
    for k, b in enumerate(bundles):
        if b.arc is None or b.arc.kind is not ArcKind.HALF:
            continue
        if cands[k].source != "sample":
            continue      # exact two-feature points with a single contributor carry no label
        x = as_xy(b.point)
        if wtree is not None:
            near = wedges[sorted(wtree.query_ball_point(x, radius))]
            sides = []
            for xi in (b.arc.xi1, b.arc.xi2):
                rel = near - x
                on = rel @ as_xy(xi) > 0
                sides.append(tuple(sorted(np.hypot(*rel[on].T).tolist())) if on.any() else ())
            b.wedge_sides = tuple(sides)
        results[k] = classify_point(b)
    for k, (b, r) in enumerate(zip(bundles, results)):
        if r is None:
            if b.arc is None:
                inv.pruned.append((b.point, "interior"))
            elif cands[k].source == "vertex" and b.arc.kind is not ArcKind.HALF:
                inv.pruned.append((b.point, "no outward direction"))
            elif cands[k].source == "sample" and b.arc.kind is not ArcKind.HALF:
                inv.pruned.append((b.point, "sample off the vertex set"))
            continue
        r.loop, r.loop_s = cands[k].loop, cands[k].loop_s
        inv.records.append(r)
    inv.records.sort(key=lambda r: (round(r.point.x, 12), round(r.point.y, 12)))
    inv.pruned.sort(key=lambda p: (round(p[0].x, 12), round(p[0].y, 12)))
    return inv


# ---------------------------------------------------------------------------
# partition check

@dataclass
class PartitionReport:
    ok: bool
    violations: list


def verify_partition(inv: Inventory) -> PartitionReport:
    bad = []
    seen = {}
    for i, r in enumerate(inv.records):
        key = (round(r.point.x, 9), round(r.point.y, 9))
        if key in seen and inv.records[seen[key]].label != r.label:
            bad.append((i, "point carries two labels"))
        seen[key] = i
        if r.label not in LABELS:
            bad.append((i, f"unknown label {r.label!r}"))
            continue
        if r.label == "Unresolved":
            continue
        if ArcKind(r.arc_kind) not in KIND_TABLE[r.label]:
            bad.append((i, f"kind mismatch: {r.label} with {ArcKind(r.arc_kind).value}"))
        if r.label in ("S0", "S4", "S5") and len(r.contributors) != 1:
            bad.append((i, "multiplicity mismatch"))
        if r.label == "S1" and not (r.angle is not None and ANGLE_TOL < r.angle < math.pi - ANGLE_TOL):
            bad.append((i, "wedge angle out of range"))
    return PartitionReport(not bad, bad)


def stability_levels(spec: SetSpec, eps: float, levels, spacing: float,
                     labels=("S1", "S2", "S3", "S8", "S4", "S6")) -> dict:
    """Counts per level and the smallest n after which counts no longer change."""
    counts = {}
    for n in levels:
        c = classify_boundary(spec, eps, n, spacing).counts
        counts[n] = tuple(c[k] for k in labels)
    ns = sorted(counts)
    n_stable = ns[-1]
    for n in reversed(ns):
        if counts[n] == counts[ns[-1]]:
            n_stable = n
        else:
            break
    return {"counts": counts, "labels": labels, "n_stable": n_stable}
