"""Boundary of a finite union of eps-disks as circular arcs.

Per circle, the angular intervals swallowed by the *open* disks of the other
centers are removed; what survives is boundary. A uniform hash with cell size
2*eps restricts each circle to the centers that can reach it.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import TWO_PI, CircularArc, Point2, hausdorff_distance
from .setmodel import SetSpec, finite_approximating_set

MERGE_TOL = 1e-9
TANGENT_TOL = 1e-9


@dataclass
class Vertex:
    position: np.ndarray
    center_ids: tuple
    # two disks touching at a point: zero angular gap between the arcs
    tangent: bool = False


@dataclass
class BoundaryArcSet:
    eps: float
    level: int | None
    centers: np.ndarray
    arcs: list = field(default_factory=list)
    arc_center_ids: list = field(default_factory=list)
    vertices: list = field(default_factory=list)
    tangencies: list = field(default_factory=list)

    def __len__(self):
        return len(self.arcs)

    def intervals(self) -> list[tuple[int, float, float]]:
        return [(cid, a.theta_start, a.theta_end) for cid, a in zip(self.arc_center_ids, self.arcs)]


@dataclass(frozen=True)
class BoundarySample:
    position: Point2
    generating_center: Point2
    arc_id: int
    arclength_coord: float


def _dedupe_centers(centers: np.ndarray) -> np.ndarray:
    if len(centers) == 0:
        return centers
    _, idx = np.unique(np.round(centers, 12), axis=0, return_index=True)
    return centers[np.sort(idx)]


class _Hash:
    def __init__(self, centers, cell):
        self.cell = cell
        self.buckets = defaultdict(list)
        keys = np.floor(centers / cell).astype(np.int64)
        for i, (kx, ky) in enumerate(keys):
            self.buckets[(int(kx), int(ky))].append(i)
        self.keys = keys

    def near(self, i):
        kx, ky = self.keys[i]
        out = []
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                out.extend(self.buckets.get((int(kx) + dx, int(ky) + dy), ()))
        return out


def _circle_pieces(c, others, eps):
    """Uncovered angular pieces of the circle around c, plus tangency angles.

    Returns (pieces, breaks). pieces is None when the circle is swallowed, []
    when nothing covers it, else a list of (start, end) with end > start.
    """
    if len(others) == 0:
        return [], np.zeros(0)
    dv = others - c
    d = np.hypot(dv[:, 0], dv[:, 1])
    phi = np.arctan2(dv[:, 1], dv[:, 0])
    tangent = np.abs(d - 2 * eps) < TANGENT_TOL
    cover = (d < 2 * eps) & ~tangent & (d > 0)
    breaks = np.mod(phi[tangent], TWO_PI)
    if not cover.any():
        return [], breaks
    half = np.arccos(np.clip(d[cover] / (2 * eps), -1.0, 1.0))
    lo = np.mod(phi[cover] - half, TWO_PI)
    hi = lo + 2 * half
    order = np.lexsort((hi, lo))
    lo, hi = lo[order], hi[order]
    merged = [[lo[0], hi[0]]]
    for a, b in zip(lo[1:], hi[1:]):
        if a <= merged[-1][1] + MERGE_TOL:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    # the last interval may wrap past 2pi onto the first ones
    while len(merged) > 1 and merged[-1][1] - TWO_PI >= merged[0][0] - MERGE_TOL:
        first = merged.pop(0)
        merged[-1][1] = max(merged[-1][1], first[1] + TWO_PI)
    if len(merged) == 1 and merged[0][1] - merged[0][0] >= TWO_PI - MERGE_TOL:
        return None, breaks
    gaps = []
    for k, (a0, b0) in enumerate(merged):
        nxt = merged[k + 1][0] if k + 1 < len(merged) else merged[0][0] + TWO_PI
        if nxt - b0 > MERGE_TOL:
            gaps.append((b0, nxt))
    if not gaps:
        return None, breaks
    return gaps, breaks


def _split_at_breaks(pieces, breaks):
    """Cut uncovered pieces at tangency angles; a full circle starts at its first break."""
    if pieces == []:
        if len(breaks) == 0:
            return [(0.0, TWO_PI)]
        b = np.sort(np.mod(breaks, TWO_PI))
        b = _unique_angles(b)
        return [(b[i], b[i + 1] if i + 1 < len(b) else b[0] + TWO_PI) for i in range(len(b))]
    out = []
    for a, e in pieces:
        cuts = []
        for t in breaks:
            t = a + ((t - a) % TWO_PI)
            if a + MERGE_TOL < t < e - MERGE_TOL:
                cuts.append(t)
        cuts = _unique_angles(sorted(cuts))
        edges = [a] + list(cuts) + [e]
        out.extend(zip(edges[:-1], edges[1:]))
    return out


def _unique_angles(vals):
    out = []
    for v in vals:
        if not out or v - out[-1] > MERGE_TOL:
            out.append(float(v))
    if len(out) > 1 and out[0] + TWO_PI - out[-1] <= MERGE_TOL:
        out.pop()
    return out


def disk_union_boundary(centers, eps: float, level: int | None = None,
                        use_hash: bool = True) -> BoundaryArcSet:
    """Arcs of the boundary of the union of closed eps-disks around `centers`."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    centers = _dedupe_centers(np.asarray(centers, dtype=float).reshape(-1, 2))
    if len(centers) == 0:
        raise ValueError("no centers")
    bas = BoundaryArcSet(eps=eps, level=level, centers=centers)
    grid = _Hash(centers, 2 * eps) if use_hash else None
    everyone = np.arange(len(centers))
    for i, c in enumerate(centers):
        idx = np.array(sorted(grid.near(i)), dtype=int) if use_hash else everyone
        idx = idx[idx != i]
        if len(idx):
            dv = centers[idx] - c
            d = np.hypot(dv[:, 0], dv[:, 1])
            idx = idx[d <= 2 * eps + TANGENT_TOL]
        pieces, breaks = _circle_pieces(c, centers[idx], eps)
        if pieces is None:
            continue
        for t in breaks:
            if pieces == [] or any(a - MERGE_TOL <= a + ((t - a) % TWO_PI) <= e + MERGE_TOL
                                   for a, e in pieces):
                bas.tangencies.append((i, c + eps * np.array([math.cos(t), math.sin(t)])))
        for a, e in _split_at_breaks(pieces, breaks):
            start = a % TWO_PI
            if e - a <= MERGE_TOL:
                continue
            bas.arcs.append(CircularArc(Point2(float(c[0]), float(c[1])), eps, float(start),
                                        float(start + (e - a))))
            bas.arc_center_ids.append(i)
    bas.vertices = _vertices(bas)
    return bas


def _vertices(bas: BoundaryArcSet) -> list[Vertex]:
    ends = []
    owners = []
    for cid, arc in zip(bas.arc_center_ids, bas.arcs):
        if arc.is_full:
            continue
        ends += [arc.start_point, arc.end_point]
        owners += [cid, cid]
    for cid, pos in bas.tangencies:
        ends.append(pos)
        owners.append(cid)
    if not ends:
        return []
    P = np.array(ends)
    tree = cKDTree(P)
    tol = 1e-8 * max(1.0, bas.eps)
    parent = list(range(len(P)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for a, b in sorted(tree.query_pairs(tol)):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups = defaultdict(list)
    for k in range(len(P)):
        groups[find(k)].append(k)
    out = []
    for root in sorted(groups):
        members = groups[root]
        cids = tuple(sorted({owners[k] for k in members}))
        if len(cids) < 2:
            continue
        pos = P[members].mean(axis=0)
        tangent = len(cids) == 2 and abs(np.hypot(*(bas.centers[cids[0]] - bas.centers[cids[1]])) - 2 * bas.eps) < TANGENT_TOL
        out.append(Vertex(pos, cids, bool(tangent)))
    out.sort(key=lambda v: (round(float(v.position[0]), 12), round(float(v.position[1]), 12)))
    return out


@dataclass
class LoopIndex:
    """Arcs chained end-to-start into closed boundary curves."""
    loops: list            # arc ids in traversal order
    arc_loop: np.ndarray   # loop id per arc
    arc_offset: np.ndarray # arclength of the arc start along its loop
    lengths: np.ndarray    # total length per loop
    starts: np.ndarray     # arc start points, for locating vertices

    def position(self, arc_id: int, s: float) -> tuple[int, float]:
        return int(self.arc_loop[arc_id]), float(self.arc_offset[arc_id] + s)

    def locate(self, point, tol: float = 1e-8) -> tuple[int, float]:
        """Loop position of a point sitting at an arc start (a vertex)."""
        d = np.hypot(*(self.starts - np.asarray(point, dtype=float)).T)
        k = int(np.argmin(d))
        if d[k] > tol:
            return -1, float("nan")
        return self.position(k, 0.0)


def boundary_loops(bas: BoundaryArcSet) -> LoopIndex:
    m = len(bas.arcs)
    starts = np.array([a.start_point for a in bas.arcs]).reshape(-1, 2)
    ends = np.array([a.end_point for a in bas.arcs]).reshape(-1, 2)
    tol = 1e-8 * max(1.0, bas.eps)
    tree = cKDTree(starts) if m else None
    used = np.zeros(m, dtype=bool)
    arc_loop = np.full(m, -1)
    arc_offset = np.zeros(m)
    loops, lengths = [], []
    for first in range(m):
        if used[first]:
            continue
        loop, total, cur = [], 0.0, first
        while cur is not None and not used[cur]:
            used[cur] = True
            arc_loop[cur] = len(loops)
            arc_offset[cur] = total
            total += bas.arcs[cur].length
            loop.append(cur)
            nxt = [j for j in sorted(tree.query_ball_point(ends[cur], tol)) if not used[j]]
            # at a tangency prefer crossing to the other disk
            other = [j for j in nxt if bas.arc_center_ids[j] != bas.arc_center_ids[cur]]
            cur = (other or nxt or [None])[0]
        loops.append(loop)
        lengths.append(total)
    return LoopIndex(loops, arc_loop, arc_offset, np.array(lengths), starts)


def sample_boundary(bas: BoundaryArcSet, spacing: float) -> list[BoundarySample]:
    """Arclength-uniform samples on every arc, endpoints included."""
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    out = []
    for k, arc in enumerate(bas.arcs):
        n = math.ceil(arc.length / spacing - 1e-12) + 1
        n = max(n, 2)
        c = arc.center
        for j in range(n):
            s = arc.length * j / (n - 1)
            th = arc.theta_start + s / arc.radius
            pos = Point2(c.x + arc.radius * math.cos(th), c.y + arc.radius * math.sin(th))
            out.append(BoundarySample(pos, c, k, s))
    return out


def samples_array(samples) -> np.ndarray:
    return np.array([[s.position.x, s.position.y] for s in samples], dtype=float).reshape(-1, 2)


def distance_to_arcs(points, bas: BoundaryArcSet) -> np.ndarray:
    """Exact distance from each point to the union of the arcs of `bas`."""
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    C = np.array([[a.center.x, a.center.y] for a in bas.arcs])
    t0 = np.array([a.theta_start for a in bas.arcs])
    ext = np.array([a.extent for a in bas.arcs])
    r = bas.eps
    tree = cKDTree(C)
    # coarse bound from arc endpoints and midpoints
    probe = np.vstack([C + r * np.stack([np.cos(t0 + f * ext), np.sin(t0 + f * ext)], 1)
                       for f in (0.0, 0.5, 1.0)])
    bound = cKDTree(probe).query(P)[0]
    out = np.empty(len(P))
    for i, p in enumerate(P):
        idx = np.array(tree.query_ball_point(p, bound[i] + r + 1e-12), dtype=int)
        if len(idx) == 0:
            out[i] = bound[i]
            continue
        v = p - C[idx]
        rho = np.hypot(v[:, 0], v[:, 1])
        ang = np.mod(np.arctan2(v[:, 1], v[:, 0]) - t0[idx], TWO_PI)
        inside = (ang <= ext[idx]) & (rho > 0)
        d_in = np.where(inside, np.abs(rho - r), np.inf)
        e0 = C[idx] + r * np.stack([np.cos(t0[idx]), np.sin(t0[idx])], 1)
        e1 = C[idx] + r * np.stack([np.cos(t0[idx] + ext[idx]), np.sin(t0[idx] + ext[idx])], 1)
        d_end = np.minimum(np.hypot(*(p - e0).T), np.hypot(*(p - e1).T))
        out[i] = min(float(np.min(np.minimum(d_in, d_end))), bound[i])
    return out


def curve_hausdorff(samples_a, bas_a, samples_b, bas_b) -> float:
    """Hausdorff distance between two arc sets, sup taken over the samples."""
    da = distance_to_arcs(samples_a, bas_b).max()
    db = distance_to_arcs(samples_b, bas_a).max()
    return float(max(da, db))


def level_boundary(spec: SetSpec, eps: float, n: int) -> BoundaryArcSet:
    D = finite_approximating_set(spec, n, eps)
    return disk_union_boundary(D.points, eps, level=n)


def boundary_convergence(spec: SetSpec, eps: float, n_lo: int, n_hi: int,
                         spacing: float = 1e-3) -> list[tuple[int, float]]:
    """Hausdorff distance of the level-n boundary to the level-n_hi boundary, n in [n_lo, n_hi)."""
    if not n_lo < n_hi:
        raise ValueError("need n_lo < n_hi")
    hi = level_boundary(spec, eps, n_hi)
    hi_s = samples_array(sample_boundary(hi, spacing))
    out = []
    for n in range(n_lo, n_hi):
        lo = level_boundary(spec, eps, n)
        lo_s = samples_array(sample_boundary(lo, spacing))
        out.append((n, curve_hausdorff(lo_s, lo, hi_s, hi)))
    return out


def sample_hausdorff(spec: SetSpec, eps: float, n_a: int, n_b: int, spacing: float) -> float:
    """Plain sample-to-sample Hausdorff distance between two levels."""
    a = samples_array(sample_boundary(level_boundary(spec, eps, n_a), spacing))
    b = samples_array(sample_boundary(level_boundary(spec, eps, n_b), spacing))
    return hausdorff_distance(a, b)
