"""Compact planar sets built from points and segments.

Exact distance/projection, the nested dyadic approximating sets and the
generators for the standard example sets live here.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Point2, as_xy

ARGMIN_RTOL = 1e-9


@dataclass(frozen=True)
class PointPrim:
    p: Point2


@dataclass(frozen=True)
class SegmentPrim:
    a: Point2
    b: Point2


@dataclass(frozen=True)
class SetSpec:
    primitives: tuple
    label: str = ""

    def __post_init__(self):
        if len(self.primitives) == 0:
            raise ValueError("empty set spec")
        object.__setattr__(self, "primitives", tuple(self.primitives))

    @property
    def points(self) -> np.ndarray:
        return _arrays(self)[0]

    @property
    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        _, a, b = _arrays(self)
        return a, b

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        pts, a, b = _arrays(self)
        allp = np.vstack([pts, a, b])
        return (float(allp[:, 0].min()), float(allp[:, 1].min()),
                float(allp[:, 0].max()), float(allp[:, 1].max()))


def point_set(points, label: str = "") -> SetSpec:
    return SetSpec(tuple(PointPrim(Point2(float(x), float(y))) for x, y in points), label)


def segment_set(segments, label: str = "") -> SetSpec:
    return SetSpec(tuple(SegmentPrim(Point2(*map(float, a)), Point2(*map(float, b)))
                         for a, b in segments), label)


@lru_cache(maxsize=64)
def _arrays(spec: SetSpec):
    pts = [tuple(p.p) for p in spec.primitives if isinstance(p, PointPrim)]
    segs = [(tuple(s.a), tuple(s.b)) for s in spec.primitives if isinstance(s, SegmentPrim)]
    P = np.array(pts, dtype=float).reshape(-1, 2)
    A = np.array([s[0] for s in segs], dtype=float).reshape(-1, 2)
    B = np.array([s[1] for s in segs], dtype=float).reshape(-1, 2)
    return P, A, B


@lru_cache(maxsize=64)
def _point_tree(spec: SetSpec):
    P = _arrays(spec)[0]
    return cKDTree(P) if len(P) else None


# ---------------------------------------------------------------------------
# distance oracle

@dataclass(frozen=True)
class ProjectionResult:
    distance: float
    argmin: tuple


def _segment_feet(X, A, B):
    """Nearest points on each segment for each query. Shapes (n,k,2), (n,k)."""
    AB = B - A
    L2 = np.einsum("ij,ij->i", AB, AB)
    L2s = np.where(L2 > 0, L2, 1.0)
    AX = X[:, None, :] - A[None, :, :]
    t = np.einsum("nkj,kj->nk", AX, AB) / L2s
    t = np.clip(np.where(L2 > 0, t, 0.0), 0.0, 1.0)
    feet = A[None, :, :] + t[..., None] * AB[None, :, :]
    # endpoints exactly, so shared corners dedupe cleanly
    feet = np.where((t == 0.0)[..., None], A[None], feet)
    feet = np.where((t == 1.0)[..., None], B[None], feet)
    d = np.hypot(X[:, None, 0] - feet[..., 0], X[:, None, 1] - feet[..., 1])
    return feet, d


def distance_to_set(spec: SetSpec, X, chunk: int = 4096) -> np.ndarray:
    """Vectorised dist(x, E) for an (n, 2) array of queries."""
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    P, A, B = _arrays(spec)
    out = np.full(len(X), np.inf)
    if len(P):
        out = np.minimum(out, _point_tree(spec).query(X)[0])
    if len(A):
        step = max(1, chunk * 64 // max(len(A), 1))
        for i in range(0, len(X), step):
            _, d = _segment_feet(X[i:i + step], A, B)
            out[i:i + step] = np.minimum(out[i:i + step], d.min(axis=1))
    return out


def distance_and_projection(spec: SetSpec, x, rtol: float = ARGMIN_RTOL) -> ProjectionResult:
    """Distance from x to E and every nearest point (deduplicated)."""
    if not spec.primitives:
        raise ValueError("empty set spec")
    x = as_xy(x)
    P, A, B = _arrays(spec)
    cand = []
    dist = []
    if len(P):
        d = np.hypot(P[:, 0] - x[0], P[:, 1] - x[1])
        cand.append(P)
        dist.append(d)
    if len(A):
        feet, d = _segment_feet(x[None], A, B)
        cand.append(feet[0])
        dist.append(d[0])
    C = np.vstack(cand)
    D = np.concatenate(dist)
    dmin = float(D.min())
    keep = D <= dmin * (1 + rtol) + 1e-15
    pts = C[keep]
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    out: list[Point2] = []
    dedupe_tol = 1e-9 * max(1.0, dmin)
    for q in pts[order]:
        if not any(abs(q[0] - o.x) <= dedupe_tol and abs(q[1] - o.y) <= dedupe_tol for o in out):
            out.append(Point2(float(q[0]), float(q[1])))
    return ProjectionResult(dmin, tuple(out))


# ---------------------------------------------------------------------------
# dyadic approximating sets

@dataclass(frozen=True)
class ApproxSet:
    level: int
    points: np.ndarray
    cell_size: float

    def __len__(self):
        return len(self.points)


def level_threshold(eps: float) -> int:
    """Smallest admissible n0 (n0 > log2(4/eps)); levels must exceed it."""
    return math.floor(math.log2(4.0 / eps)) + 1


def _segment_cell_pieces(a, b, h):
    """Yield (cell, candidate point) pairs for segment a-b on the half-open grid of size h."""
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    d = b - a
    ts = {0.0: a.copy(), 1.0: b.copy()}
    for axis in (0, 1):
        if d[axis] == 0.0:
            continue
        lo, hi = sorted((a[axis], b[axis]))
        k0 = math.ceil(lo / h)
        k1 = math.floor(hi / h)
        for k in range(k0, k1 + 1):
            t = (k * h - a[axis]) / d[axis]
            if 0.0 < t < 1.0:
                p = a + t * d
                p[axis] = k * h
                if t in ts:
                    p[1 - axis] = ts[t][1 - axis]
                ts[t] = p
    keys = sorted(ts)
    out = []
    for t in keys:
        p = ts[t]
        out.append(((math.floor(p[0] / h), math.floor(p[1] / h)), p))
    for t0, t1 in zip(keys[:-1], keys[1:]):
        m = 0.5 * (ts[t0] + ts[t1])
        out.append(((math.floor(m[0] / h), math.floor(m[1] / h)), m))
    return out


def _cell_candidates(spec: SetSpec, h: float) -> dict:
    P, A, B = _arrays(spec)
    cells: dict = {}
    for p in P:
        cells.setdefault((math.floor(p[0] / h), math.floor(p[1] / h)), []).append(p)
    for a, b in zip(A, B):
        for cell, p in _segment_cell_pieces(a, b, h):
            cells.setdefault(cell, []).append(p)
    return cells


def _pick(cell, cands, h):
    corner = np.array([cell[0] * h, cell[1] * h])
    return min(cands, key=lambda p: (float(np.hypot(*(p - corner))), float(p[0]), float(p[1])))


@lru_cache(maxsize=32)
def _nested_levels(spec: SetSpec, n: int) -> tuple:
    reps = {}
    for level in range(0, n + 1):
        h = 2.0 ** -level
        cells = _cell_candidates(spec, h)
        parent = {}
        for p in reps.values():
            parent.setdefault((math.floor(p[0] / h), math.floor(p[1] / h)), p)
        reps = {cell: parent[cell] if cell in parent else _pick(cell, cands, h)
                for cell, cands in cells.items()}
    keys = sorted(reps)
    return tuple(tuple(float(v) for v in reps[k]) for k in keys)


def finite_approximating_set(spec: SetSpec, n: int, eps: float | None = None) -> ApproxSet:
    """One representative of E per half-open dyadic cell of side 2^-n.

    Representatives are selected level by level from n = 0, keeping a parent's
    representative in whichever child cell contains it, so the sets are nested.
    """
    if eps is not None and n <= level_threshold(eps):
        raise ValueError(f"level below the eps threshold: need n > {level_threshold(eps)} for eps={eps}")
    if n < 0:
        raise ValueError("level must be non-negative")
    pts = np.array(_nested_levels(spec, n), dtype=float).reshape(-1, 2)
    return ApproxSet(n, pts, 2.0 ** -n)


# ---------------------------------------------------------------------------
# generators

def gen_fat_cantor(depth: int) -> SetSpec:
    """C_k x {0, 1}, C_k the depth-k Smith-Volterra-Cantor approximant."""
    if not 0 <= depth <= 12:
        raise ValueError("depth out of range (0..12)")
    intervals = [(Fraction(0), Fraction(1))]
    for j in range(1, depth + 1):
        half = Fraction(1, 2 * 4 ** j)
        nxt = []
        for lo, hi in intervals:
            mid = (lo + hi) / 2
            nxt += [(lo, mid - half), (mid + half, hi)]
        intervals = nxt
    segs = [((float(lo), y), (float(hi), y)) for y in (0.0, 1.0) for lo, hi in intervals]
    return segment_set(segs, label=f"fat-cantor-{depth}")


def fat_cantor_gaps(depth: int) -> list[tuple[float, float]]:
    """Removed open intervals of C_depth, left to right."""
    spec = gen_fat_cantor(depth)
    A, B = spec.segments
    row = sorted((a[0], b[0]) for a, b in zip(A, B) if a[1] == 0.0)
    return [(row[i][1], row[i + 1][0]) for i in range(len(row) - 1)]


def fat_cantor_measure(depth: int) -> Fraction:
    return 1 - sum(Fraction(2 ** (j - 1), 4 ** j) for j in range(1, depth + 1))


def rationals(count: int) -> list[Fraction]:
    """Reduced fractions in (0, 1) ordered by denominator, then numerator."""
    out = []
    q = 2
    while len(out) < count:
        out += [Fraction(p, q) for p in range(1, q) if gcd(p, q) == 1]
        q += 1
    return out[:count]


def jump_integral_terms(num_terms: int):
    qs = rationals(num_terms)
    amps = [2.0 ** -(k + 1) for k in range(num_terms)]
    return [float(q) for q in qs], amps


def jump_integral(s, qs, amps):
    """I(s) = integral_0^s alpha, alpha(x) = sum of a_n over q_n <= x (closed form)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    for q, a in zip(qs, amps):
        out += a * np.maximum(s - q, 0.0)
    return out


def jump_slopes(s, qs, amps):
    """One-sided derivatives (D-, D+) of the jump integral."""
    s = np.asarray(s, dtype=float)
    lo = np.zeros_like(s)
    hi = np.zeros_like(s)
    for q, a in zip(qs, amps):
        lo += a * (s > q)
        hi += a * (s >= q)
    return lo, hi


def jump_contributor(s, slope, eps):
    s = np.asarray(s, float)
    slope = np.asarray(slope, float)
    root = np.sqrt(1.0 + slope ** 2)
    a = eps * slope / root
    b = eps / root
    return np.stack([s + a, -b], axis=-1)


def gen_jump_integral(num_terms: int, eps: float, grid: int = 256) -> SetSpec:
    """Contributor cloud whose eps-boundary contains the graph of a jump integral."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    qs, amps = jump_integral_terms(num_terms)
    s = np.unique(np.concatenate([np.linspace(0.0, 1.0, grid + 1), qs]))
    lo, hi = jump_slopes(s, qs, amps)
    base = jump_integral(s, qs, amps)
    pts = []
    for slope in (lo, hi):
        y = jump_contributor(s, slope, eps)
        y[:, 1] += base
        pts.append(y)
    pts = np.unique(np.vstack(pts), axis=0)
    return point_set(pts, label=f"jump-integral-{num_terms}")


def gen_rectangle_example() -> SetSpec:
    """[2, 3] x {0, 1}: two horizontal unit segments."""
    return segment_set([((2.0, 0.0), (3.0, 0.0)), ((2.0, 1.0), (3.0, 1.0))], label="rectangle")


def gen_point_pair(sep: float = 2.0) -> SetSpec:
    return point_set([(-sep / 2, 0.0), (sep / 2, 0.0)], label="point-pair")


def gen_single_point() -> SetSpec:
    return point_set([(0.0, 0.0)], label="point")


def gen_segment() -> SetSpec:
    return segment_set([((0.0, 0.0), (1.0, 0.0))], label="segment")


def gen_random_cloud(seed: int, max_points: int = 50, extent: float = 4.0) -> SetSpec:
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, max_points + 1))
    pts = rng.uniform(0.0, extent, size=(m, 2))
    return point_set(pts, label=f"random-{seed}")


GENERATORS = {
    "point": lambda **kw: gen_single_point(),
    "point-pair": lambda **kw: gen_point_pair(kw.get("sep", 2.0)),
    "segment": lambda **kw: gen_segment(),
    "rectangle": lambda **kw: gen_rectangle_example(),
    "fat-cantor": lambda **kw: gen_fat_cantor(kw.get("depth", 4)),
    "jump-integral": lambda **kw: gen_jump_integral(kw.get("terms", 4), kw.get("eps", 0.25)),
    "random": lambda **kw: gen_random_cloud(kw.get("seed", 0)),
}


# ---------------------------------------------------------------------------
# JSON set-spec files

def spec_to_dict(spec: SetSpec) -> dict:
    prims = []
    for p in spec.primitives:
        if isinstance(p, PointPrim):
            prims.append({"type": "point", "x": p.p.x, "y": p.p.y})
        else:
            prims.append({"type": "segment", "ax": p.a.x, "ay": p.a.y, "bx": p.b.x, "by": p.b.y})
    return {"label": spec.label, "primitives": prims}


def spec_from_dict(data: dict) -> SetSpec:
    prims = []
    for item in data.get("primitives", []):
        kind = item.get("type")
        if kind == "point":
            prims.append(PointPrim(Point2(float(item["x"]), float(item["y"]))))
        elif kind == "segment":
            prims.append(SegmentPrim(Point2(float(item["ax"]), float(item["ay"])),
                                     Point2(float(item["bx"]), float(item["by"]))))
        else:
            raise ValueError(f"unknown primitive type {kind!r}")
    return SetSpec(tuple(prims), str(data.get("label", "")))


def save_spec(spec: SetSpec, path) -> None:
    Path(path).write_text(json.dumps(spec_to_dict(spec), indent=1))


def load_spec(path) -> SetSpec:
    return spec_from_dict(json.loads(Path(path).read_text()))
