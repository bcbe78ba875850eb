"""Per-point analysis: contributors, outward arcs, local boundary graphs f and alpha.

Local coordinates at a boundary point x with contributor y: d = x - y (|d| = eps)
and a unit direction xi orthogonal to d. The local graph is

    g(s) = x + s xi + f(s) d,     f(s) = max{t : dist(x + s xi + t d, E') <= eps}

where E' is the part of E (or of a finite approximating set) lying in the cone
|<c - x, xi>| <= eps, <c - x, d> <= -eps^2 / 2 on the side of y.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (TWO_PI, ArcKind, GeodesicArc, Point2, UnitDir, angle_between, as_xy,
                       half_circle)
from .setmodel import (SetSpec, _arrays, _segment_feet, distance_and_projection,
                       finite_approximating_set)

ORTHO_TOL = 1e-7
OPPOSE_TOL = 1e-6
ZERO_TOL = 1e-10
DEFAULT_SAMPLES = 257
DENSIFY = 8


@dataclass(frozen=True)
class ContributorSet:
    point: Point2
    members: tuple
    extremal: tuple = ()

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True)
class OutwardArc:
    arc: GeodesicArc
    xi1: UnitDir
    xi2: UnitDir

    @property
    def kind(self) -> ArcKind:
        return self.arc.kind

    @property
    def width(self) -> float:
        return self.arc.width


@dataclass(frozen=True)
class ExtremalPair:
    xi: UnitDir
    y: Point2


@dataclass
class LocalRep:
    pair: ExtremalPair
    base: Point2
    level: int | None
    eps: float
    s: np.ndarray
    f: np.ndarray

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.s.tolist(), self.f.tolist()))

    @property
    def defined(self) -> np.ndarray:
        return np.isfinite(self.f)

    def curve(self) -> np.ndarray:
        """Points g(s) of the local graph (undefined samples dropped)."""
        x = as_xy(self.base)
        xi = as_xy(self.pair.xi)
        d = x - as_xy(self.pair.y)
        ok = self.defined
        return x + self.s[ok, None] * xi + self.f[ok, None] * d


@dataclass
class AlphaProfile:
    s: np.ndarray
    alpha: np.ndarray
    zero_runs: list = field(default_factory=list)     # (start_s, end_s) where alpha >= -tol
    sign_changes: list = field(default_factory=list)  # s where the negative/zero state flips

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.s.tolist(), self.alpha.tolist()))


# ---------------------------------------------------------------------------
# contributors and outward directions

def contributors(spec: SetSpec, x, eps: float, tol: float = 1e-9) -> ContributorSet:
    """All nearest points of E at distance eps from the boundary point x."""
    x = Point2(*map(float, as_xy(x)))
    pr = distance_and_projection(spec, x)
    if abs(pr.distance - eps) > tol * max(1.0, eps):
        raise ValueError(f"not a boundary point: dist={pr.distance!r}, eps={eps!r}")
    return ContributorSet(x, pr.argmin)


def _unit_offsets(x, members) -> np.ndarray:
    V = np.array([as_xy(y) for y in members]) - as_xy(x)
    return V / np.hypot(V[:, 0], V[:, 1])[:, None]


def outward_arc(x, pi: ContributorSet, tol: float = 1e-9) -> OutwardArc:
    """Intersection of the closed half-circles {u : <y - x, u> <= 0} over contributors."""
    if len(pi) == 0:
        raise ValueError("no contributors")
    V = _unit_offsets(x, pi.members)
    ang = np.sort(np.mod(np.arctan2(V[:, 1], V[:, 0]), TWO_PI))
    if len(ang) == 1 or ang[-1] - ang[0] <= tol:
        hc = half_circle(-V[0])
        return OutwardArc(hc, hc.a, hc.b)
    gaps = np.diff(np.concatenate([ang, [ang[0] + TWO_PI]]))
    k = int(np.argmax(gaps))
    g = gaps[k]
    if g < math.pi - tol:
        raise ValueError("interior point: contributors surround x")
    order = np.argsort(np.mod(np.arctan2(V[:, 1], V[:, 0]), TWO_PI), kind="stable")
    v_lo, v_hi = V[order[k]], V[order[(k + 1) % len(ang)]]
    # contributors occupy the ccw sweep from v_hi to v_lo; rotate the extreme ones by 90 degrees
    xi1 = UnitDir.from_vector((-v_lo[1], v_lo[0]))
    xi2 = UnitDir.from_vector((v_hi[1], -v_hi[0]))
    if g - math.pi <= tol:
        wide = np.flatnonzero(gaps >= math.pi - tol)
        if len(wide) >= 2:
            a, b = sorted([xi1, -xi1], key=lambda u: (round(u.angle, 12), u.ux, u.uy))
            return OutwardArc(GeodesicArc(a, b, ArcKind.ANTIPODAL), a, b)
        return OutwardArc(GeodesicArc(xi1, xi1, ArcKind.SINGLETON), xi1, xi1)
    return OutwardArc(GeodesicArc(xi1, xi2, ArcKind.PROPER), xi1, xi2)


def extremal_pairs(x, pi: ContributorSet, oa: OutwardArc, tol: float = ORTHO_TOL) -> list[ExtremalPair]:
    """Pairs (xi, y) with xi an arc endpoint and <(y - x)/|y - x|, xi> = 0."""
    xs = as_xy(x)
    dirs = list(oa.arc.endpoints) if oa.kind is not ArcKind.SINGLETON else [oa.xi1]
    out = []
    for xi in dirs:
        for y in pi.members:
            v = as_xy(y) - xs
            if abs(float(v @ as_xy(xi))) / max(np.hypot(*v), 1e-300) <= tol:
                out.append(ExtremalPair(xi, y))
    return out


def with_extremal_flags(pi: ContributorSet, pairs) -> ContributorSet:
    ext = tuple(any(p.y == y for p in pairs) for y in pi.members)
    return ContributorSet(pi.point, pi.members, ext)


def opposing_pairs(x, members, eps: float, tol: float = OPPOSE_TOL) -> list[tuple[Point2, Point2]]:
    xs = as_xy(x)
    out = []
    for i, y1 in enumerate(members):
        for y2 in members[i + 1:]:
            if np.hypot(*((as_xy(y1) - xs) + (as_xy(y2) - xs))) <= tol * eps:
                out.append((y1, y2))
    return out


# ---------------------------------------------------------------------------
# local boundary representation

def _frame(x, pair: ExtremalPair, eps: float):
    xs = as_xy(x)
    xi = as_xy(pair.xi)
    d = xs - as_xy(pair.y)
    if abs(np.hypot(*d) - eps) > 1e-8 * max(1.0, eps) or abs(xi @ d) > ORTHO_TOL * eps:
        raise ValueError("pair inconsistent with base point")
    return xs, xi, d


def _f_points(C, s, xs, xi, d, eps):
    """max t over point centers, per s. C already restricted to the cone."""
    out = np.full(len(s), -np.inf)
    if len(C) == 0:
        return out
    q = xs + s[:, None] * xi                       # (m, 2)
    W = q[:, None, :] - C[None, :, :]              # (m, k, 2)
    wd = W @ d
    ww = np.einsum("mkj,mkj->mk", W, W)
    disc = wd * wd - eps * eps * (ww - eps * eps)
    t = np.where(disc >= 0, (-wd + np.sqrt(np.maximum(disc, 0.0))) / (eps * eps), -np.inf)
    return t.max(axis=1)


def _clip_segment(a, b, xs, xi, dhat, eps):
    """Parameter range [l0, l1] of segment a->b inside the cone, or None."""
    sa, sb = (a - xs) @ xi, (b - xs) @ xi
    ra, rb = (a - xs) @ dhat, (b - xs) @ dhat
    l0, l1 = 0.0, 1.0
    # constraints p * l <= q  (Liang-Barsky)
    for p, q in ((sb - sa, eps - sa), (sa - sb, eps + sa), (rb - ra, -eps / 2 - ra)):
        if p == 0.0:
            if q < 0:
                return None
            continue
        r = q / p
        if p > 0:
            l1 = min(l1, r)
        else:
            l0 = max(l0, r)
        if l0 > l1:
            return None
    return l0, l1, sa, sb - sa, ra, rb - ra


def _f_segment(clip, s, eps):
    """max over the clipped segment of (rho + sqrt(eps^2 - (sigma - s)^2)) / eps."""
    l0, l1, s0, ds, r0, dr = clip
    s = np.asarray(s, dtype=float)
    lo = np.full(len(s), l0)
    hi = np.full(len(s), l1)
    # restrict to |sigma(l) - s| <= eps
    if ds != 0.0:
        a = (s - eps - s0) / ds
        b = (s + eps - s0) / ds
        lo = np.maximum(lo, np.minimum(a, b))
        hi = np.minimum(hi, np.maximum(a, b))
    else:
        hi = np.where(np.abs(s0 - s) > eps, -np.inf, hi)
    ok = lo <= hi

    def value(lam):
        sig = s0 + lam * ds - s
        return (r0 + lam * dr + np.sqrt(np.maximum(eps * eps - sig * sig, 0.0))) / eps

    best = np.maximum(value(lo), value(hi))
    if ds != 0.0:
        # stationary point of the concave objective
        delta = eps * dr * math.copysign(1.0, ds) / math.hypot(ds, dr)
        lam = (s + delta - s0) / ds
        inside = (lam > lo) & (lam < hi)
        best = np.where(inside, np.maximum(best, value(np.clip(lam, lo, np.maximum(lo, hi)))), best)
    return np.where(ok, best, -np.inf)


def _cone_set(spec: SetSpec, xs, xi, d, eps: float, n):
    """Cone points (k, 2) and clipped cone segments as (a, b) endpoint pairs."""
    dhat = d / eps
    if n is None:
        P, A, B = _arrays(spec)
    else:
        P = finite_approximating_set(spec, n, eps).points
        A = B = np.zeros((0, 2))
    if len(P):
        rel = P - xs
        P = P[(np.abs(rel @ xi) <= eps * (1 + 1e-12)) & (rel @ dhat <= -eps / 2)]
    clips = []
    for a, b in zip(A, B):
        clip = _clip_segment(a, b, xs, xi, dhat, eps)
        if clip is not None:
            clips.append((clip, a + clip[0] * (b - a), a + clip[1] * (b - a)))
    return P, clips


def f_values(spec: SetSpec, x, pair: ExtremalPair, eps: float, s, n: int | None = None) -> np.ndarray:
    """f(s) at the given offsets; -inf where no part of the cone set reaches."""
    xs, xi, d = _frame(x, pair, eps)
    s = np.asarray(s, dtype=float)
    P, clips = _cone_set(spec, xs, xi, d, eps, n)
    out = _f_points(P, s, xs, xi, d, eps)
    for clip, _, _ in clips:
        out = np.maximum(out, _f_segment(clip, s, eps))
    return out


def active_offsets(rep: "LocalRep", spec: SetSpec, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Smallest and largest xi-coordinate <w - x, xi> of the cone points w nearest to g(s).

    g(s) lies on the boundary of the eps-neighbourhood of the cone set, so these are
    the contributors that shape f at s. NaN where f is undefined.
    """
    xs, xi, d = _frame(rep.base, rep.pair, rep.eps)
    P, clips = _cone_set(spec, xs, xi, d, rep.eps, rep.level)
    lo = np.full(len(rep.s), np.nan)
    hi = np.full(len(rep.s), np.nan)
    ok = rep.defined
    if not ok.any():
        return lo, hi
    G = rep.curve()
    W = [P] if len(P) else []
    dist = [np.hypot(*(G[:, None, :] - P[None]).transpose(2, 0, 1))] if len(P) else []
    if clips:
        A = np.array([c[1] for c in clips])
        B = np.array([c[2] for c in clips])
        feet, dseg = _segment_feet(G, A, B)
        dist.append(dseg)
    D = np.concatenate(dist, axis=1)
    near = D <= D.min(axis=1, keepdims=True) + tol * max(1.0, rep.eps)
    off = np.concatenate(([np.broadcast_to((P - xs) @ xi, (len(G), len(P)))] if len(P) else [])
                         + ([(feet - xs) @ xi] if clips else []), axis=1)
    lo[ok] = np.where(near, off, np.inf).min(axis=1)
    hi[ok] = np.where(near, off, -np.inf).max(axis=1)
    return lo, hi


def representation_radius(rep: "LocalRep", spec: SetSpec, tol: float = 1e-9) -> float:
    """Largest sampled s such that on [0, s] every active contributor has xi-coordinate
    in [0, eps/2]; the slope bounds are stated on this interval."""
    lo, hi = active_offsets(rep, spec)
    eps = rep.eps
    good = ~rep.defined | ((lo >= -tol * max(1.0, eps)) & (hi <= eps / 2 * (1 + 1e-9) + tol))
    good[rep.s == 0] = True       # at x itself every contributor ties
    if good.all():
        return float(rep.s[-1])
    k = int(np.argmin(good))
    return float(rep.s[k - 1]) if k > 0 else 0.0


def local_rep(spec: SetSpec, x, pair: ExtremalPair, eps: float, n: int | None = None,
              num_samples: int = DEFAULT_SAMPLES, s_max: float | None = None) -> LocalRep:
    """Sample f on a uniform grid over [0, s_max], s_max <= eps/2.

    n=None uses E itself; an integer n uses the finite approximating set of that level.
    """
    if num_samples < 2:
        raise ValueError("num_samples must be at least 2")
    s_max = eps / 2 if s_max is None else min(float(s_max), eps / 2)
    s = np.linspace(0.0, s_max, num_samples)
    x = Point2(*map(float, as_xy(x)))
    return LocalRep(pair, x, n, eps, s, f_values(spec, x, pair, eps, s, n))


def _runs(mask):
    """Index ranges [i, j] of consecutive True entries."""
    out = []
    i = 0
    m = len(mask)
    while i < m:
        if mask[i]:
            j = i
            while j + 1 < m and mask[j + 1]:
                j += 1
            out.append((i, j))
            i = j + 1
        else:
            i += 1
    return out


def _annotate(s, alpha, tol=ZERO_TOL) -> AlphaProfile:
    zero = alpha >= -tol
    runs = [(float(s[i]), float(s[j])) for i, j in _runs(zero)]
    # alpha(0) = 0 at the base point, so flips are only counted on s > 0
    flips = [float(s[k + 1]) for k in range(len(s) - 1) if s[k] > 0 and zero[k] != zero[k + 1]]
    return AlphaProfile(np.asarray(s), np.asarray(alpha), runs, flips)


def alpha_profile(rep1: LocalRep, rep2: LocalRep, tol: float = ZERO_TOL) -> AlphaProfile:
    """alpha(s) = f1(s) + f2(s) for opposing contributors along a shared direction."""
    if rep1.pair.xi != rep2.pair.xi:
        raise ValueError("representations use different directions")
    if rep1.s.shape != rep2.s.shape or not np.array_equal(rep1.s, rep2.s):
        raise ValueError("mismatched sample grids")
    x = as_xy(rep1.base)
    if np.hypot(*((as_xy(rep1.pair.y) - x) + (as_xy(rep2.pair.y) - x))) > OPPOSE_TOL * rep1.eps:
        raise ValueError("contributors are not opposing")
    return _annotate(rep1.s, rep1.f + rep2.f, tol)


def alpha_window(spec: SetSpec, x, xi: UnitDir, y1, y2, eps: float, s_max: float,
                 n: int | None = None, num_samples: int = DEFAULT_SAMPLES,
                 densify: int = DENSIFY, tol: float = ZERO_TOL) -> AlphaProfile:
    """alpha on (0, s_max], refined `densify`-fold around each negative/zero transition."""
    p1, p2 = ExtremalPair(xi, Point2(*as_xy(y1))), ExtremalPair(xi, Point2(*as_xy(y2)))
    s = np.linspace(0.0, min(s_max, eps / 2), num_samples)[1:]

    def alpha_at(t):
        return f_values(spec, x, p1, eps, t, n) + f_values(spec, x, p2, eps, t, n)

    a = alpha_at(s)
    zero = a >= -tol
    extra = []
    for k in range(len(s) - 1):
        if zero[k] != zero[k + 1]:
            extra.append(np.linspace(s[k], s[k + 1], densify + 1)[1:-1])
    if extra:
        t = np.concatenate(extra)
        s = np.concatenate([s, t])
        a = np.concatenate([a, alpha_at(t)])
        order = np.argsort(s, kind="stable")
        s, a = s[order], a[order]
    return _annotate(s, a, tol)


# ---------------------------------------------------------------------------
# tangents from samples

def _arc_sequences(samples):
    seqs = {}
    for k, smp in enumerate(samples):
        seqs.setdefault(smp.arc_id, []).append(k)
    for v in seqs.values():
        v.sort(key=lambda k: samples[k].arclength_coord)
    return seqs


def _walk(samples, seqs, arc, pos, steps, forward, tol=1e-9):
    """Index `steps` samples away along the boundary, hopping arcs at shared endpoints."""
    guard = 0
    while True:
        seq = seqs[arc]
        target = pos + steps if forward else pos - steps
        if 0 <= target < len(seq):
            return seq[target]
        # move onto the neighbouring arc
        steps -= (len(seq) - 1 - pos) if forward else pos
        end = samples[seq[-1] if forward else seq[0]].position
        matches = []
        for other, oseq in sorted(seqs.items()):
            probe = samples[oseq[0] if forward else oseq[-1]].position
            if abs(probe.x - end.x) <= tol and abs(probe.y - end.y) <= tol:
                matches.append(other)
        others = [m for m in matches if m != arc]
        nxt = others[0] if others else (matches[0] if matches else None)
        if nxt is None:
            return seq[-1] if forward else seq[0]
        arc = nxt
        pos = 0 if forward else len(seqs[arc]) - 1
        guard += 1
        if guard > len(seqs) + 2:
            return seqs[arc][pos]


def arc_sequences(samples) -> dict:
    """Per-arc sample indices in arclength order; pass to tangent_estimate when looping."""
    return _arc_sequences(samples)


def tangent_estimate(samples, idx: int, window: int = 1, seqs=None) -> tuple[UnitDir, UnitDir]:
    """One-sided secant directions (backward, forward) from sample idx."""
    if window < 1:
        raise ValueError("window must be >= 1")
    if not 0 <= idx < len(samples):
        raise IndexError("sample index out of range")
    seqs = _arc_sequences(samples) if seqs is None else seqs
    arc = samples[idx].arc_id
    pos = seqs[arc].index(idx)
    p = samples[idx].position
    out = []
    for forward in (False, True):
        j = _walk(samples, seqs, arc, pos, window, forward)
        q = samples[j].position
        v = (q.x - p.x, q.y - p.y)
        if math.hypot(*v) == 0.0:
            raise ValueError("isolated sample")
        out.append(UnitDir.from_vector(v))
    return out[0], out[1]


def angular_error(u, v) -> float:
    return angle_between(u, v)
