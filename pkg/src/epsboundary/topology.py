"""Complement components on a raster, chain evidence, and chain-set diagnostics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .geometry import Point2, as_xy
from .setmodel import SetSpec, distance_to_set

CHAIN_LABELS = ("S6", "S7", "S8")
FOUR = ndimage.generate_binary_structure(2, 1)


@dataclass
class ComplementComponent:
    id: int
    cells: np.ndarray          # (k, 2) lattice indices; cell centre = index * h
    h: float
    bbox: tuple
    diameter: float
    bounded: bool
    boundary_arc_ids: list = field(default_factory=list)

    @property
    def centers(self) -> np.ndarray:
        return self.cells * self.h

    def __len__(self):
        return len(self.cells)


@dataclass
class ComponentMap:
    components: list
    labels: np.ndarray        # component id + 1 per cell, 0 = covered
    origin: tuple             # lattice index of labels[0, 0]
    h: float

    def component_at(self, p) -> int:
        """Component id of the cell whose centre is nearest to p, -1 if covered or outside."""
        i = int(round(p[0] / self.h)) - self.origin[0]
        j = int(round(p[1] / self.h)) - self.origin[1]
        if 0 <= i < self.labels.shape[0] and 0 <= j < self.labels.shape[1]:
            return int(self.labels[i, j]) - 1
        return -1

    @property
    def bounded(self) -> list:
        return [c for c in self.components if c.bounded]

    def __len__(self):
        return len(self.components)

    def __iter__(self):
        return iter(self.components)

    def __getitem__(self, k):
        return self.components[k]


def _diameter(P: np.ndarray) -> float:
    if len(P) < 2:
        return 0.0
    if len(P) > 3:
        try:
            P = P[ConvexHull(P).vertices]
        except QhullError:
            pass
    d = P[:, None, :] - P[None, :, :]
    return float(np.sqrt((d ** 2).sum(-1)).max())


def complement_components(source, eps: float, bbox, h: float, arcs=None) -> ComponentMap:
    """4-connected components of the raster cells whose centre lies farther than eps from `source`.

    `source` is an array of centres or a SetSpec (exact distance). Cell centres sit on the
    lattice (i*h, j*h). Components touching the raster border are unbounded.
    """
    if not h > 0 or h > eps / 8 * (1 + 1e-12):
        raise ValueError("raster step must satisfy 0 < h <= eps/8")
    xmin, ymin, xmax, ymax = map(float, bbox)
    if isinstance(source, SetSpec):
        ex = source.bbox
        dist = lambda Z: distance_to_set(source, Z)  # noqa: E731
    else:
        C = np.asarray(source, dtype=float).reshape(-1, 2)
        if len(C) == 0:
            raise ValueError("no centers")
        ex = (C[:, 0].min(), C[:, 1].min(), C[:, 0].max(), C[:, 1].max())
        tree = cKDTree(C)
        dist = lambda Z: tree.query(Z)[0]  # noqa: E731
    pad = 2 * eps
    if xmin > ex[0] - pad or ymin > ex[1] - pad or xmax < ex[2] + pad or ymax < ex[3] + pad:
        raise ValueError("bbox too small: must contain the set padded by 2*eps")
    i0, i1 = math.ceil(xmin / h - 1e-9), math.floor(xmax / h + 1e-9)
    j0, j1 = math.ceil(ymin / h - 1e-9), math.floor(ymax / h + 1e-9)
    I, J = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1), indexing="ij")
    Z = np.stack([I.ravel() * h, J.ravel() * h], 1)
    free = (dist(Z) > eps).reshape(I.shape)
    lab, num = ndimage.label(free, structure=FOUR)
    comps = []
    objs = ndimage.find_objects(lab)
    for k in range(num):
        sl = objs[k]
        sub = lab[sl] == k + 1
        ii, jj = np.nonzero(sub)
        cells = np.stack([ii + sl[0].start + i0, jj + sl[1].start + j0], 1).astype(np.int64)
        border = (sl[0].start == 0 or sl[1].start == 0 or sl[0].stop == lab.shape[0]
                  or sl[1].stop == lab.shape[1])
        P = cells * h
        box = (float(P[:, 0].min()), float(P[:, 1].min()), float(P[:, 0].max()), float(P[:, 1].max()))
        comps.append(ComplementComponent(k, cells, h, box, _diameter(P), not border))
    cmap = ComponentMap(comps, lab, (i0, j0), h)
    if arcs is not None:
        _attach_arcs(cmap, arcs)
    return cmap


def _attach_arcs(cmap: ComponentMap, bas) -> None:
    """Record, per component, the arcs whose outward side at the midpoint falls in it."""
    for k, arc in enumerate(bas.arcs):
        mid = arc.theta_start + arc.extent / 2
        p = np.array([arc.center.x, arc.center.y]) + (arc.radius + 1.5 * cmap.h) * np.array(
            [math.cos(mid), math.sin(mid)])
        cid = cmap.component_at(p)
        if cid >= 0:
            cmap.components[cid].boundary_arc_ids.append(k)


def component_count_stable(source, eps: float, bbox, h: float) -> tuple[int, int]:
    """Bounded component counts at h and h/2."""
    a = len(complement_components(source, eps, bbox, h).bounded)
    b = len(complement_components(source, eps, bbox, h / 2).bounded)
    return a, b


def padded_bbox(spec_or_centers, eps: float, extra: float = 0.25) -> tuple:
    if isinstance(spec_or_centers, SetSpec):
        x0, y0, x1, y1 = spec_or_centers.bbox
    else:
        C = np.asarray(spec_or_centers, dtype=float).reshape(-1, 2)
        x0, y0, x1, y1 = C[:, 0].min(), C[:, 1].min(), C[:, 0].max(), C[:, 1].max()
    pad = 2 * eps + extra * eps
    return (x0 - pad, y0 - pad, x1 + pad, y1 + pad)


# ---------------------------------------------------------------------------
# chain evidence

@dataclass
class ChainEvidence:
    target: Point2
    component_ids: list
    hausdorff_seq: list
    pinch_points: list
    error_bar: float


def chain_evidence(target, comps, min_links: int = 3, radius: float | None = None) -> ChainEvidence | None:
    """Bounded components with strictly decreasing Hausdorff distance to the target.

    Only components within `radius` of the target are considered, and the last link
    must come closer than radius/4, mirroring the accumulation test used for alpha.
    """
    comps = list(comps)
    t = as_xy(target)
    if not comps:
        return None
    h = comps[0].h
    if radius is None:
        radius = math.inf
    links = []
    for c in comps:
        if not c.bounded:
            continue
        d = np.hypot(*(c.centers - t).T)
        dh = float(d.max())
        if dh <= radius:
            links.append((dh, c.id, c.centers[int(np.argmin(d))]))
    links.sort(key=lambda z: (-z[0], z[1]))
    seq = []
    for dh, cid, pinch in links:
        if not seq or dh < seq[-1][0]:
            seq.append((dh, cid, pinch))
    if len(seq) < min_links:
        return None
    if math.isfinite(radius) and seq[-1][0] >= radius / 4:
        return None
    return ChainEvidence(Point2(*map(float, t)), [s[1] for s in seq], [s[0] for s in seq],
                         [Point2(*map(float, s[2])) for s in seq], h * math.sqrt(2) / 2)


# ---------------------------------------------------------------------------
# diagnostics for the chain-labelled set

@dataclass
class DiagnosticsReport:
    closed: bool
    disconnected: bool
    nowhere_dense: bool
    failures: dict

    @property
    def ok(self) -> bool:
        return self.closed and self.disconnected and self.nowhere_dense


def _separated(p, q, non_chain_tree, spec, eps, classify_mid) -> bool:
    mid = (p + q) / 2
    half = np.hypot(*(q - p)) / 2
    if non_chain_tree is not None and non_chain_tree.query_ball_point(mid, half * (1 + 1e-9)):
        return True
    if spec is None:
        return False
    probes = p + np.linspace(0, 1, 17)[1:-1, None] * (q - p)
    dist = distance_to_set(spec, probes)
    if (np.abs(dist - eps) > 1e-9 * max(1.0, eps)).any():
        return True           # the segment leaves the eps-level: complement gap or interior
    return classify_mid is not None and not classify_mid(mid)


def _accumulates(p, chain, ctree, rho, min_scales: int = 3) -> bool:
    """Chain points approach p at resolution rho: they occupy >= min_scales dyadic annuli
    (rho/2^(k+1), rho/2^k] inside the rho-ball."""
    near = ctree.query_ball_point(p, rho)
    d = np.hypot(*(chain[near] - p).T) if near else np.empty(0)
    d = d[d > 1e-12 * rho]
    if len(d) < min_scales:
        return False
    k = np.floor(np.log2(rho / d)).astype(int)
    return len(np.unique(k)) >= min_scales


def _midpoint_classifier(spec, eps, records):
    """True when a probe point is itself chain-labelled at the records' radius and level."""
    from .classify import analyze_point, classify_point, exact_singular_candidates
    from .geometry import ArcKind

    radius = min(r.inspection_radius for r in records)
    level = records[0].level
    exact = exact_singular_candidates(spec, eps)
    etree = cKDTree(exact) if len(exact) else None

    def is_chain(z) -> bool:
        try:
            b = analyze_point(spec, z, eps, radius, level)
        except ValueError:
            return False
        if b.arc is None:
            return False
        if b.arc.kind is not ArcKind.HALF:
            # several contributors: only the exact singular candidates carry labels
            if etree is None or etree.query(z)[0] > 1e-9 * max(1.0, eps):
                return False
        rec = classify_point(b)
        return rec is not None and rec.label in CHAIN_LABELS

    return is_chain


def chain_set_diagnostics(records, r_list, resolution: float | None = None,
                          spec: SetSpec | None = None, eps: float | None = None,
                          classify_mid=None) -> DiagnosticsReport:
    """Closedness, total-disconnectedness and nowhere-density proxies for chain labels.

    resolution defaults to the records' sampling spacing (inspection radius / 8).
    With spec and eps, two nearby chain points are also separated when the segment
    between them leaves the eps-level set.
    """
    records = list(records)
    chain = np.array([as_xy(r.point) for r in records if r.label in CHAIN_LABELS]).reshape(-1, 2)
    other = np.array([as_xy(r.point) for r in records if r.label not in CHAIN_LABELS]).reshape(-1, 2)
    fails = {"closed": [], "disconnected": [], "nowhere_dense": []}
    if len(chain) == 0:
        return DiagnosticsReport(True, True, True, fails)
    if resolution is None:
        radii = [r.inspection_radius for r in records if r.inspection_radius > 0]
        resolution = (min(radii) / 8) if radii else 1e-3
    ctree = cKDTree(chain)
    otree = cKDTree(other) if len(other) else None
    if classify_mid is None and spec is not None:
        classify_mid = _midpoint_classifier(spec, eps, records)
    # (a) accumulation points of chain labels are chain or unresolved
    for r in records:
        if r.label in CHAIN_LABELS or r.label == "Unresolved":
            continue
        if _accumulates(as_xy(r.point), chain, ctree, resolution):
            fails["closed"].append((r.point.x, r.point.y))
    # (b) nearby chain points are separated
    link = 2 * math.sqrt(2) * resolution
    for i, j in sorted(ctree.query_pairs(link)):
        if not _separated(chain[i], chain[j], otree, spec, eps, classify_mid):
            fails["disconnected"].append((tuple(chain[i]), tuple(chain[j])))
    # (c) every chain point sees a non-chain record at each scale
    for p in chain:
        for rr in r_list:
            if otree is None or not otree.query_ball_point(p, rr):
                fails["nowhere_dense"].append((tuple(p), rr))
                break
    return DiagnosticsReport(not fails["closed"], not fails["disconnected"],
                             not fails["nowhere_dense"], fails)
