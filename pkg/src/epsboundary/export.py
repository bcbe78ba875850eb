"""File outputs: CSV, SVG, JSON and PGM.

JSON floats use Python's shortest round-trip repr; CSV floats use 17 significant
digits. Outputs are deterministic for identical inputs.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .arrangement import BoundaryArcSet
from .classify import Inventory, SingularityRecord
from .geometry import ArcKind, Point2, UnitDir

SCHEMA_VERSION = 1
LABEL_COLORS = {
    "S0": "#9e9e9e", "S1": "#d62728", "S2": "#ff7f0e", "S3": "#8c564b", "S4": "#2ca02c",
    "S5": "#17becf", "S6": "#1f77b4", "S7": "#9467bd", "S8": "#e377c2", "Unresolved": "#000000",
}


def _g(v: float) -> str:
    return format(float(v), ".17g")


def _writer(path):
    f = open(path, "w", newline="")
    return f, csv.writer(f, lineterminator="\n")


# ---------------------------------------------------------------------------
# arrangement

def write_arcs_csv(bas: BoundaryArcSet, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(["arc_id", "center_x", "center_y", "radius", "theta_start", "theta_end"])
        for k, a in enumerate(bas.arcs):
            w.writerow([k, _g(a.center.x), _g(a.center.y), _g(a.radius),
                        _g(a.theta_start), _g(a.theta_end)])


def write_vertices_csv(bas: BoundaryArcSet, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(["x", "y", "multiplicity", "tangent"])
        for v in bas.vertices:
            w.writerow([_g(v.position[0]), _g(v.position[1]), len(v.center_ids), int(v.tangent)])


def write_samples_csv(samples, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(["x", "y", "center_x", "center_y", "arc_id", "s"])
        for s in samples:
            w.writerow([_g(s.position.x), _g(s.position.y), _g(s.generating_center.x),
                        _g(s.generating_center.y), s.arc_id, _g(s.arclength_coord)])


def _svg_frame(bas: BoundaryArcSet, margin: float):
    if bas.arcs:
        P = np.array([[a.center.x, a.center.y] for a in bas.arcs])
        r = max(a.radius for a in bas.arcs)
        x0, y0 = P.min(0) - r - margin
        x1, y1 = P.max(0) + r + margin
    else:
        x0 = y0 = -1.0
        x1 = y1 = 1.0
    return x0, y0, x1 - x0, y1 - y0


def _arc_path(a) -> str:
    def pt(t):
        return a.center.x + a.radius * math.cos(t), a.center.y + a.radius * math.sin(t)
    if a.extent >= 2 * math.pi - 1e-12:
        # a full circle needs two half arcs
        (sx, sy), (mx, my) = pt(a.theta_start), pt(a.theta_start + math.pi)
        return (f"M {sx:.9g} {sy:.9g} A {a.radius:.9g} {a.radius:.9g} 0 0 1 {mx:.9g} {my:.9g} "
                f"A {a.radius:.9g} {a.radius:.9g} 0 0 1 {sx:.9g} {sy:.9g}")
    (sx, sy), (ex, ey) = pt(a.theta_start), pt(a.theta_end)
    large = 1 if a.extent > math.pi else 0
    return f"M {sx:.9g} {sy:.9g} A {a.radius:.9g} {a.radius:.9g} 0 {large} 1 {ex:.9g} {ey:.9g}"


def svg_document(bas: BoundaryArcSet, records=None, margin: float = 0.1) -> str:
    """One stroke-only path per arc; optional labelled points on top.

    The drawing uses mathematical coordinates (y up); a single group transform
    flips them into SVG's y-down convention.
    """
    x0, y0, w, h = _svg_frame(bas, margin)
    stroke = max(w, h) / 800
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           "<!-- coordinates are y-up; the group transform scale(1,-1) flips them for display -->",
           f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{x0:.9g} {-(y0 + h):.9g} {w:.9g} {h:.9g}">',
           '<g transform="scale(1,-1)">']
    for k, a in enumerate(bas.arcs):
        out.append(f'<path id="arc{k}" d="{_arc_path(a)}" fill="none" stroke="#333" '
                   f'stroke-width="{stroke:.6g}"/>')
    for r in records or []:
        if r.label == "S0":
            continue
        out.append(f'<circle cx="{r.point.x:.9g}" cy="{r.point.y:.9g}" r="{3 * stroke:.6g}" '
                   f'fill="{LABEL_COLORS.get(r.label, "#000")}" class="{r.label}"/>')
    out += ["</g>", "</svg>", ""]
    return "\n".join(out)


def write_svg(bas: BoundaryArcSet, path, records=None) -> None:
    Path(path).write_text(svg_document(bas, records))


# ---------------------------------------------------------------------------
# inventory

def _jsonable(v):
    if isinstance(v, Point2):
        return [v.x, v.y]
    if isinstance(v, UnitDir):
        return [v.ux, v.uy]
    if isinstance(v, ArcKind):
        return v.value
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def record_to_dict(r: SingularityRecord) -> dict:
    return {
        "point": [r.point.x, r.point.y], "label": r.label, "arc_kind": ArcKind(r.arc_kind).value,
        "xi": _jsonable(r.xi), "contributors": _jsonable(r.contributors), "angle": r.angle,
        "inspection_radius": r.inspection_radius, "level": r.level, "loop": r.loop,
        "loop_s": _jsonable(r.loop_s), "evidence": _jsonable(r.evidence),
    }


def record_from_dict(d: dict) -> SingularityRecord:
    return SingularityRecord(
        point=Point2(*d["point"]), label=d["label"], arc_kind=ArcKind(d["arc_kind"]),
        xi=tuple(UnitDir(*u) for u in d.get("xi", [])),
        contributors=tuple(Point2(*p) for p in d.get("contributors", [])),
        angle=d.get("angle"), evidence=d.get("evidence", {}),
        inspection_radius=d.get("inspection_radius", 0.0), level=d.get("level"),
        loop=d.get("loop", -1), loop_s=d["loop_s"] if d.get("loop_s") is not None else float("nan"))


def inventory_to_dict(inv: Inventory) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "eps": inv.eps, "level": inv.level, "spacing": inv.spacing,
        "meta": _jsonable(inv.meta),
        "counts": inv.counts,
        "records": [record_to_dict(r) for r in inv.records],
        "pruned": [{"point": [p.x, p.y], "reason": why} for p, why in inv.pruned],
    }


def inventory_from_dict(d: dict) -> Inventory:
    if d.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"unsupported inventory schema {d.get('schema')!r}")
    inv = Inventory([record_from_dict(r) for r in d["records"]], d["eps"], d["level"],
                    d["spacing"], meta=d.get("meta", {}))
    inv.pruned = [(Point2(*p["point"]), p["reason"]) for p in d.get("pruned", [])]
    return inv


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=1, sort_keys=True, allow_nan=False) + "\n"


def write_json(obj, path) -> None:
    Path(path).write_text(dumps(obj))


def write_counts_csv(inv: Inventory, path) -> None:
    f, w = _writer(path)
    with f:
        w.writerow(["label", "count"])
        for k, v in inv.counts.items():
            w.writerow([k, v])


def format_counts(inv: Inventory) -> str:
    return "\n".join(f"{k}: {v}" for k, v in inv.counts.items())


# ---------------------------------------------------------------------------
# components

def write_pgm(cmap, path) -> None:
    """Plain PGM of component ids + 1 (0 = covered); rows run top to bottom."""
    img = cmap.labels.T[::-1]
    top = max(int(img.max()), 1)
    lines = ["P2", f"{img.shape[1]} {img.shape[0]}", str(top)]
    lines += [" ".join(map(str, row)) for row in img.tolist()]
    Path(path).write_text("\n".join(lines) + "\n")


def components_summary(cmap, eps: float) -> dict:
    return {
        "schema": SCHEMA_VERSION, "eps": eps, "h": cmap.h,
        "num_components": len(cmap), "num_bounded": len(cmap.bounded),
        "components": [{"id": c.id, "cells": len(c), "bbox": list(c.bbox), "diameter": c.diameter,
                        "bounded": c.bounded, "boundary_arc_ids": c.boundary_arc_ids}
                       for c in cmap],
    }
