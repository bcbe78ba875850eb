"""Planar primitives: points, unit directions, arcs on S^1 and circular arcs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.spatial import cKDTree

TWO_PI = 2.0 * math.pi
ANGLE_TOL = 1e-9
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def __getitem__(self, i):
        return (self.x, self.y)[i]

    def __len__(self):
        return 2

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class UnitDir:
    ux: float
    uy: float

    def __post_init__(self):
        if abs(self.ux * self.ux + self.uy * self.uy - 1.0) > UNIT_TOL * 10:
            raise ValueError(f"not a unit vector: ({self.ux}, {self.uy})")

    def __iter__(self):
        yield self.ux
        yield self.uy

    def __getitem__(self, i):
        return (self.ux, self.uy)[i]

    def __len__(self):
        return 2

    def __neg__(self) -> "UnitDir":
        return UnitDir(-self.ux, -self.uy)

    @classmethod
    def from_vector(cls, v) -> "UnitDir":
        vx, vy = float(v[0]), float(v[1])
        n = math.hypot(vx, vy)
        if n == 0.0:
            raise ValueError("zero vector has no direction")
        return cls(vx / n, vy / n)

    @classmethod
    def from_angle(cls, theta: float) -> "UnitDir":
        return cls(math.cos(theta), math.sin(theta))

    @property
    def angle(self) -> float:
        return math.atan2(self.uy, self.ux) % TWO_PI

    def as_array(self) -> np.ndarray:
        return np.array([self.ux, self.uy])


def as_xy(p) -> np.ndarray:
    """Coerce a Point2, UnitDir or 2-sequence to a float array."""
    return np.array([float(p[0]), float(p[1])])


def ccw_angle(a, b) -> float:
    """Counter-clockwise angle from direction a to direction b, in [0, 2pi)."""
    ang = math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1])
    return ang % TWO_PI


def angle_between(a, b) -> float:
    """Unsigned angle between two directions, in [0, pi]."""
    return abs(math.atan2(a[0] * b[1] - a[1] * b[0], a[0] * b[0] + a[1] * b[1]))


class ArcKind(str, Enum):
    PROPER = "proper_arc"
    SINGLETON = "singleton"
    ANTIPODAL = "antipodal_pair"
    HALF = "half_circle"
    FULL = "full_circle"


@dataclass(frozen=True)
class GeodesicArc:
    """A closed subset of S^1.

    For ``proper_arc`` and ``half_circle`` the set is the counter-clockwise
    sweep from ``a`` to ``b``; for ``antipodal_pair`` it is ``{a, b}``.
    """

    a: UnitDir
    b: UnitDir
    kind: ArcKind

    @property
    def width(self) -> float:
        if self.kind in (ArcKind.SINGLETON, ArcKind.ANTIPODAL):
            return 0.0
        if self.kind is ArcKind.HALF:
            return math.pi
        if self.kind is ArcKind.FULL:
            return TWO_PI
        return ccw_angle(self.a, self.b)

    @property
    def endpoints(self) -> tuple[UnitDir, ...]:
        if self.kind is ArcKind.SINGLETON:
            return (self.a,)
        if self.kind is ArcKind.FULL:
            return ()
        return (self.a, self.b)

    def members(self, num: int = 33) -> list[UnitDir]:
        """Evenly spaced directions covering the arc's point set."""
        if self.kind is ArcKind.SINGLETON:
            return [self.a]
        if self.kind is ArcKind.ANTIPODAL:
            return [self.a, self.b]
        start = self.a.angle
        return [UnitDir.from_angle(start + self.width * k / (num - 1)) for k in range(num)]


def _check_unit(v) -> None:
    if abs(v[0] * v[0] + v[1] * v[1] - 1.0) > 1e-9:
        raise ValueError(f"non-unit direction ({v[0]}, {v[1]})")


def geodesic_arc(v, w, tol: float = ANGLE_TOL) -> GeodesicArc:
    """The set {a v + b w : a, b >= 0} intersected with S^1."""
    _check_unit(v)
    _check_unit(w)
    v = UnitDir.from_vector(v)
    w = UnitDir.from_vector(w)
    ang = ccw_angle(v, w)
    if ang <= tol or ang >= TWO_PI - tol:
        return GeodesicArc(v, v, ArcKind.SINGLETON)
    if abs(ang - math.pi) <= tol:
        first, second = sorted([v, w], key=lambda u: (u.angle, u.ux, u.uy))
        return GeodesicArc(first, second, ArcKind.ANTIPODAL)
    if ang < math.pi:
        return GeodesicArc(v, w, ArcKind.PROPER)
    return GeodesicArc(w, v, ArcKind.PROPER)


def half_circle(center_dir) -> GeodesicArc:
    """Closed half-circle of directions u with <u, center_dir> >= 0."""
    c = UnitDir.from_vector(center_dir)
    # start at the clockwise perpendicular, sweep pi counter-clockwise
    return GeodesicArc(UnitDir(c.uy, -c.ux), UnitDir(-c.uy, c.ux), ArcKind.HALF)


def arc_contains(arc: GeodesicArc, u, tol: float = ANGLE_TOL) -> bool:
    if arc.kind is ArcKind.FULL:
        return True
    if arc.kind is ArcKind.SINGLETON:
        return angle_between(arc.a, u) <= tol
    if arc.kind is ArcKind.ANTIPODAL:
        return angle_between(arc.a, u) <= tol or angle_between(arc.b, u) <= tol
    off = ccw_angle(arc.a, u)
    return off <= arc.width + tol or off >= TWO_PI - tol


@dataclass(frozen=True)
class CircularArc:
    """Counter-clockwise arc of a circle from theta_start to theta_end.

    theta_start lies in [0, 2pi); theta_end = theta_start + extent may exceed 2pi.
    """

    center: Point2
    radius: float
    theta_start: float
    theta_end: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        ext = self.theta_end - self.theta_start
        if not (0.0 < ext <= TWO_PI + 1e-12):
            raise ValueError(f"arc extent {ext} outside (0, 2pi]")

    @property
    def extent(self) -> float:
        return self.theta_end - self.theta_start

    @property
    def length(self) -> float:
        return self.radius * self.extent

    @property
    def is_full(self) -> bool:
        return self.extent >= TWO_PI - ANGLE_TOL

    def point_at(self, theta: float) -> np.ndarray:
        return np.array([self.center.x + self.radius * math.cos(theta),
                         self.center.y + self.radius * math.sin(theta)])

    @property
    def start_point(self) -> np.ndarray:
        return self.point_at(self.theta_start)

    @property
    def end_point(self) -> np.ndarray:
        return self.point_at(self.theta_end)


def hausdorff_distance(A, B) -> float:
    """Hausdorff distance between two finite planar samples."""
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("empty sample")
    d_ab = cKDTree(B).query(A)[0].max()
    d_ba = cKDTree(A).query(B)[0].max()
    return float(max(d_ab, d_ba))
