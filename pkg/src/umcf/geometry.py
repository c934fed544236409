"""Interfaces given by unsigned distance functions, initial fields and the truncated recovery profile.

Every shape evaluates the distance to its interface Gamma on arrays of points of
shape ``(M, d)``.  Distances on the periodic box take the minimum over the
``3^d`` neighbouring images of Gamma.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
import math
import warnings

import numpy as np

from .grid import Grid
from .potential import (profile_minus_qprime, profile_minus_qprime_d1,
                        profile_minus_qprime_d2)


class InvalidGeometry(ValueError):
    pass


def _as_points(x, dim=None):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if dim is not None and x.shape[1] != dim:
        raise InvalidGeometry(f"expected {dim}-dimensional points, got {x.shape[1]}")
    return x


def _norm(v):
    return np.sqrt(np.einsum("...i,...i->...", v, v))


def _segment_distance(x, a, b):
    ab = b - a
    L2 = float(ab @ ab)
    if L2 == 0.0:
        return _norm(x - a)
    t = np.clip((x - a) @ ab / L2, 0.0, 1.0)
    return _norm(x - a - t[:, None] * ab)


# primitives: unsigned distance to a piece of Gamma ----------------------

@dataclass(frozen=True)
class Sphere:
    """Circle (2D) or sphere (3D) boundary."""

    center: tuple
    radius: float

    def raw_distance(self, x):
        return np.abs(_norm(x - np.asarray(self.center)) - self.radius)


@dataclass(frozen=True)
class Segment:
    """Straight filament piece (a capsule of radius zero)."""

    a: tuple
    b: tuple

    def raw_distance(self, x):
        return _segment_distance(x, np.asarray(self.a, float), np.asarray(self.b, float))


@dataclass(frozen=True)
class Polyline:
    points: tuple
    closed: bool = False

    def segments(self):
        pts = [tuple(p) for p in self.points]
        pairs = list(zip(pts[:-1], pts[1:]))
        if self.closed and len(pts) > 2:
            pairs.append((pts[-1], pts[0]))
        return [Segment(a, b) for a, b in pairs]

    def raw_distance(self, x):
        segs = self.segments()
        if not segs:
            raise InvalidGeometry("polyline needs at least two points")
        return np.minimum.reduce([s.raw_distance(x) for s in segs])


@dataclass(frozen=True)
class Ring:
    """Circle of codimension 2 in 3D (center, radius, plane normal)."""

    center: tuple
    radius: float
    normal: tuple = (0.0, 0.0, 1.0)

    def raw_distance(self, x):
        n = np.asarray(self.normal, float)
        n = n / np.linalg.norm(n)
        v = x - np.asarray(self.center, float)
        z = v @ n
        rho = _norm(v - z[:, None] * n)
        return np.hypot(rho - self.radius, z)


@dataclass(frozen=True)
class SphereSystem:
    """Concentric spheres of radii ``r_i`` (annulus test configuration)."""

    center: tuple
    radii: tuple

    def raw_distance(self, x):
        rho = _norm(x - np.asarray(self.center, float))
        return np.min(np.abs(rho[:, None] - np.asarray(self.radii, float)[None, :]), axis=1)


@dataclass(frozen=True)
class Cap:
    """Part of a sphere ``{c + r w : w . axis >= cos(half_angle)}``."""

    center: tuple
    radius: float
    axis: tuple
    half_angle: float

    def raw_distance(self, x):
        c = np.asarray(self.center, float)
        a = np.asarray(self.axis, float)
        a = a / np.linalg.norm(a)
        v = x - c
        rho = _norm(v)
        along = v @ a
        perp = v - along[:, None] * a
        pn = _norm(perp)
        cos_a, sin_a = math.cos(self.half_angle), math.sin(self.half_angle)
        inside = along >= cos_a * rho
        # nearest rim point lies in the plane spanned by the axis and v
        safe = np.where(pn > 0, pn, 1.0)
        e = np.where((pn > 0)[:, None], perp / safe[:, None], _any_perp(a)[None, :])
        rim = self.radius * (cos_a * a[None, :] + sin_a * e)
        d_rim = _norm(v - rim)
        return np.where(inside, np.abs(rho - self.radius), d_rim)


def _any_perp(a):
    e = np.zeros_like(a)
    e[int(np.argmin(np.abs(a)))] = 1.0
    e = e - (e @ a) * a
    return e / np.linalg.norm(e)


@dataclass(frozen=True)
class FlatDisk:
    """Planar disk in 3D (center, normal, radius)."""

    center: tuple
    normal: tuple
    radius: float

    def raw_distance(self, x):
        n = np.asarray(self.normal, float)
        n = n / np.linalg.norm(n)
        v = x - np.asarray(self.center, float)
        z = v @ n
        p = _norm(v - z[:, None] * n)
        return np.where(p <= self.radius, np.abs(z), np.hypot(p - self.radius, z))


# solids with a signed distance (negative inside) ------------------------

@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def signed_distance(self, x):
        return _norm(x - np.asarray(self.center, float)) - self.radius


@dataclass(frozen=True)
class Capsule:
    a: tuple
    b: tuple
    radius: float

    def signed_distance(self, x):
        return _segment_distance(x, np.asarray(self.a, float),
                                 np.asarray(self.b, float)) - self.radius


# composite shapes -------------------------------------------------------

@dataclass(frozen=True)
class Union:
    """Gamma is the union of the members' interfaces."""

    members: tuple

    def raw_distance(self, x):
        if not self.members:
            raise InvalidGeometry("empty union")
        return np.minimum.reduce([m.raw_distance(x) for m in self.members])


@dataclass(frozen=True)
class SolidBoundary:
    """Gamma is the boundary of a union of solids.

    The union's signed distance is the minimum of member signed distances
    (exact outside, a lower bound in magnitude deep inside concave corners).
    """

    solids: tuple

    def signed_distance(self, x):
        if not self.solids:
            raise InvalidGeometry("empty solid union")
        return np.minimum.reduce([s.signed_distance(x) for s in self.solids])


def dumbbell(center_a, center_b, ball_radius, neck_radius) -> SolidBoundary:
    """Two balls joined by a coaxial cylinder of smaller radius."""
    if not 0 < neck_radius < ball_radius:
        raise InvalidGeometry("dumbbell needs 0 < neck_radius < ball_radius")
    return SolidBoundary((Ball(tuple(center_a), ball_radius),
                          Ball(tuple(center_b), ball_radius),
                          Capsule(tuple(center_a), tuple(center_b), neck_radius)))


def _angle(v):
    return math.atan2(v[1], v[0])


def _arc(center, radius, theta0, theta1) -> Cap:
    """Counterclockwise circular arc from ``theta0`` to ``theta1``."""
    span = (theta1 - theta0) % (2 * math.pi)
    mid = theta0 + span / 2
    return Cap(tuple(center), radius, (math.cos(mid), math.sin(mid)), span / 2)


def _circle_intersections(c1, r1, c2, r2):
    c1, c2 = np.asarray(c1, float), np.asarray(c2, float)
    d = float(np.linalg.norm(c2 - c1))
    if not abs(r1 - r2) < d < r1 + r2:
        raise InvalidGeometry("glued balls must overlap without nesting")
    a = (d * d + r1 * r1 - r2 * r2) / (2 * d)
    h = math.sqrt(r1 * r1 - a * a)
    e = (c2 - c1) / d
    m = c1 + a * e
    perp = np.array([-e[1], e[0]])
    return m + h * perp, m - h * perp, m, h, e


def glued_balls(centers, radii) -> Union:
    """Clusters of two (2D or 3D) or three (2D) overlapping balls.

    Gamma consists of the outer boundary of the cluster plus the interior
    walls separating the balls, so it carries triple junctions where walls
    meet the outer boundary.
    """
    centers = [np.asarray(c, float) for c in centers]
    radii = [float(r) for r in radii]
    dim = centers[0].size
    if len(centers) == 2:
        c1, c2 = centers
        r1, r2 = radii
        d = float(np.linalg.norm(c2 - c1))
        if not abs(r1 - r2) < d < r1 + r2:
            raise InvalidGeometry("glued balls must overlap without nesting")
        a = (d * d + r1 * r1 - r2 * r2) / (2 * d)
        h = math.sqrt(r1 * r1 - a * a)
        e = (c2 - c1) / d
        # each outer cap is centered on the direction pointing away from the other ball
        ang1 = math.pi - math.acos(a / r1)
        ang2 = math.pi - math.acos((d - a) / r2)
        caps = (Cap(tuple(c1), r1, tuple(-e), ang1), Cap(tuple(c2), r2, tuple(e), ang2))
        m = c1 + a * e
        if dim == 2:
            perp = np.array([-e[1], e[0]])
            wall = Segment(tuple(m + h * perp), tuple(m - h * perp))
        elif dim == 3:
            wall = FlatDisk(tuple(m), tuple(e), h)
        else:
            raise InvalidGeometry("glued balls need dimension 2 or 3")
        return Union(caps + (wall,))
    if len(centers) == 3 and dim == 2:
        # radical center: equal power w.r.t. all three circles
        A = np.array([2 * (centers[1] - centers[0]), 2 * (centers[2] - centers[0])])
        rhs = np.array([
            centers[1] @ centers[1] - centers[0] @ centers[0] - radii[1] ** 2 + radii[0] ** 2,
            centers[2] @ centers[2] - centers[0] @ centers[0] - radii[2] ** 2 + radii[0] ** 2,
        ])
        rc = np.linalg.solve(A, rhs)
        outer_pts = {}
        walls = []
        for i, j in ((0, 1), (1, 2), (2, 0)):
            k = 3 - i - j
            p1, p2, *_ = _circle_intersections(centers[i], radii[i], centers[j], radii[j])
            p = p1 if np.linalg.norm(p1 - centers[k]) > radii[k] else p2
            if np.linalg.norm(p - centers[k]) <= radii[k]:
                raise InvalidGeometry("third ball covers the outer junction")
            outer_pts[(i, j)] = p
            walls.append(Segment(tuple(p), tuple(rc)))
        arcs = []
        for i in range(3):
            ends = [p for key, p in outer_pts.items() if i in key]
            t = sorted(_angle(p - centers[i]) for p in ends)
            # the outer arc is the one not containing the radical center
            mid_a = (t[0] + t[1]) / 2
            probe = centers[i] + radii[i] * np.array([math.cos(mid_a), math.sin(mid_a)])
            inside_other = any(np.linalg.norm(probe - centers[k]) < radii[k]
                               for k in range(3) if k != i)
            if inside_other:
                arcs.append(_arc(centers[i], radii[i], t[1], t[0]))
            else:
                arcs.append(_arc(centers[i], radii[i], t[0], t[1]))
        return Union(tuple(arcs) + tuple(walls))
    raise InvalidGeometry("glued balls support two balls (2D/3D) or three disks (2D)")


def _image_shifts(grid: Grid):
    return [np.array(s) * np.asarray(grid.length)
            for s in product((-1.0, 0.0, 1.0), repeat=grid.dim)]


def distance(shape, x, grid: Grid | None = None) -> np.ndarray:
    """Unsigned distance from points ``x`` to Gamma.

    With a grid, the minimum over the ``3^d`` periodic images is taken.
    """
    single = np.asarray(x).ndim == 1
    pts = _as_points(x)
    out = _periodic_distance(shape, pts, grid)
    return out[0] if single else out


def _periodic_distance(shape, pts, grid):
    if isinstance(shape, Union):
        if not shape.members:
            raise InvalidGeometry("empty union")
        return np.minimum.reduce([_periodic_distance(m, pts, grid) for m in shape.members])
    shifts = _image_shifts(grid) if grid is not None else [np.zeros(pts.shape[1])]
    if isinstance(shape, SolidBoundary):
        return np.abs(np.minimum.reduce([shape.signed_distance(pts - s) for s in shifts]))
    return np.minimum.reduce([shape.raw_distance(pts - s) for s in shifts])


def distance_field(shape, grid: Grid, chunk: int = 1 << 18) -> np.ndarray:
    pts = grid.points()
    out = np.empty(len(pts))
    for start in range(0, len(pts), chunk):
        out[start:start + chunk] = distance(shape, pts[start:start + chunk], grid)
    return out.reshape(grid.shape)


# truncated recovery profile ---------------------------------------------

@dataclass(frozen=True)
class RecoveryProfileSpec:
    """``gamma_eps``: ``-q'`` on ``|s| <= x_eps``, a cubic on ``(x_eps, 2 x_eps]``, 0 beyond.

    ``cubic`` holds the coefficients of ``p(s) = sum_k cubic[k] (s - x_eps)^k``.
    """

    eps: float
    xEps: float
    cubic: tuple

    def _poly(self, t, der=0):
        c = np.polynomial.polynomial.polyder(np.asarray(self.cubic), der) if der else \
            np.asarray(self.cubic)
        return np.polynomial.polynomial.polyval(t, c)

    def value(self, s):
        a = np.abs(np.asarray(s, dtype=float))
        x = self.xEps
        return np.where(a <= x, profile_minus_qprime(a),
                        np.where(a <= 2 * x, self._poly(a - x), 0.0))

    def d1(self, s):
        """Derivative with respect to ``s`` (odd function)."""
        s = np.asarray(s, dtype=float)
        a, x = np.abs(s), self.xEps
        g = np.where(a <= x, profile_minus_qprime_d1(a),
                     np.where(a <= 2 * x, self._poly(a - x, 1), 0.0))
        return np.sign(s) * g

    def d2(self, s):
        a = np.abs(np.asarray(s, dtype=float))
        x = self.xEps
        return np.where(a <= x, profile_minus_qprime_d2(a),
                        np.where(a <= 2 * x, self._poly(a - x, 2), 0.0))


def build_recovery_cubic(eps: float, truncation_scale: float = 1.0) -> RecoveryProfileSpec:
    """Hermite cubic with ``p(x)=-q'(x), p'(x)=-q''(x), p(2x)=0, p'(2x)=0``.

    ``x = truncation_scale * |log eps|``; the default scale 1 is the standard
    construction.
    """
    if not 0 < eps < 1:
        raise ValueError("recovery profile needs 0 < eps < 1")
    x = truncation_scale * abs(math.log(eps))
    if x <= 0:
        raise ValueError("degenerate truncation point")
    A = np.array([[1.0, 0.0, 0.0, 0.0],
                  [0.0, 1.0, 0.0, 0.0],
                  [1.0, x, x ** 2, x ** 3],
                  [0.0, 1.0, 2 * x, 3 * x ** 2]])
    rhs = np.array([profile_minus_qprime(x), profile_minus_qprime_d1(x), 0.0, 0.0])
    return RecoveryProfileSpec(eps, x, tuple(float(v) for v in np.linalg.solve(A, rhs)))


def initial_condition(shape, grid: Grid, eps: float, truncated: bool = False,
                      dist: np.ndarray | None = None) -> np.ndarray:
    """Sample ``-q'(dist/eps)`` (or ``gamma_eps(dist/eps)``) on the lattice."""
    if shape is None:
        raise InvalidGeometry("empty shape")
    if eps < 2 * max(grid.spacing):
        warnings.warn(f"eps={eps:g} resolves the interface with fewer than 2 cells",
                      RuntimeWarning, stacklevel=2)
    if dist is None:
        dist = distance_field(shape, grid)
    s = dist / eps
    if truncated:
        return np.ascontiguousarray(build_recovery_cubic(eps).value(s))
    return np.ascontiguousarray(profile_minus_qprime(s))
