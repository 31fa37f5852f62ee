"""Convex polygon primitives: half-plane clipping, areas and moments.

Polygons are stored counterclockwise. Every edge carries an integer label
naming the line it lies on, so that after a sequence of clips one can tell
which constraint produced which side of the result. Labels are opaque to
this module; :mod:`knothe_brenier.cells` uses ``j >= 0`` for the bisector
against atom ``j`` and negative values for the sides of the domain.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# |n.x - c| <= ON_LINE_RTOL * (1 + |c|) with n normalized means "on the line".
ON_LINE_RTOL = 1e-12
# vertices closer than MERGE_RTOL * diam are merged.
MERGE_RTOL = 1e-10

NO_LABEL = -(10**9)


@dataclass(frozen=True)
class HalfPlane:
    """The closed half-plane ``{x : normal . x <= offset}``."""

    normal: np.ndarray
    offset: float
    label: int = NO_LABEL

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(2)
        if not np.all(np.isfinite(n)) or np.hypot(n[0], n[1]) == 0.0:
            raise ValueError("half-plane normal must be a finite nonzero vector")
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "offset", float(self.offset))

    def normalized(self) -> "HalfPlane":
        s = float(np.hypot(self.normal[0], self.normal[1]))
        return HalfPlane(self.normal / s, self.offset / s, self.label)

    def flipped(self) -> "HalfPlane":
        """Closure of the complementary half-plane."""
        return HalfPlane(-self.normal, -self.offset, self.label)


@dataclass(frozen=True)
class ConvexPolygon:
    """Counterclockwise convex polygon with one label per edge.

    ``labels[k]`` belongs to the edge from ``vertices[k]`` to
    ``vertices[k + 1]`` (cyclically). A polygon with fewer than three
    vertices is empty.
    """

    vertices: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "vertices", v)
        labels = tuple(int(x) for x in self.labels) if len(self.labels) else (NO_LABEL,) * len(v)
        if len(labels) != len(v):
            raise ValueError("need exactly one label per edge")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_points(cls, points: Sequence, labels: Sequence[int] | None = None,
                    validate: bool = True) -> "ConvexPolygon":
        """Build a polygon from vertex coordinates in either orientation.

        Clockwise input is reversed (labels are carried along). With
        ``validate`` the vertices must be finite and form a strictly convex
        polygon, otherwise ``ValueError`` is raised.
        """
        v = np.asarray(points, dtype=float).reshape(-1, 2)
        if labels is None:
            labels = [-(k + 1) for k in range(len(v))]
        labels = list(labels)
        if len(v) >= 3 and _signed_area(v) < 0:
            # reversing vertex order: edge k (v_k -> v_k+1) becomes v_k+1 -> v_k
            v = v[::-1].copy()
            labels = labels[::-1]
            labels = labels[1:] + labels[:1]
        poly = cls(v, tuple(labels))
        if validate:
            _validate_convex(poly)
        return poly

    @property
    def is_empty(self) -> bool:
        return len(self.vertices) < 3

    def __len__(self):
        return len(self.vertices)

    def edges(self):
        """Yield ``(start, end, label)`` for every edge."""
        v = self.vertices
        n = len(v)
        for k in range(n):
            yield v[k], v[(k + 1) % n], self.labels[k]

    def diameter(self) -> float:
        if len(self.vertices) == 0:
            return 0.0
        d = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt((d**2).sum(-1).max()))

    def bounds(self):
        """``(xmin, ymin, xmax, ymax)``."""
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1])

    def swapped(self) -> "ConvexPolygon":
        """Mirror image under ``(x1, x2) -> (x2, x1)``, kept counterclockwise."""
        if self.is_empty:
            return ConvexPolygon(self.vertices[:, ::-1], self.labels)
        return ConvexPolygon.from_points(self.vertices[:, ::-1], self.labels, validate=False)


def _signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _validate_convex(poly: ConvexPolygon) -> None:
    v = poly.vertices
    if len(v) < 3:
        raise ValueError("a polygon needs at least three vertices")
    if not np.all(np.isfinite(v)):
        raise ValueError("polygon vertices must be finite")
    scale = poly.diameter()
    e = np.roll(v, -1, axis=0) - v
    if np.any(np.hypot(e[:, 0], e[:, 1]) <= MERGE_RTOL * scale):
        raise ValueError("polygon has repeated vertices")
    turn = e[:, 0] * np.roll(e[:, 1], -1) - e[:, 1] * np.roll(e[:, 0], -1)
    if np.any(turn <= ON_LINE_RTOL * scale**2):
        raise ValueError("polygon is not strictly convex")


def clip(poly: ConvexPolygon, h: HalfPlane, merge_tol: float | None = None) -> ConvexPolygon:
    """Intersect ``poly`` with the half-plane ``h``.

    The side created along the cut carries ``h.label``. Vertices within
    the on-line tolerance count as inside and are never duplicated by an
    intersection point. The result may be empty.
    """
    if poly.is_empty:
        return poly
    hn = h.normalized()
    n1, n2 = float(hn.normal[0]), float(hn.normal[1])
    c = hn.offset
    tol = ON_LINE_RTOL * (1.0 + abs(c))

    pts = poly.vertices.tolist()
    labels = poly.labels
    s = [n1 * x + n2 * y - c for x, y in pts]
    if max(s) <= tol:
        return poly
    if min(s) > tol:
        return ConvexPolygon(np.empty((0, 2)), ())

    m = len(pts)
    out_pts = []
    out_labels = []
    for k in range(m):
        a, b = pts[k], pts[(k + 1) % m]
        sa, sb = s[k], s[(k + 1) % m]
        a_in, b_in = sa <= tol, sb <= tol
        if a_in:
            if b_in:
                out_pts.append(a)
                out_labels.append(labels[k])
            elif sa >= -tol:
                # a sits on the cut line; leave along it
                out_pts.append(a)
                out_labels.append(h.label)
            else:
                t = sa / (sa - sb)
                out_pts.append(a)
                out_labels.append(labels[k])
                out_pts.append([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
                out_labels.append(h.label)
        elif b_in and sb < -tol:
            t = sa / (sa - sb)
            out_pts.append([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])])
            out_labels.append(labels[k])

    if merge_tol is None:
        merge_tol = MERGE_RTOL * poly.diameter()
    return _tidy(out_pts, out_labels, merge_tol)


def _tidy(pts: list, labels: list, merge_tol: float) -> ConvexPolygon:
    """Merge coincident vertices and straight-through vertices."""
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        m = len(pts)
        for k in range(m):
            a, b = pts[k], pts[(k + 1) % m]
            if abs(a[0] - b[0]) <= merge_tol and abs(a[1] - b[1]) <= merge_tol:
                # drop b; the zero-length edge a->b disappears
                j = (k + 1) % m
                labels[k] = labels[j]
                del pts[j]
                del labels[j]
                changed = True
                break
        if changed:
            continue
        m = len(pts)
        for k in range(m):
            if labels[k - 1] == labels[k]:
                del pts[k]
                del labels[k]
                changed = True
                break
    if len(pts) < 3:
        return ConvexPolygon(np.empty((0, 2)), ())
    return ConvexPolygon(np.array(pts), tuple(labels))


def _moment_terms(poly: ConvexPolygon):
    """Shifted coordinates and cross products used by the moment formulas."""
    v = poly.vertices
    ref = v.mean(axis=0)
    u = v - ref
    x, y = u[:, 0], u[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    return ref, x, y, xn, yn, cross


def area(poly: ConvexPolygon) -> float:
    if poly.is_empty:
        return 0.0
    _, _, _, _, _, cross = _moment_terms(poly)
    return max(0.5 * float(cross.sum()), 0.0)


def first_moments(poly: ConvexPolygon) -> tuple[float, float]:
    """Return ``(int x1 dx, int x2 dx)`` over the polygon."""
    if poly.is_empty:
        return 0.0, 0.0
    ref, x, y, xn, yn, cross = _moment_terms(poly)
    a = 0.5 * float(cross.sum())
    mx = float(((x + xn) * cross).sum()) / 6.0
    my = float(((y + yn) * cross).sum()) / 6.0
    return mx + ref[0] * a, my + ref[1] * a


def second_moments(poly: ConvexPolygon) -> tuple[float, float, float]:
    """Return ``(int x1^2, int x1 x2, int x2^2)`` over the polygon."""
    if poly.is_empty:
        return 0.0, 0.0, 0.0
    ref, x, y, xn, yn, cross = _moment_terms(poly)
    a = 0.5 * float(cross.sum())
    mx = float(((x + xn) * cross).sum()) / 6.0
    my = float(((y + yn) * cross).sum()) / 6.0
    sxx = float(((x * x + x * xn + xn * xn) * cross).sum()) / 12.0
    syy = float(((y * y + y * yn + yn * yn) * cross).sum()) / 12.0
    sxy = float(((x * yn + 2 * x * y + 2 * xn * yn + xn * y) * cross).sum()) / 24.0
    # undo the shift: int (u + r)(w + s) = int uw + s int u + r int w + r s |P|
    rx, ry = float(ref[0]), float(ref[1])
    ixx = sxx + 2 * rx * mx + rx * rx * a
    iyy = syy + 2 * ry * my + ry * ry * a
    ixy = sxy + ry * mx + rx * my + rx * ry * a
    return ixx, ixy, iyy


def contains(poly: ConvexPolygon, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Vectorized point-in-convex-polygon test (boundary counts as inside)."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    inside = np.ones(len(p), dtype=bool)
    if poly.is_empty:
        return ~inside
    for a, b, _ in poly.edges():
        e = b - a
        cr = e[0] * (p[:, 1] - a[1]) - e[1] * (p[:, 0] - a[0])
        inside &= cr >= -tol * np.hypot(e[0], e[1])
    return inside


def horizontal_slab(poly: ConvexPolygon, lo: float | None, hi: float | None) -> ConvexPolygon:
    """Part of ``poly`` with ``lo <= x2 <= hi`` (``None`` means unbounded)."""
    out = poly
    if hi is not None:
        out = clip(out, HalfPlane(np.array([0.0, 1.0]), hi))
    if lo is not None:
        out = clip(out, HalfPlane(np.array([0.0, -1.0]), -lo))
    return out


def unit_square() -> ConvexPolygon:
    return ConvexPolygon.from_points([(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)])
