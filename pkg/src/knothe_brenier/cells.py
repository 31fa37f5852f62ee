"""Anisotropic Laguerre cells of a convex domain.

For the cost ``c_eps(x, y) = eps (x1 - y1)^2 + (x2 - y2)^2`` and prices
``p``, cell ``i`` is the set of points of the domain where
``c_eps(x, y_i) - p_i`` is minimal. Each pairwise boundary is a straight
line, so every cell is the domain clipped by ``N - 1`` half-planes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateAtoms, InvalidProblem
from .geometry import ConvexPolygon, HalfPlane, area, clip, contains

GAP_RTOL = 1e-6
FACET_RTOL = 1e-10


@dataclass(frozen=True)
class Atoms:
    """Target points, each carrying mass ``1/N``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, 2)
        if len(pts) == 0:
            raise InvalidProblem("at least one atom is required")
        if not np.all(np.isfinite(pts)):
            raise InvalidProblem("atom coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    def swapped(self) -> "Atoms":
        return Atoms(self.points[:, ::-1])


def metric_matrix(eps: float) -> np.ndarray:
    """``A_eps = diag(eps, 1)``."""
    return np.diag([float(eps), 1.0])


# d A_eps / d eps
METRIC_DERIVATIVE = np.diag([1.0, 0.0])


def validate_atoms(atoms: Atoms, omega: ConvexPolygon, gap_min: float | None = None,
                   axis: int = 1) -> Atoms:
    """Check that atoms lie in ``omega`` and have well separated coordinates.

    ``axis=1`` checks the second coordinate (the standard problem); the
    reflected problem of a full sweep checks ``axis=0``. Raises
    :class:`DegenerateAtoms` naming the first offending pair.
    """
    diam = omega.diameter()
    if gap_min is None:
        gap_min = GAP_RTOL * diam
    inside = contains(omega, atoms.points, tol=1e-12 * max(diam, 1.0))
    if not inside.all():
        bad = int(np.flatnonzero(~inside)[0])
        raise InvalidProblem(f"atom {bad} at {tuple(atoms.points[bad])} lies outside the domain")
    coord = atoms.points[:, axis]
    order = np.argsort(coord, kind="stable")
    gaps = np.diff(coord[order])
    if len(gaps) and gaps.min() < gap_min:
        k = int(np.argmin(gaps))
        i, j = sorted((int(order[k]), int(order[k + 1])))
        name = "second" if axis == 1 else "first"
        raise DegenerateAtoms(
            f"atoms {i} and {j} have {name} coordinates {coord[i]!r} and {coord[j]!r}, "
            f"closer than the required gap {gap_min:g}",
            pair=(i, j),
        )
    return atoms


def sample_atoms(omega: ConvexPolygon, n: int, rng: np.random.Generator,
                 gap_min: float | None = None, distinct_first: bool = False,
                 max_tries: int = 10_000) -> Atoms:
    """Draw ``n`` uniform atoms in ``omega`` until the gap invariants hold."""
    if gap_min is None:
        gap_min = GAP_RTOL * omega.diameter()
    xmin, ymin, xmax, ymax = omega.bounds()
    for _ in range(max_tries):
        pts = []
        while len(pts) < n:
            cand = rng.uniform((xmin, ymin), (xmax, ymax), size=(2 * n, 2))
            pts.extend(cand[contains(omega, cand)])
        atoms = Atoms(np.array(pts[:n]))
        try:
            validate_atoms(atoms, omega, gap_min, axis=1)
            if distinct_first:
                validate_atoms(atoms, omega, gap_min, axis=0)
        except DegenerateAtoms:
            continue
        return atoms
    raise RuntimeError("could not draw well separated atoms")


def bisector(i: int, j: int, atoms: Atoms, eps: float, prices: np.ndarray) -> HalfPlane:
    """Half-plane where atom ``i`` is at least as cheap as atom ``j``.

    ``2 A (y_j - y_i) . x <= A y_j . y_j - A y_i . y_i - p_j + p_i``
    """
    if i == j:
        raise ValueError("bisector needs two distinct atoms")
    a = np.array([float(eps), 1.0])
    yi, yj = atoms.points[i], atoms.points[j]
    normal = 2.0 * a * (yj - yi)
    offset = float(a @ (yj * yj) - a @ (yi * yi) - prices[j] + prices[i])
    return HalfPlane(normal, offset, label=j)


@dataclass(frozen=True)
class Facet:
    """Common side of cells ``i`` and ``j``; ``endpoints`` is ``(x-, x+)``."""

    i: int
    j: int
    length: float
    endpoints: tuple


@dataclass(frozen=True)
class CellComplex:
    cells: tuple
    areas: np.ndarray
    facets: tuple
    eps: float
    prices: np.ndarray
    omega: ConvexPolygon

    @property
    def n(self) -> int:
        return len(self.cells)

    @property
    def total_area(self) -> float:
        return area(self.omega)

    def facet_map(self) -> dict:
        return {(f.i, f.j): f for f in self.facets}

    def neighbors(self, i: int) -> list:
        return sorted(f.j for f in self.facets if f.i == i)


def build(atoms: Atoms, eps: float, prices: Sequence[float], omega: ConvexPolygon) -> CellComplex:
    """Construct all cells, their areas and their shared facets."""
    prices = np.array(prices, dtype=float)
    n = len(atoms)
    if prices.shape != (n,):
        raise ValueError(f"expected {n} prices, got shape {prices.shape}")
    diam = omega.diameter()
    merge_tol = 1e-10 * diam
    facet_tol = FACET_RTOL * diam

    cells = []
    for i in range(n):
        cell = omega
        # nearer atoms first: the cell shrinks quickly and later clips are cheap
        others = np.argsort(np.abs(atoms.points[:, 1] - atoms.points[i, 1]))
        for j in others:
            j = int(j)
            if j == i:
                continue
            cell = clip(cell, bisector(i, j, atoms, eps, prices), merge_tol)
            if cell.is_empty:
                break
        cells.append(cell)
    areas = np.array([area(c) for c in cells])

    sides = {}
    for i, cell in enumerate(cells):
        for a, b, lab in cell.edges():
            if lab >= 0:
                sides[(i, lab)] = (a, b)
    facets = []
    for (i, j), (a, b) in sides.items():
        # a pair seen from both cells is taken from the lower index
        if i > j and (j, i) in sides:
            continue
        length = float(np.hypot(*(b - a)))
        if length <= facet_tol:
            continue
        a = a.copy()
        b = b.copy()
        facets.append(Facet(i, j, length, (a, b)))
        facets.append(Facet(j, i, length, (b, a)))
    facets.sort(key=lambda f: (f.i, f.j))
    return CellComplex(tuple(cells), areas, tuple(facets), float(eps), prices, omega)


def in_O(cx: CellComplex, n: int | None = None) -> bool:
    """True iff every area lies strictly in ``(|Omega|/(2N), 2|Omega|/N)``."""
    n = cx.n if n is None else n
    target = cx.total_area / n
    return bool(np.all(cx.areas > 0.5 * target) and np.all(cx.areas < 2.0 * target))


def assign(points: np.ndarray, atoms: Atoms, eps: float, prices: Sequence[float]) -> np.ndarray:
    """Index of the cheapest atom for each point (ties to the lowest index)."""
    pts = np.atleast_2d(points)
    y = atoms.points
    cost = eps * (pts[:, None, 0] - y[None, :, 0]) ** 2 + (pts[:, None, 1] - y[None, :, 1]) ** 2
    return np.argmin(cost - np.asarray(prices)[None, :], axis=1)
