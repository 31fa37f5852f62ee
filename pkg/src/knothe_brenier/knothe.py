"""The eps = 0 end of the homotopy: horizontal strips and the Knothe map.

At ``eps = 0`` the cost only sees second coordinates, so the optimal cells
are horizontal strips of equal area stacked in the order of the atoms'
second coordinates. This module also carries the closed-form Gaussian
family ``T_eps``, used purely as an analytic cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .cells import Atoms, validate_atoms
from .geometry import ConvexPolygon, HalfPlane, area, clip


def knothe_assignment(atoms: Atoms) -> np.ndarray:
    """Atom index of each strip, bottom strip first."""
    return np.argsort(atoms.points[:, 1], kind="stable")


def area_below(omega: ConvexPolygon, height: float) -> float:
    return area(clip(omega, HalfPlane(np.array([0.0, 1.0]), height)))


def strip_heights(omega: ConvexPolygon, n: int, atol: float = 1e-12) -> np.ndarray:
    """Heights ``h_1 < ... < h_{n-1}`` cutting ``omega`` into ``n`` equal-area strips."""
    if n < 1:
        raise ValueError("need at least one strip")
    _, lo, _, hi = omega.bounds()
    total = area(omega)
    heights = []
    for k in range(1, n):
        target = k * total / n
        h = brentq(lambda t: area_below(omega, t) - target, lo, hi,
                   xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        if abs(area_below(omega, h) - target) > atol * max(total, 1.0):
            raise RuntimeError(f"strip boundary {k} did not converge")
        heights.append(h)
        lo = h
    return np.array(heights)


def initial_prices(atoms: Atoms, omega: ConvexPolygon) -> np.ndarray:
    """Prices whose eps = 0 cells are the equal-area horizontal strips.

    Consecutive atoms in the vertical order must be indifferent on their
    common strip boundary; the chain is then shifted so that atom 0 has
    price 0.
    """
    validate_atoms(atoms, omega)
    order = knothe_assignment(atoms)
    heights = strip_heights(omega, len(atoms))
    y2 = atoms.points[:, 1]
    p = np.zeros(len(atoms))
    for k, h in enumerate(heights):
        lower, upper = order[k], order[k + 1]
        p[upper] = p[lower] + (h - y2[upper]) ** 2 - (h - y2[lower]) ** 2
    return p - p[0]


def strips(omega: ConvexPolygon, atoms: Atoms) -> list:
    """Knothe strip of every atom, indexed like the atoms."""
    order = knothe_assignment(atoms)
    heights = strip_heights(omega, len(atoms))
    bounds = [None, *heights, None]
    out = [None] * len(atoms)
    for k, i in enumerate(order):
        s = omega
        if bounds[k + 1] is not None:
            s = clip(s, HalfPlane(np.array([0.0, 1.0]), bounds[k + 1]))
        if bounds[k] is not None:
            s = clip(s, HalfPlane(np.array([0.0, -1.0]), -bounds[k]))
        out[int(i)] = s
    return out


@dataclass(frozen=True)
class GaussianSpec:
    """Target covariance ``[[a, b], [b, c]]`` for a standard normal source."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        if not (self.a > 0 and self.c > 0 and self.a * self.c - self.b**2 > 0):
            raise ValueError("covariance must be positive definite")

    @property
    def covariance(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.b, self.c]])


def gaussian_T_eps(spec: GaussianSpec, eps: float) -> np.ndarray:
    """Optimal linear map from N(0, I) to N(0, spec) for the cost weights ``(eps, 1)``."""
    a, b, c = spec.a, spec.b, spec.c
    r = np.sqrt(a * c - b * b)
    scale = 1.0 / np.sqrt(a * eps * eps + c + 2 * eps * r)
    return scale * np.array([[a * eps + r, b], [b * eps, c + eps * r]])


def gaussian_knothe(spec: GaussianSpec) -> np.ndarray:
    """The eps -> 0 limit of :func:`gaussian_T_eps`, the triangular Knothe map."""
    a, b, c = spec.a, spec.b, spec.c
    return np.array([[np.sqrt(a - b * b / c), b / np.sqrt(c)], [0.0, np.sqrt(c)]])
