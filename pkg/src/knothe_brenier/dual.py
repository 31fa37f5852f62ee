"""Dual functional of the semi-discrete problem and its derivatives.

With ``|Omega|`` the domain area and ``N`` atoms,

    Phi(p, eps) = |Omega|/N * sum_i p_i + int_Omega min_i (c_eps(x, y_i) - p_i) dx

so that ``dPhi/dp_i = |Omega|/N - |C_i|``. The solver only ever sees the
reduced system on indices ``1..N-1`` (atom 0 has its price pinned to 0).
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .cells import METRIC_DERIVATIVE, Atoms, CellComplex, build
from .errors import SingularPartition
from .geometry import ConvexPolygon, first_moments, second_moments


def phi_from_complex(cx: CellComplex, atoms: Atoms) -> float:
    """Exact value of the dual functional from already built cells."""
    p = cx.prices
    n = len(atoms)
    total = cx.total_area / n * float(p.sum())
    for i, cell in enumerate(cx.cells):
        if cell.is_empty:
            continue
        a = cx.areas[i]
        m1, m2 = first_moments(cell)
        s11, _, s22 = second_moments(cell)
        y1, y2 = atoms.points[i]
        c1 = s11 - 2 * y1 * m1 + y1 * y1 * a
        c2 = s22 - 2 * y2 * m2 + y2 * y2 * a
        total += cx.eps * c1 + c2 - p[i] * a
    return total


def phi(prices: Sequence[float], eps: float, atoms: Atoms, omega: ConvexPolygon) -> float:
    return phi_from_complex(build(atoms, eps, prices, omega), atoms)


def full_gradient(cx: CellComplex) -> np.ndarray:
    return cx.total_area / cx.n - cx.areas


def grad(cx: CellComplex) -> np.ndarray:
    """Gradient of Phi in p, all ``N`` components."""
    return full_gradient(cx)


def _weights(cx: CellComplex, atoms: Atoms):
    """``(i, j, l_ij / (2 |A_eps (y_j - y_i)|), facet)`` for every stored facet."""
    a = np.array([cx.eps, 1.0])
    for f in cx.facets:
        d = a * (atoms.points[f.j] - atoms.points[f.i])
        norm = float(np.hypot(d[0], d[1]))
        if norm == 0.0:
            raise SingularPartition(f"atoms {f.i} and {f.j} coincide under the metric")
        yield f.i, f.j, f.length / (2.0 * norm), f


def full_hessian(cx: CellComplex, atoms: Atoms) -> np.ndarray:
    """``-D^2_pp Phi`` on all indices (a graph Laplacian, hence singular)."""
    n = cx.n
    m = np.zeros((n, n))
    for i, j, w, _ in _weights(cx, atoms):
        m[i, j] -= w
        m[i, i] += w
    return m


def hessian(cx: CellComplex, atoms: Atoms) -> np.ndarray:
    """Reduced matrix ``M = -(D^2_pp Phi)`` with the row and column of atom 0 removed.

    Facets against atom 0 only feed the diagonal.
    """
    return full_hessian(cx, atoms)[1:, 1:]


def area_eps_derivative(cx: CellComplex, atoms: Atoms) -> np.ndarray:
    """``d|C_i|/d eps`` for every cell.

    Each side moves with normal speed ``B(y_j - y_i).(y_j + y_i - 2x) / (2|A(y_j - y_i)|)``,
    which is affine along the side, so its integral is the length times the
    average over the two endpoints.
    """
    out = np.zeros(cx.n)
    y = atoms.points
    for i, j, w, f in _weights(cx, atoms):
        xm, xp = f.endpoints
        d = METRIC_DERIVATIVE @ (y[j] - y[i])
        out[i] += w * float(d @ (y[j] + y[i] - xp - xm))
    return out


def mixed_derivative(cx: CellComplex, atoms: Atoms) -> np.ndarray:
    """``d/d eps`` of the reduced gradient, i.e. ``-d|C_i|/d eps`` for ``i >= 1``."""
    return -area_eps_derivative(cx, atoms)[1:]


def min_eigenvalue(m: np.ndarray) -> float:
    m = np.atleast_2d(np.asarray(m, dtype=float))
    if m.size == 0:
        return float("inf")
    return float(np.linalg.eigvalsh(m)[0])


def dominance_conditions(m: np.ndarray, rtol: float = 1e-12) -> tuple[bool, bool, bool]:
    """Check the three structural conditions that make ``m`` invertible.

    Returns ``(h1, h2, h3)``:

    * h1 -- every diagonal entry dominates the absolute off-diagonal row sum;
    * h2 -- at least one row is strictly dominant;
    * h3 -- the graph of nonzero off-diagonal entries is connected.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    k = len(m)
    diag = np.diag(m)
    off = np.abs(m).sum(axis=1) - np.abs(diag)
    slack = diag - off
    scale = rtol * max(float(np.abs(m).max()), 1.0)
    h1 = bool(np.all(slack >= -scale))
    h2 = bool(np.any(slack > scale))
    seen = {0}
    stack = [0]
    while stack:
        i = stack.pop()
        for j in np.flatnonzero(m[i] != 0):
            j = int(j)
            if j != i and j not in seen:
                seen.add(j)
                stack.append(j)
    h3 = len(seen) == k
    return h1, h2, h3


def counterexample_matrix(eps: float) -> np.ndarray:
    """3x3 matrix satisfying the dominance conditions with determinant ``2 eps (1 - eps)``."""
    return np.array([
        [1.0, -eps, 0.0],
        [-eps, 1.0, -(1.0 - eps)],
        [0.0, -(1.0 - eps), 1.0],
    ])


def adjacency_connected(cx: CellComplex) -> bool:
    """Whether the facet graph on all cells, atom 0 included, is connected.

    This is the form of the connectivity condition that survives removing
    atom 0: each component of the reduced matrix then touches atom 0 and so
    owns a strictly dominant row.
    """
    adj = {i: set() for i in range(cx.n)}
    for f in cx.facets:
        adj[f.i].add(f.j)
    seen = {0}
    stack = [0]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    return len(seen) == cx.n
