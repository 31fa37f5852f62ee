"""Fixed-eps solver for the dual problem, used as ground truth.

The dual functional is concave in the prices and its maximizer (with atom 0
pinned at price 0) is unique, so a damped Newton ascent on the reduced
prices converges from any start whose cells are all nonempty.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import dual
from .cells import Atoms, build, validate_atoms
from .errors import NoConvergence
from .geometry import ConvexPolygon, area, horizontal_slab
from .knothe import initial_prices, knothe_assignment, strip_heights

log = logging.getLogger(__name__)

ARMIJO = 1e-4
BACKTRACK = 0.5


@dataclass
class SolveReport:
    prices: np.ndarray
    iterations: int
    grad_norm: float
    areas: np.ndarray
    phi_history: list


def solve_fixed_eps(atoms: Atoms, omega: ConvexPolygon, eps: float,
                    p_init: np.ndarray | None = None, tol: float | None = None,
                    max_iter: int = 1000) -> SolveReport:
    """Maximize ``Phi(., eps)`` over prices with ``p_0 = 0``.

    Newton directions ``M^{-1} grad`` are damped by halving until the
    smallest cell keeps at least half of ``min(current smallest area,
    |Omega|/N)`` and the Armijo condition holds. Once the predicted ascent
    drops below the rounding level of ``Phi`` a full step is accepted if it
    reduces the gradient instead.

    Stops when the sup norm of the reduced gradient is at most ``tol``
    (default ``1e-10 |Omega|``).
    """
    n = len(atoms)
    total = area(omega)
    if tol is None:
        tol = 1e-10 * total
    if tol <= 0:
        raise ValueError("tol must be positive")
    p = np.zeros(n) if p_init is None else np.array(p_init, dtype=float)
    p = p - p[0]
    cx = build(atoms, eps, p, omega)
    history = [dual.phi_from_complex(cx, atoms)]
    if n == 1:
        return SolveReport(p, 0, 0.0, cx.areas, history)

    for it in range(max_iter + 1):
        g = dual.full_gradient(cx)[1:]
        gmax = float(np.abs(g).max())
        if gmax <= tol:
            return SolveReport(p, it, gmax, cx.areas, history)
        if it == max_iter:
            break
        m = dual.hessian(cx, atoms)
        try:
            d = np.linalg.solve(m, g)
            if not np.all(np.isfinite(d)) or d @ g <= 0:
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            d = g
        slope = float(g @ d)
        f0 = history[-1]
        floor = 0.5 * min(float(cx.areas.min()), total / n)
        noise = 64 * np.finfo(float).eps * max(abs(f0), 1.0)
        t = 1.0
        while True:
            trial = p + t * np.concatenate(([0.0], d))
            cx_t = build(atoms, eps, trial, omega)
            if cx_t.areas.min() > floor:
                f_t = dual.phi_from_complex(cx_t, atoms)
                if f_t >= f0 + ARMIJO * t * slope:
                    break
                g_t = float(np.abs(dual.full_gradient(cx_t)[1:]).max())
                if t * slope <= noise and g_t < gmax:
                    break
            t *= BACKTRACK
            if t < 1e-14:
                raise NoConvergence(f"line search failed at eps={eps:g} (iteration {it})")
        p, cx = trial, cx_t
        history.append(f_t)
    raise NoConvergence(f"no convergence at eps={eps:g} after {max_iter} iterations "
                        f"(gradient {gmax:.3e})")


def strip_deviation(cells, atoms: Atoms, omega: ConvexPolygon) -> float:
    """``sum_i |C_i sym-diff S_i| / |Omega|`` against the Knothe strips ``S_i``."""
    order = knothe_assignment(atoms)
    heights = strip_heights(omega, len(atoms))
    bounds = [None, *heights, None]
    total = area(omega)
    dev = 0.0
    for k, i in enumerate(order):
        cell = cells[int(i)]
        strip = horizontal_slab(omega, bounds[k], bounds[k + 1])
        common = horizontal_slab(cell, bounds[k], bounds[k + 1])
        dev += area(cell) + area(strip) - 2 * area(common)
    return dev / total


def knothe_limit_check(atoms: Atoms, omega: ConvexPolygon, eps_list, tol: float | None = None):
    """Solve at each eps and measure how far the cells are from the strips."""
    validate_atoms(atoms, omega)
    p0 = initial_prices(atoms, omega)
    out = []
    for eps in eps_list:
        rep = solve_fixed_eps(atoms, omega, eps, p_init=p0, tol=tol)
        cx = build(atoms, eps, rep.prices, omega)
        out.append((float(eps), strip_deviation(cx.cells, atoms, omega)))
    return out


def exact_correlation_curve(atoms: Atoms, omega: ConvexPolygon, eps_grid, tol: float | None = None):
    """Correlation points ``z(eps)`` of the exact solutions on ``eps_grid``.

    Returns ``(z, prices)`` with ``z`` of shape ``(len(eps_grid), 2)``.
    """
    from .continuation import correlation

    p = initial_prices(atoms, omega)
    zs, ps = [], []
    for eps in eps_grid:
        p = solve_fixed_eps(atoms, omega, eps, p_init=p, tol=tol).prices
        zs.append(correlation(build(atoms, eps, p, omega), atoms))
        ps.append(p)
    return np.array(zs), np.array(ps)


def correlation_shape(z: np.ndarray, eps_grid, tol: float = 1e-6) -> dict:
    """Check that the points trace a concave decreasing curve of slope ``-eps``.

    Chord slopes ``dz2/dz1`` between consecutive points must be negative and
    non-increasing (within ``tol``), and each must be within one grid
    spacing of ``-eps`` at the midpoint.
    """
    z = np.asarray(z, dtype=float)
    eps = np.asarray(eps_grid, dtype=float)
    dz = np.diff(z, axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = dz[:, 1] / dz[:, 0]
    mid = 0.5 * (eps[1:] + eps[:-1])
    spacing = np.diff(eps)
    decreasing = bool(np.all(dz[:, 0] > 0) and np.all(slopes < tol))
    concave = bool(np.all(np.diff(slopes) <= tol))
    slope_err = np.abs(slopes + mid)
    return {
        "slopes": slopes,
        "midpoints": mid,
        "decreasing": decreasing,
        "concave": concave,
        "slope_matches": bool(np.all(slope_err <= spacing)),
        "max_slope_error": float(np.nanmax(slope_err)) if np.any(np.isfinite(slope_err)) else np.nan,
    }
