"""Explicit Euler continuation of the optimal prices from eps = 0 to eps = 1.

Differentiating the optimality condition in eps gives

    M(p, eps) dp/deps = d/deps grad_p Phi(p, eps),

with ``M = -D^2_pp Phi`` reduced to atoms ``1..N-1``. Starting from the
strip prices at eps = 0, each step builds the cells, assembles ``M`` and the
right-hand side, solves by conjugate gradients and moves the prices.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import dual
from .cells import Atoms, CellComplex, build, in_O, validate_atoms
from .errors import ExitedO, LinearSolveFailure
from .geometry import ConvexPolygon, first_moments
from .knothe import initial_prices

log = logging.getLogger(__name__)

STANDARD = "standard"
FULL_SWEEP = "full_sweep"


def cg_solve(m: np.ndarray, rhs: np.ndarray, tol: float = 1e-12,
             return_info: bool = False, seed: int = 0):
    """Solve ``m z = rhs`` for symmetric positive definite ``m`` by conjugate gradients.

    Iterates until ``|m z - rhs| <= tol |rhs|``. In exact arithmetic this
    takes at most ``k = len(rhs)`` iterations. If the residual target is not
    met by then, or a direction of nonpositive curvature shows up, the
    iteration restarts once from a slightly jittered iterate. More than
    ``3k`` iterations in total raise :class:`LinearSolveFailure`.

    With ``return_info`` the result is ``(z, iterations)``.
    """
    m = np.atleast_2d(np.asarray(m, dtype=float))
    b = np.asarray(rhs, dtype=float).reshape(-1)
    k = len(b)
    bnorm = float(np.linalg.norm(b))
    z = np.zeros(k)
    if k == 0 or bnorm == 0.0:
        return (z, 0) if return_info else z
    target = tol * bnorm
    budget = 3 * k
    restarted = False
    it = 0
    r = b.copy()
    d = r.copy()
    rr = float(r @ r)
    since_start = 0
    while True:
        if np.sqrt(rr) <= target:
            break
        md = m @ d
        curv = float(d @ md)
        stalled = curv <= 0.0 or since_start >= k
        if stalled:
            if restarted or it >= budget:
                raise LinearSolveFailure(
                    f"CG residual {np.sqrt(rr) / bnorm:.3e} after {it} iterations")
            restarted = True
            rng = np.random.default_rng(seed)
            z = z + 1e-8 * (np.abs(z).max() + 1.0) * rng.standard_normal(k)
            r = b - m @ z
            d = r.copy()
            rr = float(r @ r)
            since_start = 0
            continue
        if it >= budget:
            raise LinearSolveFailure(
                f"CG residual {np.sqrt(rr) / bnorm:.3e} after {it} iterations")
        alpha = rr / curv
        z = z + alpha * d
        r = r - alpha * md
        rr_new = float(r @ r)
        d = r + (rr_new / rr) * d
        rr = rr_new
        it += 1
        since_start += 1
    return (z, it) if return_info else z


@dataclass(frozen=True)
class Schedule:
    kind: str = STANDARD
    steps: int = 500

    def __post_init__(self):
        if self.kind not in (STANDARD, FULL_SWEEP):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if int(self.steps) < 1:
            raise ValueError("steps must be a positive integer")


@dataclass
class Sample:
    """State recorded at one value of eps.

    ``eps`` and ``prices`` live in the frame named by ``frame``; in the
    ``reflected`` frame the coordinates are swapped. ``ratio`` is the weight
    of the first original coordinate relative to the second, so it runs
    from 0 (horizontal strips) through 1 to infinity (vertical strips).
    ``correlation`` is always in original coordinates.
    """

    eps: float
    prices: np.ndarray
    areas: np.ndarray
    correlation: tuple
    min_eig: float
    frame: str = STANDARD

    @property
    def ratio(self) -> float:
        if self.frame == STANDARD:
            return self.eps
        return np.inf if self.eps == 0 else 1.0 / self.eps


@dataclass
class Trajectory:
    samples: list = field(default_factory=list)
    status: str = "completed"
    failure_step: int | None = None
    message: str = ""

    @property
    def completed(self) -> bool:
        return self.status == "completed"

    @property
    def eps(self) -> np.ndarray:
        return np.array([s.eps for s in self.samples])

    def final(self) -> Sample:
        return self.samples[-1]


def correlation(cx: CellComplex, atoms: Atoms) -> tuple[float, float]:
    """``(int x1 y1 dgamma, int x2 y2 dgamma)`` for the plan sending cell i to y_i.

    The source is the uniform probability on the domain.
    """
    total = cx.total_area
    z1 = z2 = 0.0
    for i, cell in enumerate(cx.cells):
        m1, m2 = first_moments(cell)
        z1 += atoms.points[i, 0] * m1
        z2 += atoms.points[i, 1] * m2
    return z1 / total, z2 / total


def make_sample(cx: CellComplex, atoms: Atoms, frame: str = STANDARD) -> Sample:
    z = correlation(cx, atoms)
    if frame != STANDARD:
        z = (z[1], z[0])
    m = dual.hessian(cx, atoms)
    return Sample(cx.eps, cx.prices.copy(), cx.areas.copy(), z,
                  dual.min_eigenvalue(m), frame)


def velocity(cx: CellComplex, atoms: Atoms) -> np.ndarray:
    """``dp/deps`` at the built cells (atom 0 component is zero)."""
    n = cx.n
    v = np.zeros(n)
    if n > 1:
        v[1:] = cg_solve(dual.hessian(cx, atoms), dual.mixed_derivative(cx, atoms))
    return v


def euler_step(prices: np.ndarray, eps: float, h: float, atoms: Atoms,
               omega: ConvexPolygon, cx: CellComplex | None = None):
    """One explicit Euler step; returns ``(new_prices, eps + h)``.

    ``h`` may be negative. Raises :class:`ExitedO` if the current cells
    leave the area band.
    """
    if cx is None:
        cx = build(atoms, eps, prices, omega)
    if not in_O(cx, len(atoms)):
        raise ExitedO(f"cell areas left the admissible band at eps={eps:.6g}")
    p = np.asarray(prices, dtype=float) + h * velocity(cx, atoms)
    p[0] = 0.0
    return p, eps + h


def integrate(atoms: Atoms, omega: ConvexPolygon, p0: np.ndarray, eps_grid: np.ndarray,
              traj: Trajectory, frame: str = STANDARD, step_offset: int = 0,
              project: Callable | None = None, project_every: int = 0) -> np.ndarray | None:
    """March the prices along ``eps_grid`` appending samples to ``traj``.

    Returns the final prices, or ``None`` if the run stopped early (the
    status of ``traj`` then says why).
    """
    p = np.array(p0, dtype=float)
    last = len(eps_grid) - 1
    for k, eps in enumerate(eps_grid):
        cx = build(atoms, eps, p, omega)
        if not in_O(cx, len(atoms)):
            traj.status = "exited_O"
            traj.failure_step = step_offset + k
            traj.message = f"cell areas left the admissible band at eps={eps:.6g} ({frame} frame)"
            log.warning(traj.message)
            return None
        try:
            traj.samples.append(make_sample(cx, atoms, frame))
            if k == last:
                break
            h = eps_grid[k + 1] - eps
            p, _ = euler_step(p, eps, h, atoms, omega, cx=cx)
        except LinearSolveFailure as exc:
            traj.status = "linear_solve_failure"
            traj.failure_step = step_offset + k
            traj.message = str(exc)
            log.warning("linear solve failed at eps=%.6g: %s", eps, exc)
            return None
        if project is not None and project_every and (k + 1) % project_every == 0:
            p = project(p, eps_grid[k + 1])
    return p


def _projector(atoms: Atoms, omega: ConvexPolygon) -> Callable:
    from .oracle import solve_fixed_eps

    def project(p, eps):
        return solve_fixed_eps(atoms, omega, eps, p_init=p).prices
    return project


def run(atoms: Atoms, omega: ConvexPolygon, schedule: Schedule,
        project_every: int = 0) -> Trajectory:
    """Integrate the price ODE over the whole schedule.

    ``standard`` runs eps from 0 to 1 in ``steps`` equal steps. ``full_sweep``
    continues from the eps = 1 prices in the reflected frame (coordinates
    swapped) down to eps = 0 there, which is the vertical-strip end.
    With ``project_every = k > 0`` the prices are re-solved exactly every
    ``k`` steps.
    """
    validate_atoms(atoms, omega)
    if schedule.kind == FULL_SWEEP:
        validate_atoms(atoms, omega, axis=0)
    n = int(schedule.steps)
    project = _projector(atoms, omega) if project_every else None
    traj = Trajectory()
    grid = np.arange(n + 1) / n
    p = integrate(atoms, omega, initial_prices(atoms, omega), grid, traj,
                  project=project, project_every=project_every)
    if p is None or schedule.kind == STANDARD:
        return traj

    # at eps = 1 both frames carry the same cost, so the prices carry over
    r_atoms, r_omega = atoms.swapped(), omega.swapped()
    project = _projector(r_atoms, r_omega) if project_every else None
    back = grid[::-1]
    before = len(traj.samples)
    integrate(r_atoms, r_omega, p, back, traj, frame="reflected", step_offset=n,
              project=project, project_every=project_every)
    # the eps = 1 state is already recorded by the standard half
    if len(traj.samples) > before:
        del traj.samples[before]
    return traj


def max_relative_area_error(areas: np.ndarray, total: float) -> float:
    target = total / len(areas)
    return float(np.abs((np.asarray(areas) - target) / target).max())


def relative_area_errors(areas: np.ndarray, total: float) -> np.ndarray:
    target = total / len(areas)
    return (np.asarray(areas) - target) / target
