"""Semi-discrete optimal transport maps between the Knothe and Brenier limits.

The cost ``eps (x1 - y1)^2 + (x2 - y2)^2`` interpolates between the
Knothe-Rosenblatt rearrangement (``eps = 0``) and the Brenier map
(``eps = 1``). Optimal prices are followed along ``eps`` by integrating an
ODE; a fixed-``eps`` Newton solver serves as reference.
"""
from .cells import Atoms, CellComplex, Facet, bisector, build, in_O, sample_atoms, validate_atoms
from .continuation import Schedule, Trajectory, cg_solve, euler_step, run
from .dual import grad, hessian, min_eigenvalue, mixed_derivative, phi
from .errors import (DegenerateAtoms, ExitedO, InvalidProblem, LinearSolveFailure,
                     NoConvergence, SingularPartition)
from .geometry import ConvexPolygon, HalfPlane, area, clip, first_moments, unit_square
from .knothe import GaussianSpec, gaussian_T_eps, initial_prices, knothe_assignment, strip_heights
from .oracle import knothe_limit_check, solve_fixed_eps

__version__ = "0.1.0"
