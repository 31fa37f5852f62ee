"""Exceptions raised by the solver."""


class SolverError(Exception):
    """Base class for all solver failures."""


class InvalidProblem(SolverError, ValueError):
    """Domain or atoms fail validation (atom outside the domain, bad polygon)."""


class DegenerateAtoms(InvalidProblem):
    """Two atoms share (up to the gap tolerance) the coordinate used for sorting."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class SingularPartition(SolverError):
    pass


class ExitedO(SolverError):
    """A cell area left the band ``(|Omega|/2N, 2|Omega|/N)``."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class LinearSolveFailure(SolverError):
    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NoConvergence(SolverError):
    pass
