"""Exception types shared across the workbench."""

from __future__ import annotations


class DimensionMismatch(ValueError):
    """Operands live on different complex dimensions or grids."""


class PositivityLoss(RuntimeError):
    """A metric or candidate metric stopped being positive definite.

    Carries the offending point (grid index or coordinate tuple) and the
    smallest eigenvalue seen there, when known.
    """

    def __init__(self, message: str, point=None, min_eigenvalue=None, epsilon=None):
        super().__init__(message)
        self.point = point
        self.min_eigenvalue = min_eigenvalue
        self.epsilon = epsilon


class NonConvergence(RuntimeError):
    """An iterative solve stopped without meeting its tolerance."""

    def __init__(self, message: str, residual=None, steps=None, epsilon=None):
        super().__init__(message)
        self.residual = residual
        self.steps = steps
        self.epsilon = epsilon
