"""Exception and warning types shared across the package."""

from __future__ import annotations

import numpy as np


class PreconditionError(ValueError):
    """An input violates a structural precondition (Hermiticity, unitarity, ...)."""


class DimensionError(ValueError):
    """Array or parameter-list sizes are incompatible."""


class DomainError(ValueError):
    """A point lies outside the domain where a map is defined."""


class BranchSingularError(DomainError):
    """A coordinate map is evaluated on (or too close to) its singular set.

    ``coordinate`` names the ill-defined output coordinate and ``limits``
    holds the limiting values that do exist (possibly empty).
    """

    def __init__(self, message: str, coordinate: str, limits: dict | None = None):
        super().__init__(message)
        self.coordinate = coordinate
        self.limits = dict(limits or {})


class SingularFisherError(ArithmeticError):
    """The QFI matrix is singular or too close to singular to invert."""

    def __init__(self, det: float, null_direction: np.ndarray):
        self.det = float(det)
        self.null_direction = np.asarray(null_direction, dtype=float)
        super().__init__(
            f"singular QFI matrix: det = {self.det:.3e}, "
            f"null direction = {np.array2string(self.null_direction, precision=6)}"
        )


class SeriesConvergenceError(RuntimeError):
    """A truncated series was refused because it would not converge."""


class DomainWarning(UserWarning):
    """Evaluation close to a coordinate singularity; limiting formulas used."""


class ConvergenceWarning(UserWarning):
    """A numerical oracle produced a low-quality result."""
