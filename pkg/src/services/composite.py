"""
Convex, possibly nonsmooth terms P folded into the reference subproblem.
"""

from abc import ABC, abstractmethod

import numpy as np

from ..core.calculus import ScaledReference
from ..core.domain import Vector, as_vector
from ..core.exceptions import ConfigurationError, SubproblemUnavailableError
from ..core.oracles import ReferenceOracle
from ..models import SubproblemResult
from .references import SquaredEuclideanRef


class CompositePiece(ABC):
    """P(x) together with argmin over Q of <c, x> + weight * P(x) + h(x)."""

    @abstractmethod
    def value(self, x: Vector) -> float:
        """P(x)."""

    @abstractmethod
    def composite_subproblem(self, c: Vector, weight: float, reference: ReferenceOracle) -> SubproblemResult:
        """Minimize <c, x> + weight * P(x) + h(x) over the reference's domain."""


class ZeroPiece(CompositePiece):
    """P = 0."""

    def value(self, x):
        return 0.0

    def composite_subproblem(self, c, weight, reference):
        return reference.solve_subproblem(c)


class LinearPiece(CompositePiece):
    """P(x) = <q, x>; works with any reference by shifting c."""

    def __init__(self, q: Vector):
        self.q = as_vector(q)

    def value(self, x):
        return float(np.dot(self.q, x))

    def composite_subproblem(self, c, weight, reference):
        return reference.solve_subproblem(np.asarray(c, dtype=np.float64) + weight * self.q)


def soft_threshold(v: Vector, threshold: float) -> Vector:
    return np.sign(v) * np.maximum(np.abs(v) - threshold, 0.0)


class L1Piece(CompositePiece):
    """P(x) = lam * |x|_1 with (a positive multiple of) the squared Euclidean reference."""

    def __init__(self, lam: float):
        if lam < 0:
            raise ConfigurationError(f"l1 weight must be nonnegative, got {lam}")
        self.lam = float(lam)

    def value(self, x):
        return self.lam * float(np.sum(np.abs(x)))

    def composite_subproblem(self, c, weight, reference):
        beta = 1.0
        base = reference
        while isinstance(base, ScaledReference):
            beta *= base.beta
            base = base.base
        if not isinstance(base, SquaredEuclideanRef):
            raise SubproblemUnavailableError("l1 composite term needs the squared Euclidean reference")
        # argmin <c, x> + w lam |x|_1 + beta |x|^2 / 2
        c = np.asarray(c, dtype=np.float64)
        return SubproblemResult(x=soft_threshold(-c / beta, weight * self.lam / beta), root_residual=0.0)
