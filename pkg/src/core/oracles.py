"""
Oracle contracts, the (objective, reference, L, mu) bundle and the Bregman distance.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Tuple

import numpy as np

from ..models import SubproblemResult
from .config import Config
from .domain import Domain, Matrix, Vector
from .exceptions import (
    ConfigurationError,
    DomainMismatchError,
    HessianUnavailableError,
    NumericalError,
    SubproblemUnavailableError,
)

logger = logging.getLogger(__name__)


class ObjectiveOracle(ABC):
    """Differentiable convex function on the interior of a domain."""

    domain: Domain

    @abstractmethod
    def value_and_gradient(self, x: Vector) -> Tuple[float, Vector]:
        """Return f(x) and the gradient at x."""

    def value(self, x: Vector) -> float:
        return self.value_and_gradient(x)[0]

    def gradient(self, x: Vector) -> Vector:
        return self.value_and_gradient(x)[1]

    def __call__(self, x: Vector) -> float:
        return self.value(x)

    @property
    def has_hessian(self) -> bool:
        return False

    def hessian(self, x: Vector) -> Matrix:
        raise HessianUnavailableError(f"{type(self).__name__} has no analytic Hessian")


class ReferenceOracle(ObjectiveOracle):
    """Reference function h with a solver for min <c, x> + h(x) over Q."""

    @abstractmethod
    def solve_subproblem(self, c: Vector) -> SubproblemResult:
        """Minimize <c, x> + h(x) over the domain."""

    def subproblem(self, c: Vector) -> Vector:
        return self.solve_subproblem(c).x

    def stationarity_residual(self, c: Vector, x: Vector) -> float:
        """First-order optimality residual of x for the linear term c."""
        raise SubproblemUnavailableError(f"{type(self).__name__} defines no stationarity residual")

    def center(self) -> Vector:
        """The h-center argmin over Q of h."""
        return self.subproblem(np.zeros(self.domain.dim))

    def normalize_at(self, x0: Vector) -> "ShiftedReference":
        """Same reference shifted by a constant so that h(x0) = 0."""
        return ShiftedReference(self, self.value(x0))

    def same_geometry(self, other: "ReferenceOracle") -> bool:
        """True when other is a positive multiple of this reference."""
        return other is self


class ShiftedReference(ReferenceOracle):
    """h - offset; Bregman distances, gradients and subproblems are unchanged."""

    def __init__(self, base: ReferenceOracle, offset: float):
        self.base = base
        self.offset = float(offset)
        self.domain = base.domain

    def value_and_gradient(self, x):
        v, g = self.base.value_and_gradient(x)
        return v - self.offset, g

    @property
    def has_hessian(self) -> bool:
        return self.base.has_hessian

    def hessian(self, x):
        return self.base.hessian(x)

    def solve_subproblem(self, c):
        return self.base.solve_subproblem(c)

    def stationarity_residual(self, c, x):
        return self.base.stationarity_residual(c, x)

    def same_geometry(self, other):
        return self.base.same_geometry(getattr(other, "base", other))


@dataclass(frozen=True)
class RelSmoothPair:
    """Objective f that is L-smooth and mu-strongly convex relative to reference h."""
    objective: ObjectiveOracle
    reference: ReferenceOracle
    L: float
    mu: float = 0.0

    def __post_init__(self):
        if not self.L > 0:
            raise ConfigurationError(f"L must be positive, got {self.L}")
        if not 0 <= self.mu <= self.L:
            raise ConfigurationError(f"mu must satisfy 0 <= mu <= L, got mu={self.mu}, L={self.L}")
        if not self.objective.domain.same_as(self.reference.domain):
            raise DomainMismatchError(
                f"objective domain {self.objective.domain.kind.value}/{self.objective.domain.dim} "
                f"differs from reference domain {self.reference.domain.kind.value}/{self.reference.domain.dim}"
            )

    @property
    def domain(self) -> Domain:
        return self.reference.domain

    def with_constants(self, L: float, mu: float) -> "RelSmoothPair":
        return replace(self, L=L, mu=mu)


def bregman_distance(ref: ReferenceOracle, y: Vector, x: Vector) -> float:
    """D_h(y, x) = h(y) - h(x) - <grad h(x), y - x>, clamped at 0 within round-off."""
    x = ref.domain.require_interior(x, "Bregman base point")
    y = ref.domain.require_member(y, "Bregman target point")
    if np.array_equal(x, y):
        return 0.0
    hx, gx = ref.value_and_gradient(x)
    with np.errstate(divide="ignore"):
        hy = ref.value(y)
    d = hy - hx - float(np.dot(gx, y - x))
    if d < 0:
        slack = Config.BREGMAN_SLACK * (1.0 + abs(hy) + abs(hx))
        if -d > slack:
            raise NumericalError(f"Bregman distance {d:.3e} is negative beyond round-off slack {slack:.3e}")
        return 0.0
    return float(d)
