"""
Vectors and feasible sets.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, TypeAlias

import numpy as np
from numpy.typing import NDArray

from .config import Config
from .exceptions import ConfigurationError, DimensionMismatchError, DomainViolationError

Vector: TypeAlias = NDArray[np.float64]
Matrix: TypeAlias = NDArray[np.float64]


def as_vector(x, dim: Optional[int] = None) -> Vector:
    """Coerce to a finite 1-D float64 array, optionally of a fixed length."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if dim is not None and v.size != dim:
        raise DimensionMismatchError(f"expected dimension {dim}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise DomainViolationError("vector has non-finite entries")
    return v


def as_matrix(M, rows: Optional[int] = None, cols: Optional[int] = None) -> Matrix:
    """Coerce to a finite 2-D float64 array."""
    A = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if A.ndim != 2:
        raise DimensionMismatchError(f"expected a matrix, got shape {A.shape}")
    if rows is not None and A.shape[0] != rows:
        raise DimensionMismatchError(f"expected {rows} rows, got {A.shape[0]}")
    if cols is not None and A.shape[1] != cols:
        raise DimensionMismatchError(f"expected {cols} columns, got {A.shape[1]}")
    if not np.all(np.isfinite(A)):
        raise DomainViolationError("matrix has non-finite entries")
    return A


class DomainKind(str, Enum):
    ALL_SPACE = "all-space"
    UNIT_SIMPLEX = "unit-simplex"
    OPEN_BOX = "open-box"
    POSITIVE_ORTHANT = "positive-orthant"
    AFFINE_PREIMAGE = "affine-preimage"


@dataclass(frozen=True, eq=False)
class Domain:
    """Feasible set Q with deterministic membership and interior tests.

    The box is (0, u]^n; its interior test keeps the upper face because
    every box reference is differentiable there and the box subproblem
    clamps coordinates to u. The simplex interior is its relative interior.
    An affine preimage {x : Ax in base} is used by precomposed pairs.
    """
    kind: DomainKind
    dim: int
    upper: Optional[float] = None
    base: Optional["Domain"] = None
    transform: Optional[Matrix] = None

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError("domain dimension must be positive")
        if self.kind is DomainKind.OPEN_BOX and not (self.upper is not None and self.upper > 0):
            raise ConfigurationError("box domain needs u > 0")

    @classmethod
    def all_space(cls, dim: int) -> "Domain":
        return cls(DomainKind.ALL_SPACE, dim)

    @classmethod
    def unit_simplex(cls, dim: int) -> "Domain":
        return cls(DomainKind.UNIT_SIMPLEX, dim)

    @classmethod
    def open_box(cls, dim: int, u: float) -> "Domain":
        return cls(DomainKind.OPEN_BOX, dim, upper=float(u))

    @classmethod
    def positive_orthant(cls, dim: int) -> "Domain":
        return cls(DomainKind.POSITIVE_ORTHANT, dim)

    @classmethod
    def preimage(cls, base: "Domain", A: Matrix) -> "Domain":
        """Domain {x : Ax in base}; collapses to all-space over all-space."""
        A = as_matrix(A, rows=base.dim)
        if base.kind is DomainKind.ALL_SPACE:
            return cls.all_space(A.shape[1])
        return cls(DomainKind.AFFINE_PREIMAGE, A.shape[1], base=base, transform=A)

    def same_as(self, other: "Domain") -> bool:
        if self.kind is not other.kind or self.dim != other.dim or self.upper != other.upper:
            return False
        if self.kind is DomainKind.AFFINE_PREIMAGE:
            return self.base.same_as(other.base) and np.array_equal(self.transform, other.transform)
        return True

    def _check_shape(self, x: Vector) -> bool:
        return x.ndim == 1 and x.size == self.dim and bool(np.all(np.isfinite(x)))

    def contains(self, x: Vector) -> bool:
        """Membership in Q (closed where Q is closed)."""
        x = np.asarray(x, dtype=np.float64)
        if not self._check_shape(x):
            return False
        if self.kind is DomainKind.ALL_SPACE:
            return True
        if self.kind is DomainKind.UNIT_SIMPLEX:
            return bool(np.all(x >= 0) and abs(x.sum() - 1.0) <= Config.SIMPLEX_SUM_TOL)
        if self.kind is DomainKind.OPEN_BOX:
            return bool(np.all(x > 0) and np.all(x <= self.upper))
        if self.kind is DomainKind.POSITIVE_ORTHANT:
            return bool(np.all(x >= 0))
        return self.base.contains(self.transform @ x)

    def in_interior(self, x: Vector) -> bool:
        """Strict-inequality membership in int Q (relative interior for the simplex)."""
        x = np.asarray(x, dtype=np.float64)
        if not self._check_shape(x):
            return False
        if self.kind is DomainKind.ALL_SPACE:
            return True
        if self.kind is DomainKind.UNIT_SIMPLEX:
            return bool(np.all(x > 0) and abs(x.sum() - 1.0) <= Config.SIMPLEX_SUM_TOL)
        if self.kind is DomainKind.OPEN_BOX:
            return bool(np.all(x > 0) and np.all(x <= self.upper))
        if self.kind is DomainKind.POSITIVE_ORTHANT:
            return bool(np.all(x > 0))
        return self.base.in_interior(self.transform @ x)

    def require_interior(self, x, what: str = "point") -> Vector:
        v = as_vector(x, self.dim)
        if not self.in_interior(v):
            raise DomainViolationError(f"{what} is not in the interior of the {self.kind.value} domain")
        return v

    def require_member(self, x, what: str = "point") -> Vector:
        v = as_vector(x, self.dim)
        if not self.contains(v):
            raise DomainViolationError(f"{what} is not in the {self.kind.value} domain")
        return v

    def default_start(self) -> Vector:
        """Canonical interior start: e/n, u/2 e, e, or 0."""
        if self.kind is DomainKind.UNIT_SIMPLEX:
            return np.full(self.dim, 1.0 / self.dim)
        if self.kind is DomainKind.OPEN_BOX:
            return np.full(self.dim, self.upper / 2.0)
        if self.kind is DomainKind.POSITIVE_ORTHANT:
            return np.ones(self.dim)
        if self.kind is DomainKind.ALL_SPACE:
            return np.zeros(self.dim)
        raise DomainViolationError("no canonical start point for an affine preimage")
