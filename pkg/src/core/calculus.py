"""
Sums, rescalings and affine precompositions of relatively smooth pairs.
"""

import logging
from typing import List, Sequence, Tuple

import numpy as np
import scipy.linalg

from ..models import SubproblemResult
from .domain import Domain, Matrix, as_matrix, as_vector
from .exceptions import (
    ConfigurationError,
    DimensionMismatchError,
    DomainMismatchError,
    HessianUnavailableError,
    SubproblemUnavailableError,
)
from .oracles import ObjectiveOracle, ReferenceOracle, RelSmoothPair

logger = logging.getLogger(__name__)


class SumObjective(ObjectiveOracle):
    """Nonnegative combination sum_i w_i f_i."""

    def __init__(self, terms: Sequence[Tuple[float, ObjectiveOracle]]):
        if not terms:
            raise ConfigurationError("a sum needs at least one term")
        self.terms = list(terms)
        self.domain = self.terms[0][1].domain

    def value_and_gradient(self, x):
        total, grad = 0.0, np.zeros(self.domain.dim)
        for w, oracle in self.terms:
            v, g = oracle.value_and_gradient(x)
            total += w * v
            grad += w * g
        return total, grad

    @property
    def has_hessian(self) -> bool:
        return all(oracle.has_hessian for _, oracle in self.terms)

    def hessian(self, x):
        if not self.has_hessian:
            raise HessianUnavailableError("a term of the sum has no Hessian")
        return sum(w * oracle.hessian(x) for w, oracle in self.terms)


class ScaledReference(ReferenceOracle):
    """beta * h; the subproblem rescales the linear term by 1/beta."""

    def __init__(self, base: ReferenceOracle, beta: float):
        if not beta > 0:
            raise ConfigurationError(f"reference scale must be positive, got {beta}")
        self.base = base
        self.beta = float(beta)
        self.domain = base.domain

    def value_and_gradient(self, x):
        v, g = self.base.value_and_gradient(x)
        return self.beta * v, self.beta * g

    @property
    def has_hessian(self) -> bool:
        return self.base.has_hessian

    def hessian(self, x):
        return self.beta * self.base.hessian(x)

    def solve_subproblem(self, c):
        return self.base.solve_subproblem(np.asarray(c, dtype=np.float64) / self.beta)

    def stationarity_residual(self, c, x):
        return self.base.stationarity_residual(np.asarray(c, dtype=np.float64) / self.beta, x)

    def same_geometry(self, other):
        return self.base.same_geometry(getattr(other, "base", other))


class SumReference(ReferenceOracle):
    """sum_i w_i h_i for references of different geometry; no subproblem solver."""

    def __init__(self, terms: Sequence[Tuple[float, ReferenceOracle]]):
        self._sum = SumObjective(terms)
        self.terms = self._sum.terms
        self.domain = self._sum.domain

    def value_and_gradient(self, x):
        return self._sum.value_and_gradient(x)

    @property
    def has_hessian(self) -> bool:
        return self._sum.has_hessian

    def hessian(self, x):
        return self._sum.hessian(x)

    def solve_subproblem(self, c):
        raise SubproblemUnavailableError("sum of references with different geometry has no subproblem solver")


class ComposedObjective(ObjectiveOracle):
    """x -> f(Ax)."""

    def __init__(self, base: ObjectiveOracle, A: Matrix):
        self.base = base
        self.A = as_matrix(A, rows=base.domain.dim)
        self.domain = Domain.preimage(base.domain, self.A)

    def value_and_gradient(self, x):
        v, g = self.base.value_and_gradient(self.A @ as_vector(x, self.domain.dim))
        return v, self.A.T @ g

    @property
    def has_hessian(self) -> bool:
        return self.base.has_hessian

    def hessian(self, x):
        return self.A.T @ self.base.hessian(self.A @ x) @ self.A


class ComposedReference(ReferenceOracle):
    """x -> h(Ax); subproblems are solvable when A is square and nonsingular."""

    def __init__(self, base: ReferenceOracle, A: Matrix):
        self._composed = ComposedObjective(base, A)
        self.base = base
        self.A = self._composed.A
        self.domain = self._composed.domain
        self._lu = None
        if self.A.shape[0] == self.A.shape[1]:
            lu, piv = scipy.linalg.lu_factor(self.A, check_finite=False)
            if np.all(np.abs(np.diag(lu)) > 0):
                self._lu = (lu, piv)

    def value_and_gradient(self, x):
        return self._composed.value_and_gradient(x)

    @property
    def has_hessian(self) -> bool:
        return self._composed.has_hessian

    def hessian(self, x):
        return self._composed.hessian(x)

    def solve_subproblem(self, c):
        if self._lu is None:
            raise SubproblemUnavailableError("composed reference needs a square nonsingular map")
        # min <c, x> + h(Ax) with y = Ax is min <A^{-T} c, y> + h(y)
        c_y = scipy.linalg.lu_solve(self._lu, np.asarray(c, dtype=np.float64), trans=1)
        inner = self.base.solve_subproblem(c_y)
        x = scipy.linalg.lu_solve(self._lu, inner.x)
        return SubproblemResult(x=x, root_residual=inner.root_residual, theta=inner.theta)

    def stationarity_residual(self, c, x):
        if self._lu is None:
            raise SubproblemUnavailableError("composed reference needs a square nonsingular map")
        c_y = scipy.linalg.lu_solve(self._lu, np.asarray(c, dtype=np.float64), trans=1)
        return self.base.stationarity_residual(c_y, self.A @ x)


def _unscaled(ref: ReferenceOracle) -> Tuple[ReferenceOracle, float]:
    factor = 1.0
    while isinstance(ref, ScaledReference):
        factor *= ref.beta
        ref = ref.base
    return ref, factor


def combine_certificates(pairs: Sequence[Tuple[RelSmoothPair, float]]) -> RelSmoothPair:
    """Certificate for sum_i w_i f_i relative to sum_i w_i L_i h_i with L = 1.

    mu of the combination is min_i mu_i / L_i over positively weighted pairs.
    References of one geometry collapse into a single scaled reference so the
    combined pair keeps a subproblem solver.
    """
    if not pairs:
        raise ConfigurationError("combine_certificates needs at least one pair")
    domain = pairs[0][0].domain
    for pair, weight in pairs:
        if weight < 0:
            raise ConfigurationError(f"weights must be nonnegative, got {weight}")
        if not pair.domain.same_as(domain):
            raise DomainMismatchError("all combined pairs must share one domain")
    active: List[Tuple[RelSmoothPair, float]] = [(p, float(w)) for p, w in pairs if w > 0]
    if not active:
        raise ConfigurationError("at least one weight must be positive")

    if len(active) == 1 and active[0][1] == 1.0:
        objective = active[0][0].objective
    else:
        objective = SumObjective([(w, p.objective) for p, w in active])

    scaled = [(w * p.L, p.reference) for p, w in active]
    base, _ = _unscaled(scaled[0][1])
    if all(base.same_geometry(_unscaled(ref)[0]) for _, ref in scaled):
        beta = sum(w * _unscaled(ref)[1] for w, ref in scaled)
        reference: ReferenceOracle = ScaledReference(base, beta)
    else:
        logger.info("combining %d references of different geometry; subproblems unavailable", len(scaled))
        reference = SumReference(scaled)

    mu = min(p.mu / p.L for p, _ in active)
    return RelSmoothPair(objective, reference, 1.0, mu)


def affine_precompose(pair: RelSmoothPair, A: Matrix) -> RelSmoothPair:
    """Pair (f(Ax), h(Ax)) with unchanged L and mu."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    if A.ndim != 2 or A.shape[0] != pair.domain.dim:
        raise DimensionMismatchError(
            f"map must have {pair.domain.dim} rows to feed the pair, got shape {A.shape}"
        )
    return RelSmoothPair(ComposedObjective(pair.objective, A), ComposedReference(pair.reference, A),
                         pair.L, pair.mu)
