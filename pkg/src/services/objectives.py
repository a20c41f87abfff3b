"""
Relatively smooth objectives with analytic gradients, and formulas for L and mu.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
from numpy.polynomial import Polynomial
from scipy.linalg.lapack import dpotrf

from ..core.config import Config
from ..core.domain import Domain, Matrix, Vector, as_matrix, as_vector
from ..core.exceptions import ConfigurationError, DimensionMismatchError, DomainViolationError, SingularMatrixError
from ..core.oracles import ObjectiveOracle
from ..models import PolynomialBound

logger = logging.getLogger(__name__)


def _cholesky_lower(M: Matrix, what: str) -> Matrix:
    """Lower Cholesky factor via LAPACK potrf; a failed pivot is reported 1-based."""
    factor, info = dpotrf(M, lower=1, clean=1)
    if info > 0:
        raise SingularMatrixError(f"{what} is not positive definite", pivot=int(info))
    if info < 0:
        raise SingularMatrixError(f"invalid argument {-info} passed to potrf")
    return factor


def _require_positive(x: Vector, n: int) -> Vector:
    x = as_vector(x, n)
    if np.any(x <= 0):
        raise DomainViolationError("objective requires strictly positive weights")
    return x


def _full_row_rank(H: Matrix) -> int:
    R = scipy.linalg.qr(H, mode="r", pivoting=True)[0]
    diag = np.abs(np.diag(R))
    threshold = Config.RANK_TOL * max(np.linalg.norm(H), np.finfo(float).tiny)
    return int(np.sum(diag > threshold))


def _solve_columns(H: Matrix, weights: Vector, what: str) -> Tuple[float, Matrix]:
    """log det(H W H^T) and K = chol^{-1} H for W = diag(weights)."""
    M = (H * weights) @ H.T
    chol = _cholesky_lower(M, what)
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    K = scipy.linalg.solve_triangular(chol, H, lower=True, check_finite=False)
    return logdet, K


def dopt_value_grad(H: Matrix, x: Vector) -> Tuple[float, Vector]:
    """f(x) = -ln det(H X H^T) and its gradient -h_j^T M^{-1} h_j from one Cholesky factor."""
    x = _require_positive(x, H.shape[1])
    logdet, K = _solve_columns(H, x, "H X H^T")
    return -logdet, -np.sum(K * K, axis=0)


def volumetric_value_grad(H: Matrix, p: int, x: Vector) -> Tuple[float, Vector]:
    """f_p(x) = ln det(H X^{-p} H^T) and its gradient -p x_j^{-1-p} h_j^T N^{-1} h_j."""
    if p < 1:
        raise ConfigurationError(f"volumetric objective needs p >= 1, got {p}")
    x = _require_positive(x, H.shape[1])
    logdet, K = _solve_columns(H, x ** (-p), "H X^-p H^T")
    return logdet, -p * x ** (-1.0 - p) * np.sum(K * K, axis=0)


def quartic_value_grad(A: Matrix, b: Vector, C: Matrix, d: Vector, E: Optional[Matrix],
                       x: Vector) -> Tuple[float, Vector]:
    """f(x) = |Ax - b|_4^4/4 + |Cx - d|^2/2 (+ |Ex|^4/4)."""
    r = A @ x - b
    q = C @ x - d
    value = 0.25 * float(np.sum(r ** 4)) + 0.5 * float(np.dot(q, q))
    grad = A.T @ r ** 3 + C.T @ q
    if E is not None:
        ex = E @ x
        sq = float(np.dot(ex, ex))
        value += 0.25 * sq * sq
        grad = grad + sq * (E.T @ ex)
    return value, grad


class DOptimalDesign(ObjectiveOracle):
    """f(x) = -ln det(H Diag(x) H^T) on the unit simplex."""

    def __init__(self, H: Matrix):
        self.H = as_matrix(H)
        self.m, self.n = self.H.shape
        if self.n < self.m + 1:
            raise ConfigurationError(f"D-optimal design needs n >= m + 1, got m={self.m}, n={self.n}")
        rank = _full_row_rank(self.H)
        if rank < self.m:
            raise SingularMatrixError(f"H has rank {rank} < m = {self.m}")
        self.domain = Domain.unit_simplex(self.n)

    def value_and_gradient(self, x):
        return dopt_value_grad(self.H, x)

    @property
    def has_hessian(self) -> bool:
        return True

    def hessian(self, x):
        x = _require_positive(x, self.n)
        _, K = _solve_columns(self.H, x, "H X H^T")
        C = K.T @ K
        return C * C

    def leverages(self, x: Vector) -> Vector:
        """kappa_j = h_j^T (H X H^T)^{-1} h_j, i.e. minus the gradient."""
        return -self.gradient(x)


class VolumetricObjective(ObjectiveOracle):
    """f_p(x) = ln det(H X^{-p} H^T) on the unit simplex."""

    def __init__(self, H: Matrix, p: int = 1):
        if p < 1:
            raise ConfigurationError(f"volumetric objective needs integer p >= 1, got {p}")
        self.H = as_matrix(H)
        self.m, self.n = self.H.shape
        self.p = int(p)
        rank = _full_row_rank(self.H)
        if rank < self.m:
            raise SingularMatrixError(f"H has rank {rank} < m = {self.m}")
        self.domain = Domain.unit_simplex(self.n)

    def value_and_gradient(self, x):
        return volumetric_value_grad(self.H, self.p, x)

    @property
    def has_hessian(self) -> bool:
        return True

    def hessian(self, x):
        x = _require_positive(x, self.n)
        p = self.p
        _, K = _solve_columns(self.H, x ** (-p), "H X^-p H^T")
        C = K.T @ K
        w = x ** (-p - 1.0)
        return np.diag(p * (p + 1) * x ** (-p - 2.0) * np.diag(C)) - p * p * np.outer(w, w) * C * C


class PolyQuartic(ObjectiveOracle):
    """f(x) = |Ax - b|_4^4/4 + |Cx - d|^2/2 (+ |Ex|^4/4) on R^n."""

    def __init__(self, A: Matrix, b: Vector, C: Matrix, d: Vector, E: Optional[Matrix] = None):
        self.A = as_matrix(A)
        n = self.A.shape[1]
        self.b = as_vector(b, self.A.shape[0])
        self.C = as_matrix(C, cols=n)
        self.d = as_vector(d, self.C.shape[0])
        self.E = None if E is None else as_matrix(E, cols=n)
        self.domain = Domain.all_space(n)

    def value_and_gradient(self, x):
        return quartic_value_grad(self.A, self.b, self.C, self.d, self.E, as_vector(x, self.domain.dim))

    @property
    def has_hessian(self) -> bool:
        return True

    def hessian(self, x):
        x = np.asarray(x, dtype=np.float64)
        r = self.A @ x - self.b
        H = 3.0 * (self.A.T * r ** 2) @ self.A + self.C.T @ self.C
        if self.E is not None:
            ex = self.E @ x
            v = self.E.T @ ex
            H += float(np.dot(ex, ex)) * self.E.T @ self.E + 2.0 * np.outer(v, v)
        return H

    def polynomial_bound(self) -> PolynomialBound:
        """p(alpha) >= |Hessian| at |x| = alpha."""
        nA, nb, nC = operator_norm(self.A), float(np.linalg.norm(self.b)), operator_norm(self.C)
        a2 = 3.0 * nA ** 4 + (3.0 * operator_norm(self.E) ** 4 if self.E is not None else 0.0)
        return PolynomialBound((3.0 * nA ** 2 * nb ** 2 + nC ** 2, 6.0 * nA ** 3 * nb, a2))

    def strong_convexity(self) -> float:
        """mu relative to the r = 2 power-norm reference; zero without E."""
        if self.E is None:
            return 0.0
        return mu_for_quartic_strong(self.E, self.C)


class UnivariatePolynomial(ObjectiveOracle):
    """Scalar polynomial with ascending coefficients, on R^1."""

    def __init__(self, coefficients: Sequence[float]):
        if len(coefficients) == 0:
            raise ConfigurationError("polynomial needs coefficients")
        self.poly = Polynomial(np.asarray(coefficients, dtype=np.float64))
        self.first = self.poly.deriv(1)
        self.second = self.poly.deriv(2)
        self.domain = Domain.all_space(1)

    def value_and_gradient(self, x):
        t = float(as_vector(x, 1)[0])
        return float(self.poly(t)), np.array([self.first(t)])

    @property
    def has_hessian(self) -> bool:
        return True

    def hessian(self, x):
        return np.array([[self.second(float(np.asarray(x).reshape(-1)[0]))]])


class QuadraticObjective(ObjectiveOracle):
    """f(x) = x^T Q x / 2 + q^T x."""

    def __init__(self, Q: Matrix, q: Optional[Vector] = None, domain: Optional[Domain] = None):
        self.Q = as_matrix(Q)
        n = self.Q.shape[0]
        if self.Q.shape != (n, n) or not np.allclose(self.Q, self.Q.T):
            raise DimensionMismatchError("quadratic objective needs a symmetric square matrix")
        self.q = np.zeros(n) if q is None else as_vector(q, n)
        self.domain = domain or Domain.all_space(n)

    def value_and_gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        Qx = self.Q @ x
        return 0.5 * float(np.dot(x, Qx)) + float(np.dot(self.q, x)), Qx + self.q

    @property
    def has_hessian(self) -> bool:
        return True

    def hessian(self, x):
        return self.Q.copy()


def L_from_polynomial_rn(poly: PolynomialBound) -> float:
    """L = sum |a_i|, valid with the power-norm reference of r = degree."""
    return float(sum(abs(a) for a in poly.coefficients))


def L_from_polynomial_box(poly: PolynomialBound, u: float, n: int) -> float:
    """L = sum |a_i| (u/n)^(i - s), valid with the box reference of s = degree."""
    if not u > 0 or n < 1:
        raise ConfigurationError(f"need u > 0 and n >= 1, got u={u}, n={n}")
    s = poly.degree
    return float(sum(abs(a) * (u / n) ** (i - s) for i, a in enumerate(poly.coefficients)))


def _smallest_singular_value(M: Matrix) -> float:
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if M.shape[0] < M.shape[1]:
        return 0.0
    sv = scipy.linalg.svdvals(M)
    smallest = float(sv.min())
    if smallest <= Config.RANK_TOL * max(1.0, float(sv.max())):
        return 0.0
    return smallest


def mu_for_quartic_strong(E: Matrix, C: Matrix) -> float:
    """mu = min(sigma_E^4 / 3, sigma_C^2); zero when either is column-rank-deficient."""
    sigma_e = _smallest_singular_value(E)
    sigma_c = _smallest_singular_value(C)
    return min(sigma_e ** 4 / 3.0, sigma_c ** 2)


def operator_norm(M: Matrix) -> float:
    """Largest singular value."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if M.size == 0:
        return 0.0
    return float(scipy.linalg.svdvals(M).max())
