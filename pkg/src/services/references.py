"""
Reference functions with efficiently solvable linearized subproblems.

Each family solves min over Q of <c, x> + h(x) by reducing it to one
scalar equation (or a one-dimensional concave maximization).
"""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ..core.config import Config
from ..core.domain import Domain, Vector, as_vector
from ..core.exceptions import ConfigurationError, DomainViolationError, HessianUnavailableError
from ..core.oracles import ReferenceOracle
from ..models import Bracket, SubproblemResult
from .rootfind import bracket_maximum, find_root, golden_section_maximize

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Power of the Euclidean norm on R^n

def power_norm_value_grad(x: Vector, r: int, center: Optional[Vector] = None) -> Tuple[float, Vector]:
    """h(x) = |z|^(r+2)/(r+2) + |z|^2/2 with z = x - center, and its gradient (1 + |z|^r) z."""
    if r < 1:
        raise ConfigurationError(f"power-norm reference needs r >= 1, got {r}")
    x = np.asarray(x, dtype=np.float64)
    z = x if center is None else x - center
    rho = float(np.linalg.norm(z))
    value = rho ** (r + 2) / (r + 2) + 0.5 * rho * rho
    return value, (1.0 + rho ** r) * z


def _power_norm_equation(a: float, r: int):
    def g(theta: float) -> float:
        return 1.0 - theta - a * theta ** (r + 1)

    def dg(theta: float) -> float:
        return -1.0 - (r + 1) * a * theta ** r

    return g, dg


def power_norm_theta(a: float, r: int, closed_form: bool = True) -> Tuple[float, float]:
    """Positive root of 1 - theta - a theta^(r+1) = 0 with a = |c|^r, and its residual.

    r = 1, 2, 3 use the quadratic, Cardano and Ferrari formulas followed by
    one clipped Newton step; larger r (or closed_form=False) use the root finder on [0, 1].
    """
    g, dg = _power_norm_equation(a, r)
    if a == 0.0:
        return 1.0, 0.0
    if closed_form and r == 1:
        theta = 2.0 / (1.0 + math.sqrt(1.0 + 4.0 * a))
    elif closed_form and r == 2:
        s = math.sqrt(3.0 * a)
        theta = 2.0 / s * math.sinh(math.asinh(1.5 * s) / 3.0)
    elif closed_form and r == 3:
        s = math.sqrt(3.0 * a)
        m = 2.0 / s * math.sinh(math.asinh(3.0 / (16.0 * a) * s) / 3.0)
        w = math.sqrt(2.0 * m)
        theta = 0.5 * (-w + math.sqrt(max(-2.0 * m + 2.0 / (a * w), 0.0)))
    else:
        theta, residual = find_root(g, Bracket(0.0, 1.0, f_lo=1.0, f_hi=-a), derivative=dg)
        return theta, residual
    if r > 1:
        # cancellation in the hyperbolic forms
        theta = min(max(theta - g(theta) / dg(theta), 0.0), 1.0)
    return theta, abs(g(theta))


def power_norm_subproblem(c: Vector, r: int, center: Optional[Vector] = None) -> SubproblemResult:
    """argmin <c, x> + h(x) over R^n: x = center - theta c."""
    if r < 1:
        raise ConfigurationError(f"power-norm reference needs r >= 1, got {r}")
    c = as_vector(c)
    center = np.zeros_like(c) if center is None else as_vector(center, c.size)
    norm_c = float(np.linalg.norm(c))
    if norm_c == 0.0:
        return SubproblemResult(x=center.copy(), root_residual=0.0, theta=1.0)
    theta, residual = power_norm_theta(norm_c ** r, r)
    return SubproblemResult(x=center - theta * c, root_residual=residual, theta=theta)


class PowerNormRef(ReferenceOracle):
    """h(x) = |x - x_c|^(r+2)/(r+2) + |x - x_c|^2/2 on R^n."""

    def __init__(self, dim: int, r: int = 2, center: Optional[Vector] = None):
        if r < 1:
            raise ConfigurationError(f"power-norm reference needs r >= 1, got {r}")
        self.r = int(r)
        self.center_point = np.zeros(dim) if center is None else as_vector(center, dim)
        self.domain = Domain.all_space(dim)

    def value_and_gradient(self, x):
        return power_norm_value_grad(x, self.r, self.center_point)

    @property
    def has_hessian(self) -> bool:
        return True

    def hessian(self, x):
        z = np.asarray(x, dtype=np.float64) - self.center_point
        rho = float(np.linalg.norm(z))
        H = (1.0 + rho ** self.r) * np.eye(z.size)
        if rho > 0:
            H += self.r * rho ** (self.r - 2) * np.outer(z, z)
        return H

    def solve_subproblem(self, c):
        return power_norm_subproblem(c, self.r, self.center_point)

    def stationarity_residual(self, c, x):
        z = np.asarray(x, dtype=np.float64) - self.center_point
        return float(np.max(np.abs(c + (1.0 + np.linalg.norm(z) ** self.r) * z)))

    def center(self):
        return self.center_point.copy()

    def same_geometry(self, other):
        return (isinstance(other, PowerNormRef) and other.r == self.r
                and np.array_equal(other.center_point, self.center_point))


# ---------------------------------------------------------------------------
# Logarithmic barrier on the unit simplex

def simplex_logbarrier_subproblem(c: Vector) -> SubproblemResult:
    """argmin <c, x> - sum ln x_j over the simplex: x_j = 1/(c_j + theta)."""
    c = as_vector(c)
    if c.size < 2:
        raise ConfigurationError("simplex subproblem needs dimension >= 2")
    c_min = float(c.min())
    shifted = c - c_min

    def d(theta: float) -> float:
        return float(np.sum(1.0 / (shifted + theta))) - 1.0

    def dd(theta: float) -> float:
        return -float(np.sum((shifted + theta) ** -2))

    lo = Config.SIMPLEX_LO_OFFSET * (1.0 + float(np.max(np.abs(c))))
    theta, residual = find_root(d, Bracket(lo), derivative=dd)
    x = 1.0 / (shifted + theta)
    x /= x.sum()
    return SubproblemResult(x=x, root_residual=residual, theta=theta - c_min)


class LogBarrierSimplexRef(ReferenceOracle):
    """h(x) = -sum ln x_j on the unit simplex."""

    def __init__(self, dim: int):
        if dim < 2:
            raise ConfigurationError("log-barrier simplex reference needs dimension >= 2")
        self.domain = Domain.unit_simplex(dim)

    def value_and_gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(x < 0):
            raise DomainViolationError("log-barrier evaluated at a negative coordinate")
        with np.errstate(divide="ignore"):
            return float(-np.sum(np.log(x))), -1.0 / x

    @property
    def has_hessian(self) -> bool:
        return True

    def hessian(self, x):
        return np.diag(1.0 / np.asarray(x, dtype=np.float64) ** 2)

    def solve_subproblem(self, c):
        return simplex_logbarrier_subproblem(c)

    def stationarity_residual(self, c, x):
        c = np.asarray(c, dtype=np.float64)
        x = np.asarray(x, dtype=np.float64)
        theta = float(np.dot(x, 1.0 - x * c) / np.dot(x, x))
        kkt = np.max(np.abs(x * (c + theta) - 1.0))
        return float(max(kkt, abs(x.sum() - 1.0)))

    def bregman_terms(self, y: Vector, x: Vector) -> float:
        """D_h(y, x) as sum_j (y_j/x_j - 1 - ln(y_j/x_j))."""
        q = np.asarray(y, dtype=np.float64) / np.asarray(x, dtype=np.float64)
        return float(np.sum(q - 1.0 - np.log(q)))

    def same_geometry(self, other):
        return isinstance(other, LogBarrierSimplexRef) and other.domain.dim == self.domain.dim


# ---------------------------------------------------------------------------
# Power of the inverse sum on the box (0, u]^n

def box_power_subproblem(c: Vector, s: int, u: float) -> SubproblemResult:
    """argmin <c, x> + u^3/(2(s+1)) (sum 1/x_i)^(s+1) over (0, u]^n."""
    if s < 0 or not u > 0:
        raise ConfigurationError(f"box reference needs s >= 0 and u > 0, got s={s}, u={u}")
    c = as_vector(c)
    n = c.size
    c_tilde = 2.0 * c / u ** 3

    def coords(theta: float) -> Vector:
        x = np.full(n, float(u))
        free = c_tilde > theta / u ** 2
        x[free] = np.sqrt(theta / c_tilde[free])
        return x

    # theta = (sum 1/x)^s written as 1 - (sum 1/x)^s / theta, increasing and of unit scale
    def d(theta: float) -> float:
        return 1.0 - float(np.sum(1.0 / coords(theta))) ** s / theta

    def dd(theta: float) -> float:
        free = c_tilde > theta / u ** 2
        total = float(np.sum(1.0 / coords(theta)))
        slope = 0.5 * s * total ** (s - 1) * theta ** -1.5 * float(np.sum(np.sqrt(c_tilde[free])))
        return total ** s / theta ** 2 + slope / theta

    lo = (n / u) ** s
    theta, residual = find_root(d, Bracket(lo), derivative=dd)
    x = coords(theta)
    return SubproblemResult(x=np.minimum(x, u), root_residual=residual, theta=theta)


class BoxPowerRef(ReferenceOracle):
    """h(x) = u^3/(2(s+1)) (sum 1/x_i)^(s+1) on (0, u]^n."""

    def __init__(self, dim: int, s: int = 0, u: float = 1.0):
        if s < 0 or not u > 0:
            raise ConfigurationError(f"box reference needs s >= 0 and u > 0, got s={s}, u={u}")
        self.s = int(s)
        self.u = float(u)
        self.domain = Domain.open_box(dim, u)

    def value_and_gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        if np.any(x <= 0):
            raise DomainViolationError("box reference evaluated at a nonpositive coordinate")
        total = float(np.sum(1.0 / x))
        value = self.u ** 3 / (2.0 * (self.s + 1)) * total ** (self.s + 1)
        return value, -0.5 * self.u ** 3 * total ** self.s / x ** 2

    @property
    def has_hessian(self) -> bool:
        return True

    def hessian(self, x):
        x = np.asarray(x, dtype=np.float64)
        total = float(np.sum(1.0 / x))
        w = x ** -2
        H = np.diag(self.u ** 3 * total ** self.s / x ** 3)
        if self.s > 0:
            H += 0.5 * self.u ** 3 * self.s * total ** (self.s - 1) * np.outer(w, w)
        return H

    def solve_subproblem(self, c):
        return box_power_subproblem(c, self.s, self.u)

    def stationarity_residual(self, c, x):
        x = np.asarray(x, dtype=np.float64)
        g = np.asarray(c, dtype=np.float64) + self.gradient(x)
        clamped = x >= self.u
        # at the upper face only a negative directional derivative is admissible
        res = np.where(clamped, np.maximum(g, 0.0), np.abs(g))
        return float(np.max(res))

    def same_geometry(self, other):
        return (isinstance(other, BoxPowerRef) and other.s == self.s and other.u == self.u
                and other.domain.dim == self.domain.dim)


# ---------------------------------------------------------------------------
# Squared Euclidean norm

class SquaredEuclideanRef(ReferenceOracle):
    """h(x) = |x|^2/2 on R^n."""

    def __init__(self, dim: int):
        self.domain = Domain.all_space(dim)

    def value_and_gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        return 0.5 * float(np.dot(x, x)), x.copy()

    @property
    def has_hessian(self) -> bool:
        return True

    def hessian(self, x):
        return np.eye(self.domain.dim)

    def solve_subproblem(self, c):
        return SubproblemResult(x=-as_vector(c, self.domain.dim), root_residual=0.0)

    def stationarity_residual(self, c, x):
        return float(np.max(np.abs(np.asarray(c) + np.asarray(x))))

    def same_geometry(self, other):
        return isinstance(other, SquaredEuclideanRef) and other.domain.dim == self.domain.dim


# ---------------------------------------------------------------------------
# Functions of the squared norm over sets with an easy Euclidean projection

Projector = Callable[[Vector, float], Vector]


def radial_dual_subproblem(c: Vector, g_conjugate: Callable[[float], float], projector: Projector,
                           t_bounds: Tuple[float, float] = (0.0, math.inf),
                           width: float = Config.GOLDEN_WIDTH) -> SubproblemResult:
    """argmin over Q of <c, x> + g(|x|^2) through its one-dimensional dual.

    Maximizes t -> -g*(t) + min_Q <c, x> + t |x|^2 over t_bounds and returns
    the inner minimizer at the maximizer. The min/sup exchange is the
    caller's precondition and is not verified.
    """
    c = as_vector(c)

    def dual(t: float) -> float:
        x_t = projector(c, t)
        return -g_conjugate(t) + float(np.dot(c, x_t)) + t * float(np.dot(x_t, x_t))

    lo, hi = float(t_bounds[0]), float(t_bounds[1])
    if lo == hi:
        t_star = lo
    else:
        lo, hi = bracket_maximum(dual, lo, hi)
        t_star, _ = golden_section_maximize(dual, lo, hi, width)
    logger.debug("radial dual maximized at t=%.12g", t_star)
    return SubproblemResult(x=np.asarray(projector(c, t_star), dtype=np.float64), root_residual=0.0, theta=t_star)


class RadialReference(ReferenceOracle):
    """h(x) = g(|x|^2) with caller-supplied g, g', g* and projector for Q."""

    def __init__(self, domain: Domain, g: Callable[[float], float], g_prime: Callable[[float], float],
                 g_conjugate: Callable[[float], float], projector: Projector,
                 t_bounds: Tuple[float, float] = (0.0, math.inf),
                 g_second: Optional[Callable[[float], float]] = None):
        self.domain = domain
        self.g, self.g_prime, self.g_second = g, g_prime, g_second
        self.g_conjugate = g_conjugate
        self.projector = projector
        self.t_bounds = t_bounds

    def value_and_gradient(self, x):
        x = np.asarray(x, dtype=np.float64)
        y = float(np.dot(x, x))
        return float(self.g(y)), 2.0 * self.g_prime(y) * x

    @property
    def has_hessian(self) -> bool:
        return self.g_second is not None

    def hessian(self, x):
        if self.g_second is None:
            raise HessianUnavailableError("radial reference built without g''")
        x = np.asarray(x, dtype=np.float64)
        y = float(np.dot(x, x))
        return 2.0 * self.g_prime(y) * np.eye(x.size) + 4.0 * self.g_second(y) * np.outer(x, x)

    def solve_subproblem(self, c):
        return radial_dual_subproblem(c, self.g_conjugate, self.projector, self.t_bounds)


def ball_projector(radius: float = 1.0) -> Projector:
    """min over |x| <= radius of <c, x> + t |x|^2."""
    def project(c: Vector, t: float) -> Vector:
        norm_c = float(np.linalg.norm(c))
        if norm_c == 0.0:
            return np.zeros_like(c)
        if t <= 0 or norm_c / (2.0 * t) >= radius:
            return -radius * c / norm_c
        return -c / (2.0 * t)
    return project


def box_projector(lower: Sequence[float], upper: Sequence[float]) -> Projector:
    """min over lower <= x <= upper of <c, x> + t |x|^2 for t >= 0."""
    lo = np.asarray(lower, dtype=np.float64)
    hi = np.asarray(upper, dtype=np.float64)

    def project(c: Vector, t: float) -> Vector:
        if t <= 0:
            return np.where(c < 0, hi, lo)
        return np.clip(-c / (2.0 * t), lo, hi)
    return project
