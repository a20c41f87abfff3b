"""
Safeguarded scalar root finding and concave line maximization.
"""

import logging
import math
from typing import Callable, Optional, Tuple

import numpy as np

from ..core.config import Config
from ..core.exceptions import BracketingError, ConfigurationError, NonConvergenceError, UnboundedDualError
from ..models import Bracket

logger = logging.getLogger(__name__)

ScalarFunction = Callable[[float], float]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _expand(func: ScalarFunction, lo: float, f_lo: float, hi: float, max_expansions: int) -> Tuple[float, float, float, float]:
    """Grow the bracket upward by doubling until the sign changes; lo follows."""
    step = (hi - lo) if math.isfinite(hi) else max(1.0, abs(lo))
    if not math.isfinite(hi):
        hi = lo + step
    f_hi = func(hi)
    expansions = 0
    while np.sign(f_hi) == np.sign(f_lo) and f_hi != 0.0:
        if expansions >= max_expansions:
            raise BracketingError(
                f"no sign change after {max_expansions} expansions (last bracket [{lo:.6g}, {hi:.6g}])"
            )
        lo, f_lo = hi, f_hi
        step *= 2.0
        hi = lo + step
        f_hi = func(hi)
        expansions += 1
    return lo, f_lo, hi, f_hi


def _difference_quotient(func: ScalarFunction, x: float, lo: float, hi: float) -> float:
    h = 1e-7 * (1.0 + abs(x))
    left, right = min(h, x - lo), min(h, hi - x)
    if left <= 0 and right <= 0:
        return math.nan
    if left <= 0:
        return (func(x + right) - func(x)) / right
    if right <= 0:
        return (func(x) - func(x - left)) / left
    h = min(left, right)
    return (func(x + h) - func(x - h)) / (2.0 * h)


def find_root(func: ScalarFunction, bracket_hint: Bracket, tol: float = Config.ROOT_TOL,
              derivative: Optional[ScalarFunction] = None,
              max_iter: int = Config.ROOT_MAX_ITER) -> Tuple[float, float]:
    """Root of a strictly monotone function and its residual.

    Newton steps are taken from the endpoint with the smaller residual and
    replaced by bisection whenever they leave the current bracket. ``tol`` is
    absolute on the function value: the returned residual is at most ``tol``,
    otherwise NonConvergenceError is raised, including when the bracket
    shrinks to adjacent floats first. Badly scaled equations should be
    normalized by the caller or given a tolerance on their own scale.
    """
    if not tol > 0:
        raise ConfigurationError("tolerance must be positive")
    lo = float(bracket_hint.lo)
    f_lo = float(func(lo)) if bracket_hint.f_lo is None else float(bracket_hint.f_lo)
    if abs(f_lo) <= tol:
        return lo, abs(f_lo)
    hi = float(bracket_hint.hi)
    if bracket_hint.is_finite and bracket_hint.f_hi is not None and np.sign(bracket_hint.f_hi) != np.sign(f_lo):
        f_hi = float(bracket_hint.f_hi)
    else:
        lo, f_lo, hi, f_hi = _expand(func, lo, f_lo, hi, Config.ROOT_MAX_EXPANSIONS)
    if abs(f_hi) <= tol:
        return hi, abs(f_hi)

    x, fx = (lo, f_lo) if abs(f_lo) < abs(f_hi) else (hi, f_hi)
    best_f = fx
    for iteration in range(max_iter):
        d = derivative(x) if derivative is not None else _difference_quotient(func, x, lo, hi)
        step_ok = d != 0 and math.isfinite(d)
        candidate = x - fx / d if step_ok else math.nan
        if not (lo < candidate < hi):
            candidate = 0.5 * (lo + hi)
        x, fx = candidate, float(func(candidate))
        if abs(fx) < abs(best_f):
            best_f = fx
        if abs(fx) <= tol:
            logger.debug("root %.17g found after %d iterations (residual %.3e)", x, iteration + 1, abs(fx))
            return x, abs(fx)
        if np.sign(fx) == np.sign(f_lo):
            lo, f_lo = x, fx
        else:
            hi, f_hi = x, fx
        if not lo < 0.5 * (lo + hi) < hi:
            raise NonConvergenceError(
                f"bracket collapsed to adjacent floats with residual above {tol:.3e}", abs(best_f), (lo, hi)
            )
    raise NonConvergenceError(f"root finder hit the {max_iter}-iteration cap", abs(best_f), (lo, hi))


def solve_monotone(func: ScalarFunction, bracket_hint: Bracket, tol: float = Config.ROOT_TOL,
                   derivative: Optional[ScalarFunction] = None,
                   max_iter: int = Config.ROOT_MAX_ITER) -> float:
    """Root of a strictly monotone scalar function inside (an expansion of) the bracket."""
    return find_root(func, bracket_hint, tol, derivative, max_iter)[0]


def golden_section_maximize(func: ScalarFunction, lo: float, hi: float,
                            width: float = Config.GOLDEN_WIDTH) -> Tuple[float, float]:
    """Maximizer of a concave function on [lo, hi] to the given interval width."""
    a, b = float(lo), float(hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    floor = 4.0 * np.finfo(float).eps * max(abs(a), abs(b))
    while b - a > max(width, floor):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = func(d)
    t = 0.5 * (a + b)
    candidates = [(func(t), t), (func(lo), float(lo)), (func(hi), float(hi))]
    value, t = max(candidates, key=lambda item: item[0])
    return t, value


def bracket_maximum(func: ScalarFunction, lo: float, hi: float = math.inf,
                    max_expansions: int = Config.ROOT_MAX_EXPANSIONS) -> Tuple[float, float]:
    """Finite interval containing the maximizer of a concave function on [lo, hi]."""
    if math.isfinite(hi):
        return float(lo), float(hi)
    x0, step = float(lo), max(1.0, abs(lo))
    f0 = func(x0)
    x1 = x0 + step
    f1 = func(x1)
    if not f1 > f0:
        return x0, x1
    for _ in range(max_expansions):
        step *= 2.0
        x2 = x1 + step
        f2 = func(x2)
        if not math.isfinite(f2):
            raise UnboundedDualError(f"dual objective is not finite at t={x2:.6g}")
        if f2 < f1:
            return x0, x2
        x0, x1, f1 = x1, x2, f2
    raise UnboundedDualError(f"dual objective still increasing after {max_expansions} expansions")
