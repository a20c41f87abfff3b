"""
Central finite differences used as fallbacks and as test oracles.
"""

from typing import Callable, Optional

import numpy as np

from .config import Config
from .domain import Matrix, Vector


def fd_gradient(func: Callable[[Vector], float], x: Vector, step: Optional[float] = None) -> Vector:
    """Central-difference gradient with step 1e-5 (1 + ||x||) unless given."""
    x = np.asarray(x, dtype=np.float64)
    if step is None:
        step = Config.FD_GRADIENT_STEP * (1.0 + np.linalg.norm(x))
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = step
        g[i] = (func(x + e) - func(x - e)) / (2.0 * step)
    return g


def fd_hessian(grad: Callable[[Vector], Vector], x: Vector) -> Matrix:
    """Symmetrized central-difference Hessian, per-coordinate step 1e-4 (1 + |x_i|)."""
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    Hm = np.empty((n, n))
    for i in range(n):
        step = Config.FD_HESSIAN_STEP * (1.0 + abs(x[i]))
        e = np.zeros(n)
        e[i] = step
        Hm[:, i] = (grad(x + e) - grad(x - e)) / (2.0 * step)
    return 0.5 * (Hm + Hm.T)


def relative_error(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return float(np.linalg.norm(a - b) / max(1.0, np.linalg.norm(b)))
