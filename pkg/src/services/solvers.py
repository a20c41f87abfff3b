"""
Primal gradient, dual averaging and composite schemes with a reference function,
and the Frank-Wolfe baseline for D-optimal design.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from ..core.config import Config
from ..core.domain import Matrix, Vector
from ..core.exceptions import (
    ConfigurationError,
    DomainViolationError,
    NumericalError,
    SingularMatrixError,
    SolverAbortedError,
    SubproblemError,
)
from ..core.oracles import RelSmoothPair
from ..models import IterateTrace, SolverConfig, SubproblemResult, TraceRecord
from .composite import CompositePiece
from .objectives import DOptimalDesign

logger = logging.getLogger(__name__)

_FAILURES = (NumericalError, SubproblemError, DomainViolationError)


def _metadata(algorithm: str, pair_L: float, pair_mu: float, cfg: SolverConfig, dim: int) -> dict:
    return {
        "algorithm": algorithm,
        "L": pair_L,
        "mu": pair_mu,
        "seed": cfg.seed,
        "prng": Config.PRNG_NAME,
        "dim": dim,
        "max_iters": cfg.max_iters,
    }


def _elapsed(cfg: SolverConfig, start: int) -> Optional[int]:
    return time.perf_counter_ns() - start if cfg.timings else None


def pgs_linear_term(grad_f: Vector, grad_h: Vector, L: float) -> Vector:
    """c = grad f(x)/L - grad h(x), the linear term of the primal gradient model."""
    return grad_f / L - grad_h


def _primal_gradient_run(pair: RelSmoothPair, x0: Optional[Vector], cfg: SolverConfig,
                         piece: Optional[CompositePiece], algorithm: str) -> IterateTrace:
    objective, reference, L = pair.objective, pair.reference, pair.L
    domain = pair.domain
    x = domain.require_interior(domain.default_start() if x0 is None else x0, "start point")
    trace = IterateTrace(_metadata(algorithm, L, pair.mu, cfg, domain.dim))
    start = time.perf_counter_ns()

    def penalty(point: Vector) -> float:
        return 0.0 if piece is None else piece.value(point)

    f, g = objective.value_and_gradient(x)
    total = f if piece is None else f + penalty(x)
    trace.append(TraceRecord(0, x.copy(), total, total, 0.0, _elapsed(cfg, start)))
    logger.info("%s: start f=%.12g, L=%g, mu=%g", algorithm, total, L, pair.mu)
    trace.metadata["monotone"] = True

    k = 0
    for k in range(1, cfg.max_iters + 1):
        c = pgs_linear_term(g, reference.gradient(x), L)
        try:
            if piece is None:
                result = reference.solve_subproblem(c)
            else:
                result = piece.composite_subproblem(c, 1.0 / L, reference)
            x = result.x
            f, g = objective.value_and_gradient(x)
        except _FAILURES as exc:
            raise SolverAbortedError(f"{algorithm} aborted at iteration {k}: {exc}", trace) from exc
        previous, total = total, (f if piece is None else f + penalty(x))
        if total - previous > Config.MONOTONE_SLACK * max(1.0, abs(previous)) and trace.metadata["monotone"]:
            # a valid L never lets the recorded value rise
            trace.metadata["monotone"] = False
            logger.warning("%s: value rose from %.17g to %.17g at iteration %d; L=%g may be too small",
                           algorithm, previous, total, k, L)
        reached = cfg.target_reached(total)
        if cfg.should_record(k) or reached:
            trace.append(TraceRecord(k, x.copy(), total, total, result.root_residual, _elapsed(cfg, start)))
        if reached:
            logger.info("%s: target gap reached at iteration %d", algorithm, k)
            break
    logger.info("%s: finished after %d iterations, f=%.12g", algorithm, k, trace.final.f)
    return trace


def primal_gradient(pair: RelSmoothPair, x0: Optional[Vector] = None,
                    cfg: Optional[SolverConfig] = None) -> IterateTrace:
    """x+ = argmin f(x) + <grad f(x), y - x> + L D_h(y, x), with step exactly 1/L."""
    return _primal_gradient_run(pair, x0, cfg or SolverConfig(), None, "pgs")


def composite_primal_gradient(pair: RelSmoothPair, piece: CompositePiece, x0: Optional[Vector] = None,
                              cfg: Optional[SolverConfig] = None) -> IterateTrace:
    """Primal gradient on f + P with P folded into the subproblem; records f + P."""
    return _primal_gradient_run(pair, x0, cfg or SolverConfig(), piece, "cpgs")


@dataclass
class DualAveragingState:
    """Accumulated model of the dual averaging scheme, normalized by its h coefficient.

    The model h(x) + sum_i a_{i+1} [f(x^i) + <g_i, x - x^i> + mu D_h(x, x^i)]
    equals (1 + mu A_k) h(x) + <s_k, x> + const, so its minimizer is the
    subproblem solution at s_k / (1 + mu A_k), which is kept as linear_term.
    """
    L: float
    mu: float
    dim: int
    k: int = 0
    A: float = 0.0
    best_f: float = math.inf
    linear_term: Vector = field(default=None)

    def __post_init__(self):
        if not self.L > self.mu:
            raise ConfigurationError(f"dual averaging needs L > mu, got L={self.L}, mu={self.mu}")
        if self.linear_term is None:
            self.linear_term = np.zeros(self.dim)

    @property
    def ratio(self) -> float:
        return self.L / (self.L - self.mu)

    def weight(self, k: int) -> float:
        """a_{k+1} = (L/(L - mu))^k / (L - mu)."""
        with np.errstate(over="ignore"):
            return float(np.exp(k * math.log(self.ratio))) / (self.L - self.mu)

    def closed_form_A(self, k: Optional[int] = None) -> float:
        k = self.k if k is None else k
        if self.mu == 0:
            return k / self.L
        with np.errstate(over="ignore"):
            return float(np.expm1(k * math.log1p(self.mu / (self.L - self.mu)))) / self.mu

    @property
    def h_coefficient(self) -> float:
        return 1.0 + self.mu * self.A

    def accumulate(self, grad_f: Vector, grad_h: Vector) -> Vector:
        """Fold in the linear model at x^k; returns the next subproblem's c."""
        self.A += self.weight(self.k)
        v = grad_f - self.mu * grad_h if self.mu > 0 else grad_f
        self.linear_term = ((self.L - self.mu) / self.L) * self.linear_term + v / self.L
        self.k += 1
        return self.linear_term


def dual_averaging(pair: RelSmoothPair, cfg: Optional[SolverConfig] = None) -> IterateTrace:
    """Dual averaging from the h-center; the recorded f is min over 1 <= i <= k of f(x^i)."""
    cfg = cfg or SolverConfig()
    if not pair.L > pair.mu:
        raise ConfigurationError(f"dual averaging needs L > mu, got L={pair.L}, mu={pair.mu}")
    objective = pair.objective
    reference = pair.reference
    try:
        x = reference.center()
    except _FAILURES as exc:
        raise SolverAbortedError(f"das could not compute the reference center: {exc}") from exc
    shifted = reference.normalize_at(x)
    state = DualAveragingState(pair.L, pair.mu, pair.domain.dim)
    trace = IterateTrace(_metadata("das", pair.L, pair.mu, cfg, pair.domain.dim))
    trace.metadata["h_offset"] = shifted.offset
    start = time.perf_counter_ns()

    f, g = objective.value_and_gradient(x)
    trace.append(TraceRecord(0, x.copy(), f, f, 0.0, _elapsed(cfg, start)))
    logger.info("das: start at h-center, f=%.12g, L=%g, mu=%g", f, pair.L, pair.mu)

    k = 0
    for k in range(1, cfg.max_iters + 1):
        c = state.accumulate(g, reference.gradient(x))
        try:
            result: SubproblemResult = shifted.solve_subproblem(c)
            x = result.x
            f, g = objective.value_and_gradient(x)
        except _FAILURES as exc:
            raise SolverAbortedError(f"das aborted at iteration {k}: {exc}", trace) from exc
        state.best_f = min(state.best_f, f)
        reached = cfg.target_reached(state.best_f)
        if cfg.should_record(k) or reached:
            trace.append(TraceRecord(k, x.copy(), state.best_f, f, result.root_residual, _elapsed(cfg, start)))
        if reached:
            logger.info("das: target gap reached at iteration %d", k)
            break
    trace.metadata["A_running"] = state.A
    trace.metadata["A_closed_form"] = state.closed_form_A()
    trace.metadata["h_coefficient"] = state.h_coefficient
    logger.info("das: finished after %d iterations, best f=%.12g", k, state.best_f)
    return trace


# ---------------------------------------------------------------------------
# Frank-Wolfe for D-optimal design

def dopt_line_search_step(kappa: float, m: int) -> float:
    """Exact step toward vertex e_j: argmax ln det((1 - t) M + t h_j h_j^T) = (kappa - m)/(m (kappa - 1))."""
    if kappa == 1.0:
        return 0.0
    return (kappa - m) / (m * (kappa - 1.0))


def dopt_step_decrease(kappa: float, m: int, step: float) -> float:
    """f(x) - f(x_new) for x_new = (1 - step) x + step e_j."""
    shrink = (m - 1) * math.log1p(-step) if m > 1 else 0.0
    return shrink + math.log1p(step * (kappa - 1.0))


def _inverse_and_value(H: Matrix, x: Vector):
    M = (H * x) @ H.T
    try:
        factor = scipy.linalg.cho_factor(M, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"H X H^T lost definiteness: {exc}") from exc
    Minv = scipy.linalg.cho_solve(factor, np.eye(H.shape[0]), check_finite=False)
    f = -2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    return Minv, f


def frank_wolfe_dopt(H: Matrix, x0: Optional[Vector] = None, cfg: Optional[SolverConfig] = None,
                     away_steps: bool = False, stationarity_tol: Optional[float] = None,
                     on_step: Optional[Callable[[int, float], None]] = None) -> IterateTrace:
    """Frank-Wolfe with exact line search on -ln det(H X H^T) over the simplex.

    The inverse of M = H X H^T and the leverages kappa_j = h_j^T M^{-1} h_j
    are kept current by Sherman-Morrison updates and rebuilt from a fresh
    Cholesky factor every FW_REFACTOR_EVERY steps. With away_steps the
    method also moves mass off the worst supported point, which is what
    makes long oracle runs converge fast. The run stops early once the
    stationarity measure max kappa - m drops to stationarity_tol; it bounds
    f(x) - f* from above since f(x) - f* <= m ln(max kappa / m) <= max kappa - m.
    """
    cfg = cfg or SolverConfig()
    design = DOptimalDesign(H)
    H = design.H
    m, n = design.m, design.n
    x = np.full(n, 1.0 / n) if x0 is None else design.domain.require_interior(x0, "start point").copy()
    trace = IterateTrace(_metadata("fw-away" if away_steps else "fw", 1.0, 0.0, cfg, n))
    start = time.perf_counter_ns()

    try:
        Minv, f = _inverse_and_value(H, x)
    except SingularMatrixError as exc:
        raise SolverAbortedError(f"fw could not factor the start point: {exc}", trace) from exc
    kappa = np.sum(H * (Minv @ H), axis=0)
    trace.append(TraceRecord(0, x.copy(), f, f, 0.0, _elapsed(cfg, start)))

    converged = False
    since_refactor = 0
    k = 0
    for k in range(1, cfg.max_iters + 1):
        j = int(np.argmax(kappa))
        kappa_max = float(kappa[j])
        gap_estimate = max(kappa_max - m, 0.0)
        if stationarity_tol is not None and gap_estimate <= stationarity_tol:
            converged = True
            k -= 1
            break

        step = dopt_line_search_step(kappa_max, m)
        drop = False
        if away_steps:
            support = np.flatnonzero(x > 0)
            i = int(support[np.argmin(kappa[support])])
            kappa_min = float(kappa[i])
            if m - kappa_min > kappa_max - m and x[i] < 1.0:
                j = i
                limit = -x[i] / (1.0 - x[i])
                step = dopt_line_search_step(kappa_min, m) if kappa_min > 1.0 else limit
                if step <= limit:
                    step, drop = limit, True
        kappa_j = float(kappa[j])

        if step == 0.0:
            if cfg.should_record(k):
                trace.append(TraceRecord(k, x.copy(), f, f, 0.0, _elapsed(cfg, start)))
            continue

        f -= dopt_step_decrease(kappa_j, m, step)
        x *= (1.0 - step)
        x[j] += step
        if drop:
            x[j] = 0.0
        since_refactor += 1

        beta = step / (1.0 - step) if step < 1.0 else math.inf
        denom = 1.0 + beta * kappa_j
        needs_refactor = (since_refactor >= Config.FW_REFACTOR_EVERY or not math.isfinite(beta)
                          or denom <= 1e-8)
        if needs_refactor:
            try:
                Minv, f = _inverse_and_value(H, x)
            except SingularMatrixError as exc:
                raise SolverAbortedError(f"fw aborted at iteration {k}: {exc}", trace) from exc
            kappa = np.sum(H * (Minv @ H), axis=0)
            since_refactor = 0
            logger.debug("fw: refactorized at iteration %d", k)
        else:
            u = Minv @ H[:, j]
            w = H.T @ u
            Minv = (Minv - (beta / denom) * np.outer(u, u)) / (1.0 - step)
            kappa = (kappa - (beta / denom) * w * w) / (1.0 - step)

        if on_step is not None:
            on_step(k, step)
        reached = cfg.target_reached(f)
        if cfg.should_record(k) or reached:
            trace.append(TraceRecord(k, x.copy(), f, f, 0.0, _elapsed(cfg, start)))
        if reached:
            break

    try:
        _, f_exact = _inverse_and_value(H, x)
    except SingularMatrixError as exc:
        raise SolverAbortedError(f"fw final iterate is degenerate: {exc}", trace) from exc
    if trace.final.k == k:
        trace.records[-1].f = trace.records[-1].raw_f = f_exact
    else:
        trace.append(TraceRecord(k, x.copy(), f_exact, f_exact, 0.0, _elapsed(cfg, start)))
    kappa_max = float(np.max(kappa))
    trace.metadata.update({
        "converged": converged,
        "gap_estimate": max(kappa_max - m, 0.0),
        "stationarity": kappa_max - m,
    })
    logger.info("fw: finished after %d iterations, f=%.12g, stationarity=%.3e", k, f_exact, kappa_max - m)
    return trace
