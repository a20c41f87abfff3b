"""
Sampled certificates of relative smoothness and evaluation of convergence bounds.

A passing report is a sampled certificate, never a proof: the conditions
quantify over the whole interior and are only spot-checked here.
"""

import concurrent.futures
import logging
import math
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from ..core.config import Config
from ..core.domain import Domain, DomainKind, Matrix, Vector
from ..core.exceptions import ConfigurationError, HessianUnavailableError, PreconditionError
from ..core.numerics import fd_hessian
from ..core.oracles import ObjectiveOracle, ReferenceOracle, RelSmoothPair, bregman_distance
from ..models import BoundKind, BoundQuery, CertificateReport, IterateTrace
from .composite import CompositePiece

logger = logging.getLogger(__name__)


class DomainSampler:
    """Seeded interior points of a domain drawn from a PCG64 stream."""

    def __init__(self, domain: Domain, seed: int = Config.DEFAULT_SEED,
                 margin: float = Config.SAMPLE_MARGIN, radius: float = Config.SAMPLE_RADIUS,
                 seed_sequence: Optional[np.random.SeedSequence] = None):
        if domain.kind is DomainKind.AFFINE_PREIMAGE:
            raise ConfigurationError("sampling an affine preimage domain is not supported")
        self.domain = domain
        self.seed = seed
        self.margin = margin
        self.radius = radius
        self._sequence = seed_sequence or np.random.SeedSequence(seed)
        self.rng = np.random.Generator(np.random.PCG64(self._sequence))

    def spawn(self, count: int) -> List["DomainSampler"]:
        """Independent deterministic substreams, one per worker."""
        return [DomainSampler(self.domain, self.seed, self.margin, self.radius, child)
                for child in self._sequence.spawn(count)]

    def point(self) -> Vector:
        n = self.domain.dim
        kind = self.domain.kind
        if kind is DomainKind.UNIT_SIMPLEX:
            w = -np.log(self.rng.random(n))
            w /= w.sum()
            return (1.0 - n * self.margin) * w + self.margin
        if kind is DomainKind.OPEN_BOX:
            u = self.domain.upper
            return self.rng.uniform(self.margin * u, u, size=n)
        if kind is DomainKind.POSITIVE_ORTHANT:
            return self.rng.exponential(size=n) + self.margin
        return self.radius * self.rng.standard_normal(n)

    def points(self, count: int) -> List[Vector]:
        return [self.point() for _ in range(count)]

    def pairs(self, count: int) -> List[Tuple[Vector, Vector]]:
        return [(self.point(), self.point()) for _ in range(count)]


class GridSampler:
    """Explicit points, e.g. a one-dimensional grid; pairs are neighbours."""

    def __init__(self, points: Iterable, seed: Optional[int] = None):
        self._points = [np.atleast_1d(np.asarray(p, dtype=np.float64)) for p in points]
        if not self._points:
            raise ConfigurationError("grid sampler needs at least one point")
        self.seed = seed

    def spawn(self, count: int) -> List["GridSampler"]:
        return [GridSampler(self._points[i::count], self.seed) for i in range(count)]

    def points(self, count: int) -> List[Vector]:
        return [self._points[i % len(self._points)] for i in range(count)]

    def pairs(self, count: int) -> List[Tuple[Vector, Vector]]:
        pts = self._points
        return [(pts[i % len(pts)], pts[(i + 1) % len(pts)]) for i in range(count)]

    def __len__(self) -> int:
        return len(self._points)


def _split(total: int, workers: int) -> List[int]:
    base, extra = divmod(total, workers)
    return [base + (1 if i < extra else 0) for i in range(workers)]


def _run_partitioned(sampler, total: int, workers: int, task: Callable):
    """Run task(sub_sampler, count) on independent substreams and collect results."""
    if workers <= 1:
        return [task(sampler, total)]
    subs = sampler.spawn(workers)
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(task, sub, count) for sub, count in zip(subs, _split(total, workers))]
        return [future.result() for future in futures]


def _merge(condition: str, parts: Sequence[dict], samples: int, tol: float, seed) -> CertificateReport:
    worst = max(parts, key=lambda p: p["worst"])
    ratios_hi = [p["max_ratio"] for p in parts if p["max_ratio"] is not None]
    ratios_lo = [p["min_ratio"] for p in parts if p["min_ratio"] is not None]
    return CertificateReport(
        condition=condition,
        samples=samples,
        worst_violation=float(worst["worst"]),
        tolerance=tol,
        seed=seed,
        witness=worst["witness"],
        max_ratio=max(ratios_hi) if ratios_hi else None,
        min_ratio=min(ratios_lo) if ratios_lo else None,
    )


def check_gradient_monotonicity(f: ObjectiveOracle, h: ObjectiveOracle, L: float, mu: float,
                                sampler, n_pairs: int = Config.CERT_SAMPLES, tol: float = Config.CERT_TOL,
                                workers: int = 1) -> CertificateReport:
    """mu <grad h(x) - grad h(y), x - y> <= <grad f(x) - grad f(y), x - y> <= L <...h...> on sampled pairs.

    Each violation is normalized by 1 + |<df, dx>| + L |<dh, dx>|.
    """
    if tol < 0:
        raise ConfigurationError("tolerance must be nonnegative")

    def task(sub, count):
        worst, witness = -math.inf, None
        hi, lo = -math.inf, math.inf
        for x, y in sub.pairs(count):
            dx = x - y
            df = float(np.dot(f.gradient(x) - f.gradient(y), dx))
            dh = float(np.dot(h.gradient(x) - h.gradient(y), dx))
            scale = 1.0 + abs(df) + L * abs(dh)
            violation = max(df - L * dh, mu * dh - df) / scale
            if violation > worst:
                worst, witness = violation, (x, y)
            if dh > 0:
                hi, lo = max(hi, df / dh), min(lo, df / dh)
        return {"worst": worst, "witness": witness,
                "max_ratio": hi if math.isfinite(hi) else None,
                "min_ratio": lo if math.isfinite(lo) else None}

    report = _merge("gradient-monotonicity", _run_partitioned(sampler, n_pairs, workers, task),
                    n_pairs, tol, getattr(sampler, "seed", None))
    logger.info("gradient monotonicity L=%g mu=%g: worst violation %.3e (%s)", L, mu,
                report.worst_violation, "pass" if report.passed else "fail")
    return report


def _hessian_of(oracle: ObjectiveOracle, x: Vector) -> Matrix:
    if oracle.has_hessian:
        return np.atleast_2d(oracle.hessian(x))
    H = fd_hessian(oracle.gradient, x)
    if not np.all(np.isfinite(H)):
        raise HessianUnavailableError(f"finite-difference Hessian of {type(oracle).__name__} is not finite")
    return H


def check_hessian_dominance(f: ObjectiveOracle, h: ObjectiveOracle, L: float, mu: float,
                            sampler, n_points: int = Config.CERT_SAMPLES, tol: float = Config.CERT_TOL,
                            workers: int = 1) -> CertificateReport:
    """mu hess h(x) <= hess f(x) <= L hess h(x) in the Loewner order at sampled points.

    Violations are minus the smallest eigenvalue of either gap matrix, normalized by
    1 + |hess f| + L |hess h|. The extreme generalized eigenvalues of
    (hess f, hess h) give the tightest L and mu seen on the sample.
    """
    def task(sub, count):
        worst, witness = -math.inf, None
        hi, lo = -math.inf, math.inf
        for x in sub.points(count):
            Hf, Hh = _hessian_of(f, x), _hessian_of(h, x)
            upper = float(np.linalg.eigvalsh(L * Hh - Hf).min())
            lower = float(np.linalg.eigvalsh(Hf - mu * Hh).min())
            scale = 1.0 + np.linalg.norm(Hf, 2) + L * np.linalg.norm(Hh, 2)
            violation = max(-upper, -lower) / scale
            if violation > worst:
                worst, witness = violation, x
            try:
                ratios = scipy.linalg.eigh(Hf, Hh, eigvals_only=True)
                hi, lo = max(hi, float(ratios.max())), min(lo, float(ratios.min()))
            except np.linalg.LinAlgError:
                logger.debug("reference Hessian not positive definite at a sample; ratio skipped")
        return {"worst": worst, "witness": witness,
                "max_ratio": hi if math.isfinite(hi) else None,
                "min_ratio": lo if math.isfinite(lo) else None}

    report = _merge("hessian-dominance", _run_partitioned(sampler, n_points, workers, task),
                    n_points, tol, getattr(sampler, "seed", None))
    logger.info("hessian dominance L=%g mu=%g: worst violation %.3e, ratio range [%s, %s]", L, mu,
                report.worst_violation, report.min_ratio, report.max_ratio)
    return report


def check_three_point_property(reference: ReferenceOracle, z: Vector, c: Vector, sampler,
                               n_points: int = 100, tol: float = Config.CERT_TOL) -> CertificateReport:
    """For z+ = argmin <c, x> + D_h(x, z): <c, x> + D_h(x, z) >= <c, z+> + D_h(z+, z) + D_h(x, z+)."""
    z = np.asarray(z, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    z_plus = reference.subproblem(c - reference.gradient(z))
    base = float(np.dot(c, z_plus)) + bregman_distance(reference, z_plus, z)
    worst, witness = -math.inf, None
    for x in sampler.points(n_points):
        lhs = float(np.dot(c, x)) + bregman_distance(reference, x, z)
        rhs = base + bregman_distance(reference, x, z_plus)
        violation = (rhs - lhs) / (1.0 + abs(lhs) + abs(rhs))
        if violation > worst:
            worst, witness = violation, x
    return CertificateReport("three-point", n_points, worst, tol, getattr(sampler, "seed", None), witness)


def eval_bound(q: BoundQuery) -> float:
    """Closed-form gap bound after k steps; mu = 0 geometric forms use the limit L D0 / k."""
    L, mu, k, D0 = q.L, q.mu, q.k, q.D0
    if not mu < L:
        raise ConfigurationError(f"bounds need mu < L, got mu={mu}, L={L}")
    which = BoundKind(q.which)
    if which in (BoundKind.PGS_GEOMETRIC, BoundKind.DA_GEOMETRIC):
        if mu == 0:
            return L * D0 / k
        with np.errstate(over="ignore"):
            return float(mu * D0 / np.expm1(k * math.log1p(mu / (L - mu))))
    if which in (BoundKind.PGS_SUBLINEAR, BoundKind.DA_SUBLINEAR):
        return (L - mu) / k * D0
    # PGS_LINEAR and DA_LINEAR share the form, with D0 taken per scheme
    return L * (1.0 - mu / L) ** k * D0


def dopt_iteration_bound(n: int, gap0: float, eps: float) -> int:
    """Steps after which f(x^k) - f* <= eps from x0 = e/n, for primal gradient and dual averaging."""
    if not 0 < eps <= gap0:
        raise PreconditionError(f"iteration bound needs 0 < eps <= f(x0) - f*, got eps={eps}, gap0={gap0}")
    return int(math.ceil(2.0 * n * math.log(2.0 * gap0 / eps) / eps))


def dopt_gap_bound(n: int, gap0: float, k: int) -> float:
    """min over delta in (0, 1] of n ln(1/delta)/k + delta gap0."""
    if k < 1:
        raise ConfigurationError("gap bound needs k >= 1")
    if gap0 <= 0:
        return 0.0
    delta = min(1.0, n / (k * gap0))
    return n * math.log(1.0 / delta) / k + delta * gap0


def _require_metadata(trace: IterateTrace) -> Tuple[float, float, str]:
    missing = [key for key in ("L", "mu", "algorithm") if key not in trace.metadata]
    if missing:
        raise ConfigurationError(f"trace metadata lacks {', '.join(missing)}")
    return float(trace.metadata["L"]), float(trace.metadata["mu"]), str(trace.metadata["algorithm"])


def initial_distance(pair: RelSmoothPair, x_star: Vector, x0: Vector, d0_kind: str) -> float:
    """D_h(x*, x0) ("bregman") or h(x*) - h(x0) ("shifted-h")."""
    if d0_kind == "bregman":
        return bregman_distance(pair.reference, x_star, x0)
    if d0_kind == "shifted-h":
        return max(pair.reference.value(x_star) - pair.reference.value(x0), 0.0)
    raise ConfigurationError(f"unknown D0 kind {d0_kind!r}")


def check_bound_on_trace(trace: IterateTrace, pair: RelSmoothPair, x_star: Vector,
                         d0_kind: Optional[str] = None, f_star: Optional[float] = None,
                         which: Optional[BoundKind] = None,
                         piece: Optional[CompositePiece] = None) -> CertificateReport:
    """Every recorded gap against its convergence bound, with slack 1e-9 (1 + |f*|).

    Composite traces record f + P, so their optimum is f(x*) + P(x*): pass the
    piece or an explicit f_star.
    """
    L, mu, algorithm = _require_metadata(trace)
    if algorithm == "cpgs" and piece is None and f_star is None:
        raise ConfigurationError("a composite trace needs its piece or an explicit f_star")
    is_da = algorithm == "das"
    d0_kind = d0_kind or ("shifted-h" if is_da else "bregman")
    which = which or (BoundKind.DA_GEOMETRIC if is_da else BoundKind.PGS_GEOMETRIC)
    x_star = np.asarray(x_star, dtype=np.float64)
    if f_star is None:
        f_star = pair.objective.value(x_star) + (0.0 if piece is None else piece.value(x_star))
    D0 = initial_distance(pair, x_star, trace.records[0].x, d0_kind)
    slack = Config.CERT_TOL * (1.0 + abs(f_star))
    worst, worst_margin, witness = -math.inf, math.inf, None
    samples = 0
    for record in trace.records:
        if record.k < 1:
            continue
        bound = eval_bound(BoundQuery(L, mu, record.k, D0, which))
        gap = record.f - f_star
        violation = gap - bound - slack
        samples += 1
        if violation > worst:
            worst, witness = violation, record.k
        worst_margin = min(worst_margin, bound - gap)
    report = CertificateReport(f"bound:{BoundKind(which).value}", samples, max(worst, 0.0) if samples else 0.0,
                               0.0, trace.metadata.get("seed"), witness, worst_margin=worst_margin)
    logger.info("bound check on %s trace: worst margin %.3e (%s)", algorithm, worst_margin,
                "pass" if report.passed else "fail")
    return report


def annotate_trace(trace: IterateTrace, f_star: float,
                   bound: Optional[Callable[[int], Optional[float]]] = None) -> IterateTrace:
    """Fill the gap and gap_bound columns in place."""
    for record in trace.records:
        record.gap = record.f - f_star
        if bound is not None and record.k >= 1:
            record.bound = bound(record.k)
    return trace
