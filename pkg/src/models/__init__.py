"""
Core data models for the relative-smoothness toolkit.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..core.config import Config
from ..core.exceptions import ConfigurationError


@dataclass
class Bracket:
    """Search interval for a monotone scalar equation; hi may be +inf."""
    lo: float
    hi: float = math.inf
    f_lo: Optional[float] = None
    f_hi: Optional[float] = None

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ConfigurationError(f"bracket requires lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.hi)


@dataclass
class SubproblemResult:
    """Minimizer of a linearized subproblem with its scalar-root diagnostics."""
    x: np.ndarray
    root_residual: float = 0.0
    theta: Optional[float] = None


@dataclass(frozen=True)
class PolynomialBound:
    """Polynomial p(alpha) = sum a_i alpha^i bounding the Hessian norm."""
    coefficients: Tuple[float, ...]

    def __post_init__(self):
        if len(self.coefficients) == 0:
            raise ConfigurationError("polynomial bound needs at least one coefficient")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, alpha: float) -> float:
        return float(sum(a * alpha ** i for i, a in enumerate(self.coefficients)))


@dataclass
class SolverConfig:
    """Run parameters shared by every solver."""
    max_iters: int = 1000
    record_every: Optional[int] = None
    target_gap: Optional[float] = None
    f_star: Optional[float] = None
    seed: int = Config.DEFAULT_SEED
    timings: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ConfigurationError("max_iters must be at least 1")
        if self.record_every is not None and self.record_every < 1:
            raise ConfigurationError("record_every must be at least 1")

    def should_record(self, k: int) -> bool:
        """Row schedule: explicit stride, else dense then sparse."""
        if k == 0 or k == self.max_iters:
            return True
        if self.record_every is not None:
            return k % self.record_every == 0
        return k <= Config.DENSE_RECORD_UNTIL or k % Config.SPARSE_RECORD_EVERY == 0

    def target_reached(self, f_value: float) -> bool:
        if self.target_gap is None or self.f_star is None:
            return False
        return f_value - self.f_star <= self.target_gap


@dataclass
class TraceRecord:
    """One recorded iteration."""
    k: int
    x: np.ndarray
    f: float
    raw_f: float
    root_residual: float = 0.0
    wall_ns: Optional[int] = None
    gap: Optional[float] = None
    bound: Optional[float] = None


@dataclass
class IterateTrace:
    """Recorded iterates of one solver run plus run metadata."""
    metadata: Dict[str, Any] = field(default_factory=dict)
    records: List[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord) -> None:
        if not math.isfinite(record.f):
            raise ConfigurationError(f"non-finite objective value recorded at k={record.k}")
        if self.records and record.k <= self.records[-1].k:
            raise ConfigurationError("trace indices must increase")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    @property
    def iterations(self) -> List[int]:
        return [r.k for r in self.records]

    @property
    def f_values(self) -> np.ndarray:
        return np.array([r.f for r in self.records])

    @property
    def raw_f_values(self) -> np.ndarray:
        return np.array([r.raw_f for r in self.records])

    def to_frame(self) -> pd.DataFrame:
        """Tabular view with the trace file columns."""
        return pd.DataFrame({
            "iter": pd.array([r.k for r in self.records], dtype="Int64"),
            "f": [r.f for r in self.records],
            "gap": pd.Series([r.gap for r in self.records], dtype="float64"),
            "gap_bound": pd.Series([r.bound for r in self.records], dtype="float64"),
            "root_residual": [r.root_residual for r in self.records],
            "wall_ns": pd.array([r.wall_ns for r in self.records], dtype="Int64"),
        })


@dataclass
class CertificateReport:
    """Outcome of a sampled relative-smoothness or bound check."""
    condition: str
    samples: int
    worst_violation: float
    tolerance: float
    seed: Optional[int] = None
    witness: Optional[Any] = None
    max_ratio: Optional[float] = None
    min_ratio: Optional[float] = None
    worst_margin: Optional[float] = None
    label: str = "sampled certificate"

    @property
    def passed(self) -> bool:
        return self.worst_violation <= self.tolerance

    def to_dict(self) -> Dict[str, Any]:
        """Convert report to a JSON-ready dictionary."""
        witness = self.witness
        if isinstance(witness, np.ndarray):
            witness = witness.tolist()
        elif isinstance(witness, tuple):
            witness = [np.asarray(w).tolist() for w in witness]
        return {
            "condition": self.condition,
            "samples": self.samples,
            "worst_violation": self.worst_violation,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "label": self.label,
            "seed": self.seed,
            "witness": witness,
            "max_ratio": self.max_ratio,
            "min_ratio": self.min_ratio,
            "worst_margin": self.worst_margin,
        }


class BoundKind(str, Enum):
    """Closed-form convergence bounds for the primal gradient (pgs) and dual averaging (da) schemes."""
    PGS_GEOMETRIC = "pgs-geometric"
    PGS_SUBLINEAR = "pgs-sublinear"
    PGS_LINEAR = "pgs-linear"
    DA_GEOMETRIC = "da-geometric"
    DA_SUBLINEAR = "da-sublinear"
    DA_LINEAR = "da-linear"


@dataclass(frozen=True)
class BoundQuery:
    """Inputs of one bound evaluation; D0 is D_h(x, x0) for pgs and the shifted h(x) for da."""
    L: float
    mu: float
    k: int
    D0: float
    which: BoundKind

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError("bound queries need k >= 1")
        if self.D0 < 0:
            raise ConfigurationError("D0 must be nonnegative")
        if not 0 <= self.mu < self.L:
            raise ConfigurationError(f"bounds need 0 <= mu < L, got mu={self.mu}, L={self.L}")


@dataclass
class ReferenceSpec:
    """Reference-function choice inside a problem spec."""
    type: str
    r: int = 2
    center: Optional[List[float]] = None
    s: int = 0
    u: float = 1.0


@dataclass
class ProblemSpec:
    """Parsed problem description."""
    kind: str
    dimensions: Dict[str, int] = field(default_factory=dict)
    matrices: Dict[str, Any] = field(default_factory=dict)
    vectors: Dict[str, List[float]] = field(default_factory=dict)
    reference: Optional[ReferenceSpec] = None
    L: Any = "auto"
    mu: Any = "auto"
    p: int = 1
    coefficients: Optional[List[float]] = None
    x0: Optional[List[float]] = None
    composite: Optional[Dict[str, Any]] = None
    seed: int = Config.DEFAULT_SEED
    f_star: Optional[float] = None
