"""
Problem-spec ingestion: JSON parsing, matrix loading and "auto" constant resolution.
"""

import json
import logging
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..core.config import Config
from ..core.domain import Matrix, Vector, as_vector
from ..core.exceptions import ConfigurationError, SpecParseError
from ..core.oracles import ObjectiveOracle, ReferenceOracle, RelSmoothPair
from ..models import ProblemSpec, ReferenceSpec
from .composite import CompositePiece, L1Piece, LinearPiece, ZeroPiece
from .objectives import (
    DOptimalDesign,
    L_from_polynomial_rn,
    PolyQuartic,
    UnivariatePolynomial,
    VolumetricObjective,
)
from .references import BoxPowerRef, LogBarrierSimplexRef, PowerNormRef, SquaredEuclideanRef

logger = logging.getLogger(__name__)

KINDS = ("dopt", "volumetric", "quartic", "custom-poly")
REFERENCE_TYPES = ("power-norm", "log-barrier", "box-power", "euclidean")
COMPOSITE_TYPES = ("zero", "linear", "l1")

_SPEC_FIELDS = {f.name for f in fields(ProblemSpec)}
_REFERENCE_FIELDS = {f.name for f in fields(ReferenceSpec)}


@dataclass
class Problem:
    """A spec turned into oracles, ready for the solvers."""
    spec: ProblemSpec
    pair: RelSmoothPair
    x0: Optional[Vector] = None
    piece: Optional[CompositePiece] = None
    H: Optional[Matrix] = None


def random_design_matrix(m: int, n: int, seed: int = Config.DEFAULT_SEED) -> Matrix:
    """H with standard normal entries drawn from a PCG64 stream."""
    if m < 1 or n < 1:
        raise ConfigurationError(f"matrix dimensions must be positive, got m={m}, n={n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal((m, n))


def parse_spec(text: str) -> ProblemSpec:
    """Parse the JSON text of a problem spec; syntax errors keep their line and column."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecParseError(f"invalid JSON: {e.msg}", line=e.lineno, column=e.colno) from e
    if not isinstance(raw, dict):
        raise SpecParseError("problem spec must be a JSON object", line=1, column=1)

    unknown = sorted(set(raw) - _SPEC_FIELDS)
    if unknown:
        raise SpecParseError(f"unknown spec fields: {', '.join(unknown)}")
    if "kind" not in raw:
        raise SpecParseError("problem spec needs a 'kind'")
    if raw["kind"] not in KINDS:
        raise SpecParseError(f"unknown kind {raw['kind']!r}; expected one of {', '.join(KINDS)}")

    reference = raw.get("reference")
    if reference is not None:
        if not isinstance(reference, dict) or "type" not in reference:
            raise SpecParseError("reference must be an object with a 'type'")
        extra = sorted(set(reference) - _REFERENCE_FIELDS)
        if extra:
            raise SpecParseError(f"unknown reference fields: {', '.join(extra)}")
        if reference["type"] not in REFERENCE_TYPES:
            raise SpecParseError(f"unknown reference type {reference['type']!r}")
        raw["reference"] = ReferenceSpec(**reference)

    composite = raw.get("composite")
    if composite is not None and (not isinstance(composite, dict) or composite.get("type") not in COMPOSITE_TYPES):
        raise SpecParseError(f"composite must be an object with type in {', '.join(COMPOSITE_TYPES)}")

    for key in ("L", "mu"):
        value = raw.get(key, "auto")
        if value != "auto" and not isinstance(value, (int, float)):
            raise SpecParseError(f"{key} must be a number or \"auto\", got {value!r}")

    try:
        return ProblemSpec(**raw)
    except TypeError as e:
        raise SpecParseError(str(e)) from e


def load_spec(path: Union[str, Path]) -> ProblemSpec:
    """Read and parse a spec file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SpecParseError(f"cannot read spec file {path}: {e}") from e
    spec = parse_spec(text)
    # matrix file paths are taken relative to the working directory
    spec.matrices = {name: load_matrix(value) for name, value in spec.matrices.items()}
    return spec


def load_matrix(value: Any) -> Matrix:
    """Inline nested array, or a path to a dense text file whose first line is "rows cols".

    Relative paths resolve against the working directory.
    """
    if isinstance(value, np.ndarray):
        return value.astype(np.float64)
    if isinstance(value, list):
        try:
            M = np.array(value, dtype=np.float64)
        except ValueError as e:
            raise SpecParseError(f"ragged or non-numeric matrix: {e}") from e
        return np.atleast_2d(M)
    if not isinstance(value, str):
        raise SpecParseError(f"matrix must be an array or a file path, got {type(value).__name__}")

    path = Path(value)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise SpecParseError(f"cannot read matrix file {path}: {e}") from e
    if not lines:
        raise SpecParseError(f"matrix file {path} is empty", line=1, column=1)
    header = lines[0].split()
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise SpecParseError(f"matrix file {path} needs a 'rows cols' header", line=1, column=1)
    rows, cols = int(header[0]), int(header[1])
    try:
        data = np.loadtxt(lines[1:], dtype=np.float64, ndmin=2)
    except ValueError as e:
        raise SpecParseError(f"bad matrix data in {path}: {e}") from e
    if data.shape != (rows, cols):
        raise SpecParseError(f"matrix file {path} declares {rows}x{cols} but holds {data.shape[0]}x{data.shape[1]}")
    return data


def _matrix(spec: ProblemSpec, name: str, required: bool = True) -> Optional[Matrix]:
    if name in spec.matrices:
        return load_matrix(spec.matrices[name])
    if required:
        raise SpecParseError(f"{spec.kind} spec needs matrix {name!r}")
    return None


def _vector(spec: ProblemSpec, name: str) -> Vector:
    if name not in spec.vectors:
        raise SpecParseError(f"{spec.kind} spec needs vector {name!r}")
    return as_vector(spec.vectors[name])


def _design_matrix(spec: ProblemSpec) -> Matrix:
    H = _matrix(spec, "H", required=False)
    if H is not None:
        return H
    dims = spec.dimensions
    if "m" not in dims or "n" not in dims:
        raise SpecParseError(f"{spec.kind} spec needs matrix 'H' or dimensions m and n")
    logger.info("generating %dx%d design matrix from seed %d", dims["m"], dims["n"], spec.seed)
    return random_design_matrix(int(dims["m"]), int(dims["n"]), spec.seed)


def build_reference(ref: ReferenceSpec, dim: int) -> ReferenceOracle:
    if ref.type == "power-norm":
        return PowerNormRef(dim, ref.r, ref.center)
    if ref.type == "log-barrier":
        return LogBarrierSimplexRef(dim)
    if ref.type == "box-power":
        return BoxPowerRef(dim, ref.s, ref.u)
    if ref.type == "euclidean":
        return SquaredEuclideanRef(dim)
    raise SpecParseError(f"unknown reference type {ref.type!r}")


def build_piece(composite: Optional[Dict[str, Any]], dim: int) -> Optional[CompositePiece]:
    if composite is None:
        return None
    kind = composite["type"]
    if kind == "zero":
        return ZeroPiece()
    if kind == "linear":
        if "q" not in composite:
            raise SpecParseError("linear composite term needs 'q'")
        return LinearPiece(as_vector(composite["q"], dim))
    if "lambda" not in composite:
        raise SpecParseError("l1 composite term needs 'lambda'")
    return L1Piece(float(composite["lambda"]))


def _resolve(value: Any, auto: Optional[float], what: str, kind: str) -> float:
    if value != "auto":
        return float(value)
    if auto is None:
        raise ConfigurationError(f"{what}=\"auto\" has no formula for kind {kind!r}; give a number")
    return auto


def build_problem(spec: ProblemSpec) -> Problem:
    """Objective, reference, L and mu for a parsed spec."""
    H = None
    auto_L: Optional[float] = None
    auto_mu: Optional[float] = None
    objective: ObjectiveOracle

    if spec.kind in ("dopt", "volumetric"):
        H = _design_matrix(spec)
        if spec.kind == "dopt":
            objective = DOptimalDesign(H)
            auto_L, auto_mu = 1.0, 0.0
        else:
            objective = VolumetricObjective(H, spec.p)
            auto_L, auto_mu = float(spec.p * (spec.p + 1)), 0.0
        default_ref = ReferenceSpec("log-barrier")
    elif spec.kind == "quartic":
        objective = PolyQuartic(_matrix(spec, "A"), _vector(spec, "b"), _matrix(spec, "C"),
                                _vector(spec, "d"), _matrix(spec, "E", required=False))
        default_ref = ReferenceSpec("power-norm", r=2)
        ref_spec = spec.reference or default_ref
        if ref_spec.type == "power-norm" and ref_spec.r == 2 and ref_spec.center is None:
            auto_L = L_from_polynomial_rn(objective.polynomial_bound())
            auto_mu = objective.strong_convexity()
    else:
        if not spec.coefficients:
            raise SpecParseError("custom-poly spec needs 'coefficients'")
        objective = UnivariatePolynomial(spec.coefficients)
        default_ref = None

    ref_spec = spec.reference or default_ref
    if ref_spec is None:
        raise SpecParseError(f"{spec.kind} spec needs a 'reference'")
    dim = objective.domain.dim
    reference = build_reference(ref_spec, dim)
    L = _resolve(spec.L, auto_L, "L", spec.kind)
    mu = _resolve(spec.mu, auto_mu, "mu", spec.kind)
    pair = RelSmoothPair(objective, reference, L, mu)
    x0 = None if spec.x0 is None else as_vector(spec.x0, dim)
    logger.info("built %s problem: dim=%d, L=%.6g, mu=%.6g, reference=%s", spec.kind, dim, L, mu, ref_spec.type)
    return Problem(spec, pair, x0, build_piece(spec.composite, dim), H)
