"""
Services package initialization.
"""

from .rootfind import find_root, golden_section_maximize, solve_monotone
from .references import BoxPowerRef, LogBarrierSimplexRef, PowerNormRef, RadialReference, SquaredEuclideanRef
from .objectives import DOptimalDesign, PolyQuartic, UnivariatePolynomial, VolumetricObjective
from .composite import L1Piece, LinearPiece, ZeroPiece
from .solvers import composite_primal_gradient, dual_averaging, frank_wolfe_dopt, primal_gradient
from .certify import check_bound_on_trace, check_gradient_monotonicity, check_hessian_dominance, eval_bound
from .problem_loader import build_problem, load_spec
from .trace_io import write_report, write_trace
from .benchmark import bench_dopt

__all__ = [
    'find_root',
    'golden_section_maximize',
    'solve_monotone',
    'BoxPowerRef',
    'LogBarrierSimplexRef',
    'PowerNormRef',
    'RadialReference',
    'SquaredEuclideanRef',
    'DOptimalDesign',
    'PolyQuartic',
    'UnivariatePolynomial',
    'VolumetricObjective',
    'L1Piece',
    'LinearPiece',
    'ZeroPiece',
    'composite_primal_gradient',
    'dual_averaging',
    'frank_wolfe_dopt',
    'primal_gradient',
    'check_bound_on_trace',
    'check_gradient_monotonicity',
    'check_hessian_dominance',
    'eval_bound',
    'build_problem',
    'load_spec',
    'write_report',
    'write_trace',
    'bench_dopt',
]
