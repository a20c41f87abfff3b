"""
Command-line front end: solve, certify and bench-dopt.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import List, Optional

from ..core.config import Config
from ..core.exceptions import (
    ConfigurationError,
    DimensionMismatchError,
    DomainMismatchError,
    DomainViolationError,
    HessianUnavailableError,
    NumericalError,
    SolverAbortedError,
    SpecParseError,
    SubproblemError,
)
from ..core.logging_setup import configure_logging
from ..models import IterateTrace, SolverConfig
from ..services.benchmark import bench_dopt
from ..services.certify import DomainSampler, annotate_trace, check_gradient_monotonicity, check_hessian_dominance
from ..services.composite import ZeroPiece
from ..services.problem_loader import Problem, build_problem, load_spec
from ..services.solvers import composite_primal_gradient, dual_averaging, frank_wolfe_dopt, primal_gradient
from ..services.trace_io import write_report, write_trace

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_CERTIFICATE = 4

INPUT_ERRORS = (SpecParseError, ConfigurationError, DomainViolationError, DomainMismatchError,
                DimensionMismatchError)
SOLVER_ERRORS = (NumericalError, SubproblemError)


def _fail(message: str, code: int) -> int:
    print(f"❌ {message}", file=sys.stderr)
    return code


def _describe(exc: Exception) -> str:
    if isinstance(exc, SpecParseError):
        return f"spec error: {exc}"
    return str(exc)


def _load(args: argparse.Namespace) -> Problem:
    spec = load_spec(args.spec)
    if getattr(args, "seed", None) is not None:
        spec.seed = args.seed
    return build_problem(spec)


def _run_solver(problem: Problem, algo: str, cfg: SolverConfig) -> IterateTrace:
    pair = problem.pair
    if algo == "pgs":
        return primal_gradient(pair, problem.x0, cfg)
    if algo == "cpgs":
        return composite_primal_gradient(pair, problem.piece or ZeroPiece(), problem.x0, cfg)
    if algo == "das":
        return dual_averaging(pair, cfg)
    return frank_wolfe_dopt(problem.H, problem.x0, cfg)


def cmd_solve(args: argparse.Namespace) -> int:
    """Run one solver on a spec and write its trace."""
    try:
        problem = _load(args)
        cfg = SolverConfig(max_iters=args.iters, seed=problem.spec.seed, timings=args.timings)
        if args.algo == "fw" and problem.spec.kind != "dopt":
            raise ConfigurationError(f"fw needs a dopt spec, got kind {problem.spec.kind!r}")
    except INPUT_ERRORS as e:
        return _fail(_describe(e), EXIT_INPUT)
    except SOLVER_ERRORS as e:
        return _fail(f"could not build problem: {e}", EXIT_SOLVER)

    start = time.perf_counter()
    try:
        trace = _run_solver(problem, args.algo, cfg)
    except SolverAbortedError as e:
        if e.trace is not None and len(e.trace) > 0:
            write_trace(e.trace, args.out)
            print(f"⚠️ partial trace with {len(e.trace)} rows written to {args.out}", file=sys.stderr)
        return _fail(str(e), EXIT_SOLVER)
    except INPUT_ERRORS as e:
        return _fail(str(e), EXIT_INPUT)
    except SOLVER_ERRORS as e:
        return _fail(str(e), EXIT_SOLVER)
    elapsed = time.perf_counter() - start

    if problem.spec.f_star is not None:
        annotate_trace(trace, float(problem.spec.f_star))
    write_trace(trace, args.out)
    print(f"✅ {args.algo}: {trace.final.k} iterations, final f = {trace.final.f:.12g}, "
          f"wall time {elapsed:.3f} s, trace {args.out}")
    return EXIT_OK


def cmd_certify(args: argparse.Namespace) -> int:
    """Sampled relative-smoothness certificates for a spec's L and mu."""
    try:
        problem = _load(args)
        pair = problem.pair
        seed = problem.spec.seed
        workers = args.workers or Config.CERT_WORKERS
        reports = [check_gradient_monotonicity(pair.objective, pair.reference, pair.L, pair.mu,
                                               DomainSampler(pair.domain, seed), args.samples, workers=workers)]
        if pair.objective.has_hessian and pair.reference.has_hessian:
            reports.append(check_hessian_dominance(pair.objective, pair.reference, pair.L, pair.mu,
                                                   DomainSampler(pair.domain, seed), args.samples,
                                                   workers=workers))
    except INPUT_ERRORS as e:
        return _fail(_describe(e), EXIT_INPUT)
    except (NumericalError, SubproblemError, HessianUnavailableError) as e:
        return _fail(f"certificate evaluation failed: {e}", EXIT_SOLVER)

    passed = all(report.passed for report in reports)
    write_report({
        "spec": str(args.spec),
        "kind": problem.spec.kind,
        "L": pair.L,
        "mu": pair.mu,
        "seed": seed,
        "prng": Config.PRNG_NAME,
        "pass": passed,
        "reports": [report.to_dict() for report in reports],
    }, args.out)

    for report in reports:
        mark = "✅" if report.passed else "❌"
        print(f"{mark} {report.condition}: {report.samples} samples, worst violation {report.worst_violation:.3e}")
    return EXIT_OK if passed else EXIT_CERTIFICATE


def cmd_bench_dopt(args: argparse.Namespace) -> int:
    """Random D-optimal comparison; writes pgs.csv, das.csv, fw.csv and report.json."""
    seed = Config.DEFAULT_SEED if args.seed is None else args.seed
    try:
        report = bench_dopt(args.m, args.n, args.eps, seed, args.out, timings=args.timings)
    except INPUT_ERRORS as e:
        return _fail(_describe(e), EXIT_INPUT)
    except (SolverAbortedError,) + SOLVER_ERRORS as e:
        return _fail(str(e), EXIT_SOLVER)

    print(f"📊 f* = {report['oracle']['f_star']:.12g}, f(x0) - f* = {report['gap0']:.6g} "
          f"(m ln(n/m) = {report['log_bound']:.6g}), predicted k = {report['k_bound']}")
    for name, entry in report["solvers"].items():
        hit = entry["iterations_to_eps"]
        print(f"   {name}: reaches eps at k = {hit if hit is not None else 'never'}, "
              f"final gap {entry['final_gap']:.3e}")
    if not report["bound_applicable"]:
        print("✅ x0 is already within eps; k = 0 suffices")
    if not report["pass"]:
        return _fail("benchmark verification failed; see report.json", EXIT_CERTIFICATE)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relsmooth", description="Relative-smoothness optimization toolkit")
    parser.add_argument("--log-level", default=None, help="logging level (default from RELSMOOTH_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run a solver and write a CSV trace")
    solve.add_argument("--spec", required=True, type=Path)
    solve.add_argument("--algo", choices=("pgs", "das", "cpgs", "fw"), default="pgs")
    solve.add_argument("--iters", type=int, default=1000,
                       help="iterations to run; the trace starts at k = 0, so up to iters + 1 rows")
    solve.add_argument("--seed", type=int, default=None, help="overrides the spec's seed")
    solve.add_argument("--out", type=Path, default=Path("trace.csv"))
    solve.add_argument("--timings", action="store_true", help="fill the wall_ns column")
    solve.set_defaults(handler=cmd_solve)

    certify = sub.add_parser("certify", help="sampled relative-smoothness certificates")
    certify.add_argument("--spec", required=True, type=Path)
    certify.add_argument("--samples", type=int, default=Config.CERT_SAMPLES)
    certify.add_argument("--seed", type=int, default=None, help="overrides the spec's seed")
    certify.add_argument("--out", type=Path, default=Path("certificate.json"))
    certify.add_argument("--workers", type=int, default=None)
    certify.set_defaults(handler=cmd_certify)

    bench = sub.add_parser("bench-dopt", help="compare pgs, das and fw on random D-optimal design")
    bench.add_argument("--m", type=int, default=3)
    bench.add_argument("--n", type=int, default=10)
    bench.add_argument("--eps", type=float, default=0.01)
    bench.add_argument("--seed", type=int, default=None)
    bench.add_argument("--out", type=Path, default=Path("bench"))
    bench.add_argument("--timings", action="store_true", help="fill the wall_ns column")
    bench.set_defaults(handler=cmd_bench_dopt)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    if getattr(args, "iters", 1) < 1 or getattr(args, "samples", 1) < 1:
        return _fail("--iters and --samples must be at least 1", EXIT_INPUT)
    return args.handler(args)
