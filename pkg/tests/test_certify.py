"""Tests for sampled smoothness certificates and the convergence bounds."""

import math

import numpy as np
import pytest

from src.core.domain import Domain
from src.core.exceptions import ConfigurationError, PreconditionError
from src.core.oracles import RelSmoothPair
from src.models import BoundKind, BoundQuery, IterateTrace, SolverConfig, TraceRecord
from src.services.certify import (
    DomainSampler,
    GridSampler,
    annotate_trace,
    check_bound_on_trace,
    check_gradient_monotonicity,
    check_hessian_dominance,
    check_three_point_property,
    dopt_gap_bound,
    dopt_iteration_bound,
    eval_bound,
    initial_distance,
)
from src.services.composite import LinearPiece
from src.services.objectives import (
    DOptimalDesign,
    L_from_polynomial_rn,
    PolyQuartic,
    QuadraticObjective,
    VolumetricObjective,
    mu_for_quartic_strong,
)
from src.services.references import LogBarrierSimplexRef, PowerNormRef, SquaredEuclideanRef
from src.services.solvers import composite_primal_gradient, dual_averaging, primal_gradient

QUARTIC_GRID = np.round(np.arange(-1000, 1201) * 0.01, 2)
SHARP_L = 9.0 + math.sqrt(73.0)
# root of f'(x) = 4x^3 - 12x^2 + 14x - 5
QUARTIC_MINIMIZER = float(next(r.real for r in np.roots([4.0, -12.0, 14.0, -5.0]) if abs(r.imag) < 1e-9))


@pytest.fixture
def h_centered():
    return PowerNormRef(1, r=2, center=np.array([1.0]))


@pytest.fixture
def h_plain():
    return PowerNormRef(1, r=2)


@pytest.fixture
def strong_quartic_pair(rng):
    f = PolyQuartic(rng.standard_normal((4, 3)), rng.standard_normal(4), rng.standard_normal((5, 3)),
                    rng.standard_normal(5), 0.5 * rng.standard_normal((3, 3)))
    mu = mu_for_quartic_strong(f.E, f.C)
    assert mu > 0
    return RelSmoothPair(f, PowerNormRef(3, r=2), L_from_polynomial_rn(f.polynomial_bound()), mu)


class TestSamplers:

    def test_same_seed_same_points(self):
        a = DomainSampler(Domain.unit_simplex(4), seed=7).points(5)
        b = DomainSampler(Domain.unit_simplex(4), seed=7).points(5)
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_simplex_points_are_interior(self):
        sampler = DomainSampler(Domain.unit_simplex(6), seed=1)
        for x in sampler.points(200):
            assert np.all(x > 0) and abs(x.sum() - 1.0) <= 1e-12

    def test_box_points_respect_upper_bound(self):
        for x in DomainSampler(Domain.open_box(3, 2.0), seed=1).points(200):
            assert np.all(x > 0) and np.all(x <= 2.0)

    def test_spawned_streams_differ(self):
        first, second = DomainSampler(Domain.all_space(2), seed=3).spawn(2)
        assert not np.array_equal(first.point(), second.point())

    def test_affine_preimage_not_sampled(self):
        with pytest.raises(ConfigurationError):
            DomainSampler(Domain.preimage(Domain.positive_orthant(2), np.eye(2)))

    def test_grid_pairs_are_neighbours(self):
        pairs = GridSampler([0.0, 1.0, 2.0]).pairs(2)
        assert [(float(x[0]), float(y[0])) for x, y in pairs] == [(0.0, 1.0), (1.0, 2.0)]


class TestGradientMonotonicity:

    def test_dopt_is_one_smooth(self, dopt_pair):
        report = check_gradient_monotonicity(dopt_pair.objective, dopt_pair.reference, 1.0, 0.0,
                                             DomainSampler(dopt_pair.domain, seed=0), 1000)
        assert report.passed
        assert report.samples == 1000

    def test_volumetric_p2(self, dopt_H):
        f = VolumetricObjective(dopt_H, 2)
        report = check_gradient_monotonicity(f, LogBarrierSimplexRef(10), 6.0, 0.0,
                                             DomainSampler(f.domain, seed=0), 1000)
        assert report.passed

    def test_quartic_with_polynomial_L(self, rng):
        f = PolyQuartic(rng.standard_normal((4, 3)), rng.standard_normal(4), rng.standard_normal((5, 3)),
                        rng.standard_normal(5))
        L = L_from_polynomial_rn(f.polynomial_bound())
        report = check_gradient_monotonicity(f, PowerNormRef(3, r=2), L, 0.0, DomainSampler(f.domain, seed=0), 1000)
        assert report.passed
        assert report.max_ratio <= L

    def test_workers_are_deterministic(self, dopt_pair):
        reports = [check_gradient_monotonicity(dopt_pair.objective, dopt_pair.reference, 1.0, 0.0,
                                               DomainSampler(dopt_pair.domain, seed=5), 400, workers=4)
                   for _ in range(2)]
        assert reports[0].worst_violation == reports[1].worst_violation
        assert reports[0].max_ratio == reports[1].max_ratio

    @pytest.mark.parametrize("name", ["dopt", "volumetric", "quartic"])
    def test_objective_is_smooth_relative_to_itself(self, name, dopt_H, rng):
        f = {
            "dopt": lambda: DOptimalDesign(dopt_H),
            "volumetric": lambda: VolumetricObjective(dopt_H, 2),
            "quartic": lambda: PolyQuartic(rng.standard_normal((4, 3)), rng.standard_normal(4),
                                           rng.standard_normal((5, 3)), rng.standard_normal(5)),
        }[name]()
        report = check_gradient_monotonicity(f, f, 1.0, 1.0, DomainSampler(f.domain, seed=0), 200)
        assert report.passed
        assert report.worst_violation == 0.0

    def test_too_small_L_on_grid(self, quartic_1d, h_plain):
        report = check_gradient_monotonicity(quartic_1d, h_plain, 4.0, 0.0, GridSampler(QUARTIC_GRID), len(QUARTIC_GRID))
        assert not report.passed
        assert report.witness is not None


class TestHessianDominance:

    def test_recentered_reference(self, quartic_1d, h_centered):
        report = check_hessian_dominance(quartic_1d, h_centered, 4.0, 0.0, GridSampler(QUARTIC_GRID),
                                         len(QUARTIC_GRID))
        assert report.passed
        assert report.max_ratio >= 3.99

    def test_sharp_constant_for_plain_reference(self, quartic_1d, h_plain):
        report = check_hessian_dominance(quartic_1d, h_plain, SHARP_L, 0.0, GridSampler(QUARTIC_GRID),
                                         len(QUARTIC_GRID))
        assert report.passed
        assert report.max_ratio <= SHARP_L

    def test_seventeen_fails_with_witness(self, quartic_1d, h_plain):
        report = check_hessian_dominance(quartic_1d, h_plain, 17.0, 0.0, GridSampler(QUARTIC_GRID),
                                         len(QUARTIC_GRID))
        assert not report.passed
        witness = report.witness
        assert -0.4 < float(witness[0]) < -0.2
        assert 17.0 * h_plain.hessian(witness)[0, 0] < quartic_1d.hessian(witness)[0, 0]
        assert report.to_dict()["pass"] is False

    def test_volumetric_p2_is_six_smooth(self, dopt_H):
        f = VolumetricObjective(dopt_H, 2)
        report = check_hessian_dominance(f, LogBarrierSimplexRef(10), 6.0, 0.0, DomainSampler(f.domain, seed=0), 200)
        assert report.passed
        assert report.samples == 200

    def test_dopt_has_no_relative_strong_convexity(self, dopt_pair):
        report = check_hessian_dominance(dopt_pair.objective, dopt_pair.reference, 1.0, 0.5,
                                         DomainSampler(dopt_pair.domain, seed=0), 50)
        assert not report.passed

    def test_dopt_hessian_dominance(self, dopt_pair):
        report = check_hessian_dominance(dopt_pair.objective, dopt_pair.reference, 1.0, 0.0,
                                         DomainSampler(dopt_pair.domain, seed=0), 200, workers=2)
        assert report.passed
        assert report.max_ratio <= 1.0 + 1e-9


class TestThreePoint:

    def test_log_barrier(self, rng):
        ref = LogBarrierSimplexRef(5)
        report = check_three_point_property(ref, rng.dirichlet(np.ones(5)), rng.standard_normal(5),
                                            DomainSampler(ref.domain, seed=2))
        assert report.passed

    def test_power_norm(self, rng):
        ref = PowerNormRef(3, r=3, center=rng.standard_normal(3))
        report = check_three_point_property(ref, rng.standard_normal(3), rng.standard_normal(3),
                                            DomainSampler(ref.domain, seed=2))
        assert report.passed


class TestBounds:

    @pytest.mark.parametrize("which, mu, expected", [
        (BoundKind.PGS_GEOMETRIC, 0.0, 1.5),
        (BoundKind.PGS_GEOMETRIC, 1.0, 1.0),
        (BoundKind.DA_GEOMETRIC, 1.0, 1.0),
        (BoundKind.PGS_SUBLINEAR, 1.0, 1.5),
        (BoundKind.PGS_LINEAR, 1.0, 1.5),
        (BoundKind.DA_SUBLINEAR, 1.0, 1.5),
        (BoundKind.DA_LINEAR, 1.0, 1.5),
    ])
    def test_values(self, which, mu, expected):
        k = 4 if mu == 0 else 2
        assert eval_bound(BoundQuery(2.0, mu, k, 3.0, which)) == pytest.approx(expected)

    def test_hand_values(self):
        assert eval_bound(BoundQuery(4.0, 0.0, 10, 2.0, BoundKind.PGS_SUBLINEAR)) == pytest.approx(0.8)
        assert eval_bound(BoundQuery(2.0, 1.0, 1, 1.0, BoundKind.PGS_GEOMETRIC)) == pytest.approx(1.0)

    def test_geometric_limit_as_mu_vanishes(self):
        limit = eval_bound(BoundQuery(1.0, 0.0, 10, 1.0, BoundKind.PGS_GEOMETRIC))
        assert limit == pytest.approx(0.1)
        errors = [abs(eval_bound(BoundQuery(1.0, mu, 10, 1.0, BoundKind.PGS_GEOMETRIC)) - limit) / limit
                  for mu in (1e-3, 1e-6, 1e-9)]
        assert errors[0] > errors[1] > errors[2]
        assert errors[2] <= 1e-7

    @pytest.mark.parametrize("geometric, linear", [
        (BoundKind.PGS_GEOMETRIC, BoundKind.PGS_LINEAR),
        (BoundKind.DA_GEOMETRIC, BoundKind.DA_LINEAR),
    ])
    def test_geometric_never_exceeds_linear_on_grid(self, geometric, linear):
        for L in np.linspace(1.0, 10.0, 10):
            for mu in L * np.linspace(0.05, 0.95, 10):
                for k in range(1, 201):
                    tight = eval_bound(BoundQuery(float(L), float(mu), k, 1.0, geometric))
                    loose = eval_bound(BoundQuery(float(L), float(mu), k, 1.0, linear))
                    assert tight <= loose * (1 + 1e-12)

    def test_geometric_never_exceeds_sublinear(self, rng):
        for _ in range(100):
            L = float(rng.uniform(1.0, 10.0))
            mu = float(rng.uniform(0.0, L * 0.99))
            k = int(rng.integers(1, 500))
            geometric = eval_bound(BoundQuery(L, mu, k, 1.0, BoundKind.PGS_GEOMETRIC))
            assert geometric <= eval_bound(BoundQuery(L, mu, k, 1.0, BoundKind.PGS_SUBLINEAR)) * (1 + 1e-12)

    def test_query_validation(self):
        with pytest.raises(ConfigurationError):
            BoundQuery(1.0, 1.0, 3, 1.0, BoundKind.PGS_GEOMETRIC)
        with pytest.raises(ConfigurationError):
            BoundQuery(1.0, 0.0, 0, 1.0, BoundKind.PGS_GEOMETRIC)

    def test_dopt_iteration_bound(self):
        assert dopt_iteration_bound(10, 1.0, 0.01) == 10597
        assert dopt_iteration_bound(10, 2.0, 0.01) == 11983
        assert dopt_gap_bound(10, 1.0, 10597) <= 0.01

    def test_dopt_iteration_bound_precondition(self):
        with pytest.raises(PreconditionError):
            dopt_iteration_bound(10, 0.5, 1.0)
        with pytest.raises(PreconditionError):
            dopt_iteration_bound(10, 0.5, 0.0)

    def test_dopt_gap_bound_small_k(self):
        assert dopt_gap_bound(10, 1.0, 5) == pytest.approx(1.0)
        assert dopt_gap_bound(10, 0.0, 5) == 0.0


class TestBoundOnTrace:

    def test_quartic_pgs(self, quartic_1d, h_centered):
        pair = RelSmoothPair(quartic_1d, h_centered, 4.0)
        trace = primal_gradient(pair, np.array([5.0]), SolverConfig(max_iters=300))
        x_star = primal_gradient(pair, np.array([5.0]), SolverConfig(max_iters=2000)).final.x
        report = check_bound_on_trace(trace, pair, x_star)
        assert report.passed
        assert report.samples == 300
        assert report.worst_margin >= -1e-9

    def test_dopt_pgs(self, dopt_pair):
        trace = primal_gradient(dopt_pair, cfg=SolverConfig(max_iters=300))
        x_star = primal_gradient(dopt_pair, cfg=SolverConfig(max_iters=3000)).final.x
        assert check_bound_on_trace(trace, dopt_pair, x_star).passed

    def test_dopt_dual_averaging(self, dopt_pair):
        trace = dual_averaging(dopt_pair, SolverConfig(max_iters=300))
        x_star = primal_gradient(dopt_pair, cfg=SolverConfig(max_iters=3000)).final.x
        report = check_bound_on_trace(trace, dopt_pair, x_star)
        assert report.condition == "bound:da-geometric"
        assert report.passed

    def test_dopt_dual_averaging_long_run(self, dopt_pair):
        trace = dual_averaging(dopt_pair, SolverConfig(max_iters=2000))
        x_star = primal_gradient(dopt_pair, cfg=SolverConfig(max_iters=5000)).final.x
        report = check_bound_on_trace(trace, dopt_pair, x_star)
        assert report.passed
        assert report.worst_margin >= -1e-9

    def test_dual_averaging_geometric_on_recentered_quartic(self, quartic_1d, h_centered):
        pair = RelSmoothPair(quartic_1d, h_centered, 4.0, 0.3)
        trace = dual_averaging(pair, SolverConfig(max_iters=400))
        report = check_bound_on_trace(trace, pair, np.array([QUARTIC_MINIMIZER]))
        assert report.condition == "bound:da-geometric"
        assert report.passed

    def test_pgs_linear_rate_on_strongly_convex_quartic(self, strong_quartic_pair, rng):
        pair = strong_quartic_pair
        x0 = rng.standard_normal(3)
        trace = primal_gradient(pair, x0, SolverConfig(max_iters=500))
        x_star = primal_gradient(pair, x0, SolverConfig(max_iters=5000)).final.x
        report = check_bound_on_trace(trace, pair, x_star, which=BoundKind.PGS_LINEAR)
        assert report.condition == "bound:pgs-linear"
        assert report.samples == 500
        assert report.passed

    def test_dual_averaging_linear_rate_on_strongly_convex_quartic(self, strong_quartic_pair):
        pair = strong_quartic_pair
        trace = dual_averaging(pair, SolverConfig(max_iters=500))
        x_star = primal_gradient(pair, cfg=SolverConfig(max_iters=5000)).final.x
        report = check_bound_on_trace(trace, pair, x_star, which=BoundKind.DA_LINEAR)
        assert report.condition == "bound:da-linear"
        assert report.passed

    def test_half_of_a_valid_L_is_caught(self):
        pair = RelSmoothPair(QuadraticObjective(2.0 * np.eye(2)), SquaredEuclideanRef(2), 2.0)
        x0 = np.array([1.0, -2.0])
        cfg = SolverConfig(max_iters=20)
        assert check_bound_on_trace(primal_gradient(pair, x0, cfg), pair, np.zeros(2)).passed
        # with L = 1 every step overshoots to -x, so the gap stays at f(x0)
        halved = pair.with_constants(1.0, 0.0)
        report = check_bound_on_trace(primal_gradient(halved, x0, cfg), halved, np.zeros(2))
        assert not report.passed
        assert report.witness == 20
        assert report.worst_margin < 0

    def test_composite_trace_is_measured_with_its_piece(self, dopt_pair, rng):
        piece = LinearPiece(rng.standard_normal(10))
        trace = composite_primal_gradient(dopt_pair, piece, cfg=SolverConfig(max_iters=300))
        x_star = composite_primal_gradient(dopt_pair, piece, cfg=SolverConfig(max_iters=3000)).final.x
        report = check_bound_on_trace(trace, dopt_pair, x_star, piece=piece)
        assert report.passed
        f_star = dopt_pair.objective.value(x_star) + piece.value(x_star)
        assert check_bound_on_trace(trace, dopt_pair, x_star, f_star=f_star).worst_margin == report.worst_margin

    def test_composite_trace_needs_piece_or_optimum(self, dopt_pair):
        trace = composite_primal_gradient(dopt_pair, LinearPiece(np.ones(10)), cfg=SolverConfig(max_iters=5))
        with pytest.raises(ConfigurationError):
            check_bound_on_trace(trace, dopt_pair, np.full(10, 0.1))

    def test_shifted_h_equals_bregman_at_uniform_start(self, dopt_pair, rng):
        x0 = np.full(10, 0.1)
        x = rng.dirichlet(np.ones(10))
        assert initial_distance(dopt_pair, x, x0, "shifted-h") == pytest.approx(
            initial_distance(dopt_pair, x, x0, "bregman"), rel=1e-9)

    def test_metadata_required(self, dopt_pair):
        trace = IterateTrace()
        trace.append(TraceRecord(0, np.full(10, 0.1), 1.0, 1.0))
        with pytest.raises(ConfigurationError):
            check_bound_on_trace(trace, dopt_pair, np.full(10, 0.1))

    def test_annotate_trace(self, dopt_pair):
        trace = primal_gradient(dopt_pair, cfg=SolverConfig(max_iters=5))
        annotate_trace(trace, -10.0, bound=lambda k: 1.0 / k)
        assert trace.records[0].bound is None
        assert trace.records[2].bound == 0.5
        assert trace.records[3].gap == pytest.approx(trace.records[3].f + 10.0)
