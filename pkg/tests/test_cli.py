"""End-to-end tests of the relsmooth command line and the D-optimal benchmark."""

import json
import math

import numpy as np
import pytest

from src.models import IterateTrace, TraceRecord
from src.services.benchmark import bench_dopt, first_hit, oracle_optimum
from src.services.objectives import DOptimalDesign
from src.services.problem_loader import random_design_matrix
from src.services.trace_io import read_trace
from src.ui.cli import EXIT_CERTIFICATE, EXIT_INPUT, EXIT_OK, build_parser, main
from tests.conftest import QUARTIC_COEFFICIENTS

DOPT_SPEC = {"kind": "dopt", "dimensions": {"m": 3, "n": 10}, "seed": 0}
RECENTERED_QUARTIC = {
    "kind": "custom-poly",
    "coefficients": QUARTIC_COEFFICIENTS,
    "reference": {"type": "power-norm", "r": 2, "center": [1.0]},
    "L": 4,
    "mu": 0,
    "x0": [5.0],
}


class TestSolve:

    def test_malformed_spec(self, tmp_path, write_spec, capsys):
        spec = write_spec('{"kind": "dopt",\n  "dimensions": }')
        out = tmp_path / "trace.csv"
        assert main(["solve", "--spec", str(spec), "--out", str(out)]) == EXIT_INPUT
        assert not out.exists()
        assert "line 2" in capsys.readouterr().err

    def test_pgs_trace(self, tmp_path, write_spec):
        out = tmp_path / "trace.csv"
        code = main(["solve", "--spec", str(write_spec(DOPT_SPEC)), "--algo", "pgs", "--iters", "500",
                     "--out", str(out)])
        assert code == EXIT_OK
        frame = read_trace(out)
        assert list(frame["iter"]) == list(range(501))
        f = frame["f"].to_numpy()
        assert np.all(np.diff(f) <= 1e-12 * np.maximum(1.0, np.abs(f[:-1])))
        assert frame["gap"].isna().all()
        assert frame["wall_ns"].isna().all()

    def test_timings_and_known_optimum(self, tmp_path, write_spec):
        out = tmp_path / "trace.csv"
        spec = write_spec(dict(DOPT_SPEC, f_star=-100.0))
        assert main(["solve", "--spec", str(spec), "--iters", "5", "--timings", "--out", str(out)]) == EXIT_OK
        frame = read_trace(out)
        assert frame["wall_ns"].notna().all()
        np.testing.assert_allclose(frame["gap"], frame["f"] + 100.0)

    @pytest.mark.parametrize("algo", ["das", "cpgs", "fw"])
    def test_other_algorithms(self, tmp_path, write_spec, algo):
        out = tmp_path / f"{algo}.csv"
        code = main(["solve", "--spec", str(write_spec(DOPT_SPEC)), "--algo", algo, "--iters", "50",
                     "--out", str(out)])
        assert code == EXIT_OK
        assert len(read_trace(out)) == 51

    def test_frank_wolfe_needs_dopt(self, tmp_path, write_spec):
        out = tmp_path / "trace.csv"
        code = main(["solve", "--spec", str(write_spec(RECENTERED_QUARTIC)), "--algo", "fw", "--out", str(out)])
        assert code == EXIT_INPUT
        assert not out.exists()

    def test_recentered_quartic(self, tmp_path, write_spec, quartic_1d):
        out = tmp_path / "trace.csv"
        code = main(["solve", "--spec", str(write_spec(RECENTERED_QUARTIC)), "--iters", "400", "--out", str(out)])
        assert code == EXIT_OK
        roots = np.roots([4.0, -12.0, 14.0, -5.0])
        x_star = float(roots[np.abs(roots.imag) < 1e-9].real[0])
        assert read_trace(out)["f"].iloc[-1] == pytest.approx(quartic_1d.value(np.array([x_star])), abs=1e-10)

    def test_iterations_must_be_positive(self, tmp_path, write_spec):
        assert main(["solve", "--spec", str(write_spec(DOPT_SPEC)), "--iters", "0",
                     "--out", str(tmp_path / "t.csv")]) == EXIT_INPUT

    def test_iters_help_mentions_row_count(self, capsys):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["solve", "--help"])
        assert "iters + 1 rows" in " ".join(capsys.readouterr().out.split())

    def test_parser_defaults(self):
        args = build_parser().parse_args(["bench-dopt"])
        assert (args.m, args.n, args.eps) == (3, 10, 0.01)


class TestCertify:

    def test_dopt_passes(self, tmp_path, write_spec):
        out = tmp_path / "cert.json"
        code = main(["certify", "--spec", str(write_spec(DOPT_SPEC)), "--samples", "300", "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["pass"] is True
        assert report["prng"] == "numpy.PCG64"
        assert {r["condition"] for r in report["reports"]} == {"gradient-monotonicity", "hessian-dominance"}

    def test_claimed_strong_convexity_fails(self, tmp_path, write_spec):
        out = tmp_path / "cert.json"
        spec = write_spec(dict(DOPT_SPEC, mu=0.5))
        code = main(["certify", "--spec", str(spec), "--samples", "100", "--out", str(out)])
        assert code == EXIT_CERTIFICATE
        report = json.loads(out.read_text(encoding="utf-8"))
        failed = [r for r in report["reports"] if not r["pass"]]
        assert failed and failed[0]["witness"] is not None

    def test_half_of_dopt_L_fails(self, tmp_path, write_spec):
        out = tmp_path / "cert.json"
        spec = write_spec(dict(DOPT_SPEC, L=0.5))
        code = main(["certify", "--spec", str(spec), "--samples", "1000", "--out", str(out)])
        if code == EXIT_OK:
            pytest.skip("no sampled pair or point separated L = 0.5 from the valid L = 1")
        assert code == EXIT_CERTIFICATE
        report = json.loads(out.read_text(encoding="utf-8"))
        assert report["L"] == 0.5
        assert any(r["witness"] is not None and not r["pass"] for r in report["reports"])

    def test_seed_override_is_recorded(self, tmp_path, write_spec):
        out = tmp_path / "cert.json"
        main(["certify", "--spec", str(write_spec(DOPT_SPEC)), "--samples", "20", "--seed", "11", "--out", str(out)])
        assert json.loads(out.read_text(encoding="utf-8"))["seed"] == 11


class TestBench:

    def test_single_row_oracle(self, tmp_path):
        out = tmp_path / "bench"
        code = main(["bench-dopt", "--m", "1", "--n", "5", "--eps", "0.05", "--seed", "2", "--out", str(out)])
        assert code == EXIT_OK
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        H = random_design_matrix(1, 5, 2)
        assert report["oracle"]["f_star"] == pytest.approx(-math.log(np.max(H[0] ** 2)), abs=1e-12)
        assert report["pass"] is True
        assert report["gap0"] <= report["log_bound"]
        pgs = read_trace(out / "pgs.csv")
        fw = read_trace(out / "fw.csv")
        assert pgs["gap_bound"].iloc[1:].notna().all()
        assert (pgs["gap"].iloc[1:] <= pgs["gap_bound"].iloc[1:] + 1e-9).all()
        assert fw["gap_bound"].isna().all()

    def test_initial_gap_within_log_bound(self):
        log_bound = 3 * math.log(10 / 3)
        for seed in range(20):
            H = random_design_matrix(3, 10, seed)
            f_star = oracle_optimum(H, 0.01, seed).final.f
            gap0 = DOptimalDesign(H).value(np.full(10, 0.1)) - f_star
            assert 0.0 <= gap0 <= log_bound + 1e-9

    def test_default_instance_passes(self):
        report = bench_dopt(3, 10, 0.01, seed=0)
        assert report["initial_gap_ok"]
        assert report["bound_applicable"]
        assert report["pass"] is True

    def test_deterministic_files(self, tmp_path):
        for name in ("a", "b"):
            bench_dopt(2, 6, 0.05, seed=4, out_dir=tmp_path / name)
        for name in ("pgs.csv", "das.csv", "fw.csv", "report.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_tolerance_above_initial_gap(self, tmp_path):
        report = bench_dopt(2, 6, 100.0, seed=1, out_dir=tmp_path)
        assert report["k_bound"] == 0
        assert report["bound_applicable"] is False
        assert not (tmp_path / "pgs.csv").exists()
        assert (tmp_path / "report.json").exists()

    def test_predicted_iterations_suffice(self):
        report = bench_dopt(2, 6, 0.05, seed=7)
        assert report["k_bound"] > 0
        for name in ("pgs", "das"):
            entry = report["solvers"][name]
            assert entry["within_eps_at_k_bound"]
            assert entry["iterations_to_eps"] is not None and entry["iterations_to_eps"] <= report["k_bound"]

    def test_needs_more_points_than_rows(self, tmp_path):
        assert main(["bench-dopt", "--m", "3", "--n", "3", "--out", str(tmp_path)]) == EXIT_INPUT

    def test_first_hit(self):
        trace = IterateTrace()
        for k, gap in enumerate([1.0, 0.5, 0.05, 0.2]):
            trace.append(TraceRecord(k, np.zeros(1), gap, gap, gap=gap))
        assert first_hit(trace, 0.1) == 2
        assert first_hit(trace, 0.01) is None
