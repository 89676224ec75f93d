"""Experiment drivers: row structure, verdict logic and determinism."""

import numpy as np
import pytest

from burgers_harnack.experiments import (ExperimentGrid, run_bilinear_scan,
                                         run_convergence, run_energy_identity,
                                         run_exp_moment, run_irreducibility,
                                         run_log_harnack_grid, run_mixing,
                                         run_strong_feller)
from burgers_harnack.noise import NoiseSpec
from burgers_harnack.reports import InequalityReport, make_report
from burgers_harnack.sde import SimConfig


def small_cfg(**kw):
    base = dict(nu=2.0, m=8, dt=5e-3, t_end=1.0, seed=42)
    base.update(kw)
    return SimConfig(**base)


SMALL_Q = NoiseSpec.power_law(8)


class TestReports:
    def test_margin_and_verdicts(self):
        r = make_report("x", {}, 1.0, 0.1, 2.0, 0.0)
        assert r.margin == pytest.approx(1.0)
        assert r.verdict == "pass"
        assert make_report("x", {}, 2.0, 0.1, 1.0, 0.0).verdict == "fail"
        # a small negative margin within 3 sigma still passes
        assert make_report("x", {}, 1.2, 0.1, 1.0, 0.0).verdict == "pass"
        # two-sided mode rejects excursions in either direction
        assert make_report("x", {}, 0.0, 0.01, 1.0, 0.0, two_sided=True).verdict == "fail"
        assert make_report("x", {}, 1.001, 0.01, 1.0, 0.0, two_sided=True).verdict == "pass"

    def test_slack_loosens_two_sided(self):
        tight = make_report("x", {}, 0.0, 0.0, 1.0, 0.0, two_sided=True)
        loose = make_report("x", {}, 0.0, 0.0, 1.0, 0.0, two_sided=True, slack=1.5)
        assert tight.verdict == "fail" and loose.verdict == "pass"


class TestBilinearScan:
    def test_all_rows_pass(self):
        rows = run_bilinear_scan(200, m=16, seed=1)
        assert len(rows) == 202  # analytic pair + 200 random + skew summary
        assert all(r.verdict == "pass" for r in rows)

    def test_analytic_ratio_row(self):
        row = run_bilinear_scan(1, m=16)[0]
        assert row.params["case"] == "sin_pair"
        assert row.params["ratio"] == pytest.approx(1.0 / (4.0 * np.pi ** 2), abs=1e-12)
        assert row.left <= 1e-10

    def test_skew_row_absolute(self):
        rows = run_bilinear_scan(50, m=16, seed=2)
        skew = rows[-1]
        assert skew.params["case"] == "skew"
        assert skew.left <= 1e-10

    def test_deterministic_in_seed(self):
        a = run_bilinear_scan(20, m=8, seed=5)
        b = run_bilinear_scan(20, m=8, seed=5)
        assert [(r.left, r.right) for r in a] == [(r.left, r.right) for r in b]


class TestEnergyIdentity:
    def test_rows_and_extrapolation(self):
        cfg = small_cfg(dt=1e-3, t_end=0.25)
        rows = run_energy_identity(cfg, SMALL_Q, n=2000)
        assert [r.params["dt"] for r in rows] == [1e-3, 5e-4, "extrapolated"]
        assert all(r.right == rows[0].right for r in rows)
        assert rows[2].verdict == "pass"
        # extrapolated value is the Richardson combination of the two levels
        assert rows[2].left == pytest.approx(2.0 * rows[1].left - rows[0].left)


class TestLogHarnackGrid:
    def test_row_count_and_passes(self):
        grid = ExperimentGrid(times=(0.25, 0.5), displacements=(0.0, 0.1))
        rows = run_log_harnack_grid(small_cfg(t_end=0.5), SMALL_Q, grid=grid, n=1500)
        assert len(rows) == 2 * 2 * 2  # times x displacements x test functions
        assert all(r.verdict == "pass" for r in rows)
        for r in rows:
            if r.params["alpha"] == 0.0:
                assert r.params["C"] == 0.0

    def test_inadmissible_rejected(self):
        bad = NoiseSpec(8, np.full(8, 3.0))
        with pytest.raises(ValueError, match="inadmissible"):
            run_log_harnack_grid(small_cfg(nu=1.0), bad, n=10)


class TestExpMoment:
    def test_single_row(self):
        rows = run_exp_moment(small_cfg(dt=1e-3, t_end=0.1), SMALL_Q,
                              times=(0.1,), n=2000)
        assert len(rows) == 1
        assert rows[0].verdict == "pass"
        assert rows[0].params["max_exponent"] < np.log(np.finfo(float).max)


class TestConvergence:
    def test_monotone_rows(self):
        cfg = small_cfg(m=16, t_end=0.25)
        rows = run_convergence(cfg, NoiseSpec.power_law, ms=(4, 8, 16), n=300)
        med = [r for r in rows if r.params["metric"] == "median_gap"]
        ptf = [r for r in rows if r.params["metric"] == "ptf_gap"]
        assert [r.params["m"] for r in med] == [4, 8, 16]
        assert all(r.verdict == "pass" for r in rows)
        gaps = [r.left for r in med]
        assert gaps == sorted(gaps, reverse=True)
        assert len(ptf) == 3


class TestProbes:
    def test_irreducibility(self):
        rows = run_irreducibility(small_cfg(t_end=0.5), SMALL_Q, n=1500)
        assert len(rows) == 1
        assert rows[0].right > 0.0  # Wilson lower bound
        assert rows[0].verdict == "pass"
        assert rows[0].params["wilson_high"] >= rows[0].right

    def test_strong_feller_levels(self):
        rows = run_strong_feller(small_cfg(t_end=0.25), SMALL_Q, n=1500, levels=3)
        assert [r.params["level"] for r in rows] == [0, 1, 2]
        assert all(r.verdict == "pass" for r in rows)
        qdists = [r.params["qdist"] for r in rows]
        assert qdists == sorted(qdists, reverse=True)

    def test_mixing_rows(self):
        rows = run_mixing(small_cfg(t_end=1.0), SMALL_Q, n=800,
                          t_grid=(0.5, 1.0, 2.0), ergodic_window=(4.0, 12.0))
        kinds = [r.params["kind"] for r in rows]
        assert kinds.count("final") == 2  # one per test function
        assert kinds.count("ergodic_average") == 2
        assert all(r.verdict == "pass" for r in rows)
