"""Acceptance gate: every headline claim checked at its stated tolerance.

Each test prints exactly one PASS/FAIL line (written past the capture plugin
so it always reaches the terminal).  Parameters follow the package defaults:
nu = 2, m = 32, dt = 1e-3, q_k = 0.5/k, seed = 42.
"""

import subprocess
import sys

import numpy as np
import pytest

from burgers_harnack.experiments import (run_bilinear_scan, run_convergence,
                                         run_energy_identity, run_exp_moment,
                                         run_gradient_grid, run_irreducibility,
                                         run_log_harnack_grid, run_strong_feller)
from burgers_harnack.noise import NoiseSpec
from burgers_harnack.sde import SimConfig, block_rng
from burgers_harnack.semigroup import default_test_functions, fd_tangent_comparison
from burgers_harnack.spectral import drift_quadratic_batch, sin_field

NU, M, DT, SEED = 2.0, 32, 1e-3, 42


def make_cfg(t_end, m=M, dt=DT):
    return SimConfig(nu=NU, m=m, dt=dt, t_end=t_end, seed=SEED)


def noise(m=M):
    return NoiseSpec.power_law(m)


@pytest.fixture
def conclude(capfd):
    """Emit one PASS/FAIL line per criterion past the capture plugin."""

    def _conclude(name: str, ok: bool, detail: str):
        with capfd.disabled():
            print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}", flush=True)
        assert ok, f"{name}: {detail}"

    return _conclude


def test_bilinear_bound(conclude):
    """10^4 random pairs at m = 64 satisfy ||B(x,y)||^2 <= pi*|x|_V^2*|y|_V^2;
    the analytic pair x = y = sin reproduces the ratio 1/(4*pi^2) to 1e-10."""
    rows = run_bilinear_scan(10_000, m=64, seed=SEED)
    random_rows = [r for r in rows if r.params.get("case") == "random"]
    n_fail = sum(r.verdict != "pass" for r in random_rows)
    sin_row = rows[0]
    ratio_err = abs(sin_row.params["ratio"] - 1.0 / (4.0 * np.pi ** 2))
    ok = len(random_rows) == 10_000 and n_fail == 0 and ratio_err <= 1e-10
    conclude("bilinear bound", ok,
             f"{len(random_rows) - n_fail}/{len(random_rows)} random pairs, "
             f"sin-pair ratio error {ratio_err:.2e}")


def test_skew_identity(conclude):
    """<B_m(x,x), x> = 0 to 1e-10 for 10^3 random fields (exact dealiasing)."""
    m = 64
    k = np.arange(1, m + 1, dtype=float)
    rng = block_rng(SEED, 31, 0)
    z = rng.standard_normal((1000, m)) + 1j * rng.standard_normal((1000, m))
    c = z / k
    bm = drift_quadratic_batch(c)
    skew = np.abs(2.0 * np.sum((bm * np.conj(c)).real, axis=-1))
    worst = float(np.max(skew))
    conclude("skew identity", worst <= 1e-10, f"max |<B_m(x,x), x>| = {worst:.2e}")


def test_energy_identity(conclude):
    """x0 = 0, T = 0.5, n = 10^4: Richardson-extrapolated balance within 3*SE."""
    rows = run_energy_identity(make_cfg(0.5), noise(), n=10_000)
    extrap = rows[2]
    assert extrap.params["dt"] == "extrapolated"
    tol = 3.0 * np.hypot(extrap.left_se, extrap.right_se)
    ok = abs(extrap.margin) <= tol
    conclude("energy identity", ok,
             f"|residual| = {abs(extrap.margin):.5f} vs 3*SE = {tol:.5f} "
             f"(left {extrap.left:.5f}, right {extrap.right:.5f})")


def test_exponential_moment(conclude):
    """x = 0, t = 0.25, lambda* = 4: MC moment below the closed form + 3*SE."""
    rows = run_exp_moment(make_cfg(0.25), noise(), times=(0.25,), n=100_000)
    r = rows[0]
    assert r.params["lambda"] == pytest.approx(4.0)
    ok = r.verdict == "pass"
    conclude("exponential moment", ok,
             f"left {r.left:.4f} (SE {r.left_se:.4f}) <= right {r.right:.4f}")


def test_gradient_estimate(conclude):
    """Assembled ||Q D P_t f||^2 below (P_t ||Q Df||^2) * exp factor for
    t in {0.1, 0.25, 0.5}, both test-function families and two base points."""
    rows = run_gradient_grid(make_cfg(0.5), noise(), n=4000)
    n_fail = sum(r.verdict != "pass" for r in rows)
    worst = max((r.left - r.right) / max(r.right, 1e-300) for r in rows)
    conclude("gradient estimate", n_fail == 0,
             f"{len(rows) - n_fail}/{len(rows)} grid rows pass "
             f"(worst left/right excess {worst:+.3f})")


def test_gradient_finite_difference_consistency(conclude):
    """Tangent directional derivatives agree with common-noise finite
    differences within 3*SE after removing the O(eps) residual, and the
    residual itself decays first order over eps in {1e-2, 1e-3, 1e-4}."""
    cfg = make_cfg(0.25)
    f = default_test_functions(M)[0]
    eps_list = [1e-2, 1e-3, 1e-4]
    res = fd_tangent_comparison(f, sin_field(M, amplitude=0.3), sin_field(M, k=2),
                                0.25, cfg, noise(), eps_list, n=2000)
    r2, se2 = res[1e-2][2], res[1e-2][3]
    r3, se3 = res[1e-3][2], res[1e-3][3]
    r4, se4 = res[1e-4][2], res[1e-4][3]
    # eps -> 0 extrapolation of the paired residual must vanish within 3*SE
    r0 = (10.0 * r4 - r3) / 9.0
    se0 = np.hypot(10.0 * se4, se3) / 9.0
    agree = abs(r0) <= 3.0 * max(se0, 1e-12)
    # first-order decay: each decade of eps shrinks the residual ~10x
    decay = (abs(r2) > 5.0 * se2
             and 3.0 <= abs(r2) / abs(r3) <= 30.0
             and 3.0 <= abs(r3) / abs(r4) <= 30.0)
    conclude("gradient vs finite differences", agree and decay,
             f"extrapolated residual {r0:+.2e} (3*SE {3 * se0:.2e}), "
             f"decay ratios {abs(r2) / abs(r3):.1f}, {abs(r3) / abs(r4):.1f}")


def test_log_harnack_grid(conclude):
    """Default grid (4 times x 4 displacements incl. x = y, 2 test functions)
    at n = 10^5: every row passes; the x = y rows have margin >= 0 (Jensen)."""
    rows = run_log_harnack_grid(make_cfg(1.0), noise(), n=100_000)
    n_fail = sum(r.verdict != "pass" for r in rows)
    jensen = [r for r in rows if r.params.get("alpha") == 0.0]
    jensen_ok = all(r.margin >= 0.0 for r in jensen)
    min_jensen = min(r.margin for r in jensen)
    conclude("log-Harnack inequality", n_fail == 0 and jensen_ok,
             f"{len(rows) - n_fail}/{len(rows)} rows pass, "
             f"min x=y margin {min_jensen:+.5f}")


def test_galerkin_convergence(conclude):
    """Median terminal gap to the m = 64 reference and the semigroup gap
    |P_T f^(m) - P_T f^(64)| both decrease monotonically over m in {8,16,32}."""
    rows = run_convergence(make_cfg(0.5), NoiseSpec.power_law, ms=(8, 16, 32),
                           n=1000)
    n_fail = sum(r.verdict != "pass" for r in rows)
    med = {r.params["m"]: r.left for r in rows if r.params["metric"] == "median_gap"}
    conclude("Galerkin convergence", n_fail == 0,
             "median gaps " + " > ".join(f"{med[m]:.2e}" for m in (8, 16, 32)))


def test_irreducibility(conclude):
    """Wilson lower confidence bound for P(|X_0.5^y|_V < 1) is positive."""
    rows = run_irreducibility(make_cfg(0.5), noise(), n=10_000)
    r = rows[0]
    conclude("irreducibility", r.verdict == "pass" and r.right > 0.0,
             f"hit frequency {r.params['freq']:.4f}, Wilson lower bound {r.right:.4f}")


def test_strong_feller_probe(conclude):
    """|P_t f(y_k) - P_t f(x)| decreases monotonically as |x - y_k|_Q halves
    over 4 levels, with common random numbers."""
    rows = run_strong_feller(make_cfg(0.25), noise(), n=10_000, levels=4)
    n_fail = sum(r.verdict != "pass" for r in rows)
    diffs = [r.left for r in rows]
    conclude("intrinsic strong Feller probe", n_fail == 0,
             "differences " + " > ".join(f"{d:.4f}" for d in diffs))


def test_determinism_across_threads(conclude, tmp_path):
    """Two full runs with equal seed and different thread counts produce
    byte-identical CSVs."""
    outs = []
    for label, threads in (("a", "1"), ("b", "4")):
        out = tmp_path / label
        cmd = [sys.executable, "-m", "burgers_harnack.cli", "all",
               "--samples", "200", "--dt", "0.005", "--seed", "42",
               "--threads", threads, "--out", str(out), "--quiet"]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    names = sorted(p.name for p in outs[0].glob("*.csv"))
    assert names, "no CSVs produced"
    mismatched = [n for n in names
                  if (outs[0] / n).read_bytes() != (outs[1] / n).read_bytes()]
    conclude("thread determinism", not mismatched,
             f"{len(names)} CSVs byte-identical across 1 vs 4 threads"
             if not mismatched else f"mismatch in {mismatched}")
