"""Named, reproducible experiment drivers.

Each driver binds the Monte-Carlo estimators to a parameter grid, applies
the closed-form constants and returns a list of InequalityReport rows; the
CLI serializes them to CSV with the fixed header.  Every row is a
deterministic function of (experiment name, parameters, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft

from .noise import NoiseSpec, hs_norm, q_norm
from .reports import InequalityReport, make_report
from .sde import SimConfig, block_rng, iter_blocks, mode_damping
from .semigroup import (TestFunction, default_test_functions, estimate_hitting,
                        gradient_factor, gradient_frame_scan, log_harnack_constant,
                        log_of_mean, mc_functionals, require_admissible,
                        strong_feller_probe)
from .spectral import (SpectralField, drift_quadratic_batch, l2_norm, l2_sq_batch,
                       physical_batch, sin_field, v_sq_batch, zero_field)


@dataclass(frozen=True)
class ExperimentGrid:
    """Parameter sweep for the inequality experiments."""

    times: tuple = (0.1, 0.25, 0.5, 1.0)
    displacements: tuple = (0.0, 0.05, 0.1, 0.2)  # amplitudes of alpha*sin(theta)
    gradient_times: tuple = (0.1, 0.25, 0.5)
    gradient_x_amplitudes: tuple = (0.0, 0.2)
    mixing_times: tuple = (0.5, 1.0, 2.0, 4.0)

    def __post_init__(self):
        if not self.times or not self.displacements:
            raise ValueError("experiment grid must be nonempty")


# ---------------------------------------------------------------------------

def run_bilinear_scan(n_fields: int, m: int, seed: int = 42) -> list[InequalityReport]:
    """Random-field scan of |B(x,y)|^2 <= pi*|x|_V^2*|y|_V^2 and its pointwise core.

    Also verifies the skew property <B_m(x,x), x> = 0 that drives the energy
    identity, and the analytic pair x = y = sin(theta).
    """
    rows = []
    # analytic pair: ratio must be 1/(4*pi^2)
    x = sin_field(m)
    bx = _b_norm_sq_batch(x.coeffs[None, :], x.coeffs[None, :])[0][0]
    ratio = bx / (np.pi * v_sq_batch(x.coeffs[None, :])[0] ** 2)
    rows.append(make_report("bilinear", {"case": "sin_pair", "ratio": float(ratio)},
                            abs(ratio - 1.0 / (4.0 * np.pi ** 2)), 0.0, 1e-10, 0.0))

    k = np.arange(1, m + 1, dtype=float)
    idx = 0
    skew_max = 0.0
    for block, size in iter_blocks(n_fields, 2000):
        rng = block_rng(seed, 30, block)
        zx = rng.standard_normal((size, m)) + 1j * rng.standard_normal((size, m))
        zy = rng.standard_normal((size, m)) + 1j * rng.standard_normal((size, m))
        cx, cy = zx / k, zy / k
        b2, px = _b_norm_sq_batch(cx, cy)
        vx2, vy2 = v_sq_batch(cx), v_sq_batch(cy)
        bound = np.pi * vx2 * vy2
        point_ratio = np.max(px ** 2, axis=-1) / (np.pi * vx2)
        bm = drift_quadratic_batch(cx)
        skew = np.abs(2.0 * np.sum((bm * np.conj(cx)).real, axis=-1))
        skew_max = max(skew_max, float(np.max(skew)))
        for i in range(size):
            ok = b2[i] <= bound[i] and point_ratio[i] <= 1.0
            rows.append(InequalityReport(
                "bilinear",
                {"case": "random", "i": idx, "pointwise_ratio": float(point_ratio[i])},
                float(b2[i]), 0.0, float(bound[i]), 0.0,
                "pass" if ok else "fail"))
            idx += 1
    rows.append(make_report("bilinear", {"case": "skew"}, skew_max, 0.0, 1e-10, 0.0))
    return rows


def _b_norm_sq_batch(cx: np.ndarray, cy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(||x*y'||^2 including the mean, physical samples of x) for field batches."""
    m = cx.shape[-1]
    ng = sfft.next_fast_len(4 * m + 1, real=True)
    k = np.arange(1, m + 1, dtype=float)
    px = physical_batch(cx, ng)
    pdy = physical_batch(1j * k * cy, ng)
    prod = px * pdy
    return 2.0 * np.pi / ng * np.sum(prod ** 2, axis=-1), px


# ---------------------------------------------------------------------------

def run_energy_identity(cfg: SimConfig, Q: NoiseSpec, *, n: int = 10_000,
                        seed: int | None = None, x0: SpectralField | None = None,
                        threads: int = 1) -> list[InequalityReport]:
    """mean(||X_T||^2 + 2*nu*int ||X||_V^2) - ||x0||^2 vs ||Q||_HS^2*T at dt, dt/2."""
    x0 = zero_field(cfg.m) if x0 is None else x0
    seed = cfg.seed if seed is None else seed
    right = hs_norm(Q) ** 2 * cfg.t_end
    x0_sq = l2_norm(x0) ** 2

    def one(cfg_j, stream):
        means, ses, _ = mc_functionals(
            x0, [cfg_j.t_end], [lambda c, v: l2_sq_batch(c) + 2.0 * cfg_j.nu * v],
            cfg_j, Q, n=n, seed=seed, stream=stream, threads=threads)
        return float(means[0, 0]) - x0_sq, float(ses[0, 0])

    left1, se1 = one(cfg, 20)
    left2, se2 = one(replace(cfg, dt=cfg.dt / 2.0), 21)
    bias = abs(left1 - left2)
    rows = [
        make_report("energy", {"dt": cfg.dt, "n": n, "T": cfg.t_end},
                    left1, se1, right, 0.0, two_sided=True, slack=2.0 * bias),
        make_report("energy", {"dt": cfg.dt / 2.0, "n": n, "T": cfg.t_end},
                    left2, se2, right, 0.0, two_sided=True, slack=bias),
        make_report("energy", {"dt": "extrapolated", "n": n, "T": cfg.t_end},
                    2.0 * left2 - left1, float(np.hypot(2.0 * se2, se1)),
                    right, 0.0, two_sided=True),
    ]
    return rows


# ---------------------------------------------------------------------------

def run_log_harnack_grid(cfg: SimConfig, Q: NoiseSpec, *, grid: ExperimentGrid | None = None,
                         fs: list[TestFunction] | None = None, n: int | None = None,
                         seed: int | None = None, threads: int = 1) -> list[InequalityReport]:
    """One report per (t, displacement, test function), with x = 0 fixed."""
    require_admissible(cfg.nu, Q)
    grid = ExperimentGrid() if grid is None else grid
    fs = default_test_functions(cfg.m) if fs is None else fs
    n = cfg.n_samples if n is None else n
    seed = cfg.seed if seed is None else seed
    times = list(grid.times)
    x = zero_field(cfg.m)
    hs2 = hs_norm(Q) ** 2

    evaluators = [(lambda c, v, f=f: np.log(f.value_batch(c))) for f in fs]
    lmeans, lses, _ = mc_functionals(x, times, evaluators, cfg, Q, n=n, seed=seed,
                                     stream=0, threads=threads)
    rows = []
    for yi, alpha in enumerate(grid.displacements):
        y = sin_field(cfg.m, amplitude=alpha) if alpha else zero_field(cfg.m)
        qdist = q_norm(x - y, Q)
        if not np.isfinite(qdist):
            rows.append(InequalityReport(
                "log_harnack", {"alpha": alpha, "skipped": "infinite intrinsic distance"},
                np.nan, 0.0, np.nan, 0.0, "pass"))
            continue
        fevals = [(lambda c, v, f=f: f.value_batch(c)) for f in fs]
        rmeans, rses, _ = mc_functionals(y, times, fevals, cfg, Q, n=n, seed=seed,
                                         stream=10 + yi, threads=threads)
        for ti, t in enumerate(times):
            for fi, f in enumerate(fs):
                log_mean, log_se = log_of_mean(float(rmeans[fi, ti]),
                                               float(rses[fi, ti]), n)
                const = log_harnack_constant(cfg.nu, hs2, qdist ** 2,
                                             l2_norm(x), l2_norm(y), t)
                const_alt = log_harnack_constant(cfg.nu, hs2, qdist ** 2, l2_norm(x),
                                                 l2_norm(y), t, variant="alt")
                left, left_se = float(lmeans[fi, ti]), float(lses[fi, ti])
                report = make_report(
                    "log_harnack",
                    {"t": t, "alpha": alpha, "f": f.label, "n": n, "qdist": qdist,
                     "C": const, "C_alt": const_alt,
                     "right_alt": log_mean + const_alt,
                     "tightness": (log_mean + const - left) / const if const else None},
                    left, left_se, log_mean + const, log_se)
                rows.append(report)
    return rows


# ---------------------------------------------------------------------------

def run_gradient_grid(cfg: SimConfig, Q: NoiseSpec, *, grid: ExperimentGrid | None = None,
                      fs: list[TestFunction] | None = None, n: int | None = None,
                      seed: int | None = None, threads: int = 1) -> list[InequalityReport]:
    """Assembled gradient bound over (t, x, f), reporting both exponent variants."""
    require_admissible(cfg.nu, Q)
    grid = ExperimentGrid() if grid is None else grid
    fs = default_test_functions(cfg.m) if fs is None else fs
    n = cfg.n_samples if n is None else n
    seed = cfg.seed if seed is None else seed
    times = list(grid.gradient_times)
    hs2 = hs_norm(Q) ** 2
    rows = []
    for amp in grid.gradient_x_amplitudes:
        x = sin_field(cfg.m, amplitude=amp) if amp else zero_field(cfg.m)
        scan = gradient_frame_scan(fs, x, times, cfg, Q, n=n, seed=seed, threads=threads)
        xl2sq = l2_norm(x) ** 2
        for ti, t in enumerate(times):
            fac = gradient_factor(cfg.nu, xl2sq, t, hs2, "nu2")
            fac_alt = gradient_factor(cfg.nu, xl2sq, t, hs2, "nu1")
            for fi, f in enumerate(fs):
                left = float(scan["left"][fi, ti])
                left_se = float(scan["left_se"][fi, ti])
                raw = float(scan["right"][fi, ti])
                raw_se = float(scan["right_se"][fi, ti])
                alt_ok = left - 3.0 * np.hypot(left_se, raw_se * fac_alt) <= raw * fac_alt
                rows.append(make_report(
                    "gradient",
                    {"t": t, "x_amp": amp, "f": f.label, "n": n, "factor": fac,
                     "factor_alt": fac_alt, "right_alt": raw * fac_alt,
                     "verdict_alt": "pass" if alt_ok else "fail"},
                    left, left_se, raw * fac, raw_se * fac))
    return rows


# ---------------------------------------------------------------------------

def run_exp_moment(cfg: SimConfig, Q: NoiseSpec, *, times=(0.25,),
                   xs: list[SpectralField] | None = None, n: int | None = None,
                   seed: int | None = None, threads: int = 1) -> list[InequalityReport]:
    from .semigroup import estimate_exp_moment

    xs = [zero_field(cfg.m)] if xs is None else xs
    rows = []
    for x in xs:
        for t in times:
            rows.append(estimate_exp_moment(x, t, cfg, Q, n=n, seed=seed,
                                            threads=threads))
    return rows


# ---------------------------------------------------------------------------

def run_convergence(cfg: SimConfig, noise_factory, *, ms=(8, 16, 32),
                    n: int = 1000, seed: int | None = None,
                    x0: SpectralField | None = None,
                    f: TestFunction | None = None) -> list[InequalityReport]:
    """Terminal gap vs a reference Galerkin level 2*max(ms) under shared noise.

    noise_factory(m) must produce the spectrum truncated at level m.
    """
    ms = sorted(ms)
    ref = 2 * max(ms)
    seed = cfg.seed if seed is None else seed
    x0 = sin_field(ref) if x0 is None else x0
    f = TestFunction("gauss_bump", zero_field(ref), c=1.0, s=1.0) if f is None else f
    q_ref = noise_factory(ref)
    levels = list(ms) + [ref]
    dampings = {m: mode_damping(replace(cfg, m=m)) for m in levels}
    n_steps = cfg.n_steps

    gaps = {m: [] for m in ms}
    f_sums = {m: 0.0 for m in levels}
    for block, size in iter_blocks(n, 2000):
        rng = block_rng(seed, 40, block)
        states = {m: np.broadcast_to(x0.coeffs[:m], (size, m)).copy() for m in levels}
        for _ in range(n_steps):
            z = rng.standard_normal((size, ref, 2))
            dw = q_ref.q * (z[..., 0] + 1j * z[..., 1]) * np.sqrt(cfg.dt / 2.0)
            for m in levels:
                s = states[m]
                states[m] = dampings[m] * (s - cfg.dt * drift_quadratic_batch(s)
                                           + dw[:, :m])
        for m in ms:
            gaps[m].append(np.sqrt(l2_sq_batch(states[m] - states[ref][:, :m])))
        for m in levels:
            padded = np.zeros((size, ref), dtype=complex)
            padded[:, :m] = states[m]
            f_sums[m] += float(np.sum(f.value_batch(padded)))

    rows = []
    prev_median = np.inf
    prev_ptf = np.inf
    ptf_ref = f_sums[ref] / n
    for m in ms:
        g = np.concatenate(gaps[m])
        med = float(np.median(g))
        q90 = float(np.quantile(g, 0.9))
        ok = med < prev_median
        rows.append(InequalityReport(
            "convergence", {"metric": "median_gap", "m": m, "ref": ref, "n": n,
                            "q90": q90, "T": cfg.t_end},
            med, 0.0, prev_median if np.isfinite(prev_median) else med, 0.0,
            "pass" if ok else "fail"))
        ptf_gap = abs(f_sums[m] / n - ptf_ref)
        ok2 = ptf_gap < prev_ptf
        rows.append(InequalityReport(
            "convergence", {"metric": "ptf_gap", "m": m, "ref": ref, "n": n,
                            "f": f.label, "T": cfg.t_end},
            ptf_gap, 0.0, prev_ptf if np.isfinite(prev_ptf) else ptf_gap, 0.0,
            "pass" if ok2 else "fail"))
        prev_median, prev_ptf = med, ptf_gap
    return rows


# ---------------------------------------------------------------------------

def run_irreducibility(cfg: SimConfig, Q: NoiseSpec, *, target: SpectralField | None = None,
                       r: float = 1.0, y0: SpectralField | None = None, t: float = 0.5,
                       n: int | None = None, seed: int | None = None,
                       threads: int = 1) -> list[InequalityReport]:
    """Wilson lower confidence bound for P(||X_t^y - target||_V < r) must be > 0."""
    require_admissible(cfg.nu, Q)
    target = zero_field(cfg.m) if target is None else target
    y0 = sin_field(cfg.m) if y0 is None else y0
    n = cfg.n_samples if n is None else n
    est, (lo, hi) = estimate_hitting(target, r, y0, t, cfg, Q, n=n, seed=seed,
                                     threads=threads)
    return [InequalityReport(
        "irreducibility",
        {"t": t, "r": r, "n": n, "freq": est.mean, "wilson_high": hi},
        0.0, 0.0, lo, est.std_error, "pass" if lo > 0.0 else "fail")]


def run_strong_feller(cfg: SimConfig, Q: NoiseSpec, *, f: TestFunction | None = None,
                      x: SpectralField | None = None,
                      direction: SpectralField | None = None, t: float = 0.25,
                      levels: int = 4, n: int | None = None,
                      seed: int | None = None, threads: int = 1) -> list[InequalityReport]:
    """Intrinsic continuity probe: |P_t f(y_k) - P_t f(x)| under halving |x-y_k|_Q."""
    require_admissible(cfg.nu, Q)
    f = default_test_functions(cfg.m)[0] if f is None else f
    x = zero_field(cfg.m) if x is None else x
    direction = sin_field(cfg.m, amplitude=0.4) if direction is None else direction
    probe = strong_feller_probe(f, x, direction, t, cfg, Q, n=n, seed=seed,
                                levels=levels, threads=threads)
    rows = []
    prev = np.inf
    for level, (qdist, diff) in enumerate(probe):
        ok = diff < prev
        rows.append(InequalityReport(
            "strong_feller", {"level": level, "t": t, "qdist": qdist, "f": f.label},
            diff, 0.0, prev if np.isfinite(prev) else diff, 0.0,
            "pass" if ok else "fail"))
        prev = diff
    return rows


# ---------------------------------------------------------------------------

def run_mixing(cfg: SimConfig, Q: NoiseSpec, *, fs: list[TestFunction] | None = None,
               x: SpectralField | None = None, y: SpectralField | None = None,
               t_grid=(0.5, 1.0, 2.0, 4.0), n: int | None = None,
               seed: int | None = None, threads: int = 1,
               ergodic_window: tuple[float, float] = (10.0, 50.0)) -> list[InequalityReport]:
    """Two-point semigroup agreement over t plus a long-run time average."""
    fs = default_test_functions(cfg.m) if fs is None else fs
    x = zero_field(cfg.m) if x is None else x
    y = sin_field(cfg.m, amplitude=0.5) if y is None else y
    n = cfg.n_samples if n is None else n
    seed = cfg.seed if seed is None else seed
    times = sorted(t_grid)
    cfg_t = replace(cfg, t_end=times[-1])
    fevals = [(lambda c, v, f=f: f.value_batch(c)) for f in fs]
    xm, xs_, _ = mc_functionals(x, times, fevals, cfg_t, Q, n=n, seed=seed,
                                stream=50, threads=threads)
    ym, ys_, _ = mc_functionals(y, times, fevals, cfg_t, Q, n=n, seed=seed,
                                stream=51, threads=threads)
    rows = []
    for fi, f in enumerate(fs):
        diffs = np.abs(xm[fi] - ym[fi])
        ses = np.hypot(xs_[fi], ys_[fi])
        for ti, t in enumerate(times):
            last = ti == len(times) - 1
            bound = 3.0 * ses[ti] if last else diffs[0] + 3.0 * ses[ti]
            rows.append(InequalityReport(
                "mixing", {"t": t, "f": f.label, "n": n,
                           "kind": "final" if last else "trend"},
                float(diffs[ti]), float(ses[ti]), float(bound), 0.0,
                "pass" if diffs[ti] <= bound else "fail"))

    # ergodic average along one long trajectory, compared with the ensemble
    # estimate at the largest t
    t0, t1 = ergodic_window
    cfg_long = replace(cfg, t_end=t1)
    n0, n1 = cfg_long.step_index(t0), cfg_long.step_index(t1)
    series = {fi: [] for fi in range(len(fs))}

    def sink(step, c, v):
        if step >= n0:
            for fi, f in enumerate(fs):
                series[fi].append(float(f.value_batch(c)[0]))

    from .sde import evolve_block
    rng = block_rng(seed, 52, 0)
    evolve_block(x.coeffs[None, :].copy(), cfg_long, Q, rng, range(n0, n1 + 1), sink)
    for fi, f in enumerate(fs):
        ts = np.asarray(series[fi])
        avg = float(ts.mean())
        nb = 20
        bm = np.array([b.mean() for b in np.array_split(ts, nb)])
        se_t = float(bm.std(ddof=1) / np.sqrt(nb))
        rows.append(make_report(
            "mixing", {"kind": "ergodic_average", "f": f.label,
                       "window": [t0, t1], "ensemble_t": times[-1]},
            avg, se_t, float(xm[fi, -1]), float(xs_[fi, -1]), two_sided=True))
    return rows


EXPERIMENT_NAMES = ("bilinear", "energy", "log-harnack", "gradient", "exp-moment",
                    "convergence", "irreducibility", "mixing", "strong-feller")

HARNACK_EXPERIMENTS = {"log-harnack", "gradient", "irreducibility", "mixing",
                       "strong-feller"}
