"""Monte-Carlo estimation of the Markov semigroup and its functionals.

Everything the inequalities compare is estimated here: P_t f, P_t log f,
the assembled gradient ||Q D P_t f||^2 via tangent processes, exponential
moments of the energy functional, and hitting frequencies.  The closed-form
right-hand sides live in small pure functions so that the drivers and the
unit tests share one implementation per formula.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .noise import NoiseSpec, a_minus_half_op_norm, admissible, hs_norm, q_norm
from .reports import InequalityReport, MCEstimate, make_report
from .sde import (SimConfig, block_rng, evolve_block, evolve_block_with_frame,
                  iter_blocks, map_blocks, mode_damping)
from .spectral import (SpectralField, drift_quadratic_batch, l2_norm,
                       l2_sq_batch, v_sq_batch)


# ---------------------------------------------------------------------------
# Closed-form constants
# ---------------------------------------------------------------------------

def log_harnack_constant(nu: float, hs_sq: float, qdist_sq: float,
                         x_l2: float, y_l2: float, t: float,
                         variant: str = "main") -> float:
    """Additive constant C(t, x, y) of the log-Harnack inequality.

    variant="main" is the headline form (amplitude 2*pi*||Q||_HS^2, rate
    4*pi/nu^2); variant="alt" is the intermediate finite-dimensional form
    with amplitude pi*||Q||_HS^2 and rate 2*pi/nu^2.
    """
    if t <= 0.0:
        raise ValueError("the constant is defined for t > 0")
    if variant == "main":
        rate = 4.0 * np.pi / nu ** 2
        amp = 2.0 * np.pi * hs_sq
    elif variant == "alt":
        rate = 2.0 * np.pi / nu ** 2
        amp = np.pi * hs_sq
    else:
        raise ValueError(f"unknown variant {variant!r}")
    peak = max(x_l2, y_l2) ** 2
    return amp * qdist_sq / (1.0 - np.exp(-rate * hs_sq * t)) * np.exp(rate * peak)


def gradient_factor(nu: float, x_l2_sq: float, t: float, hs_sq: float,
                    exponent: str = "nu2") -> float:
    """Multiplier exp[(2*pi/nu^p)(||x||^2 + t*||Q||_HS^2)], p = 2 ("nu2") or 1 ("nu1")."""
    p = {"nu2": 2, "nu1": 1}[exponent]
    return float(np.exp(2.0 * np.pi / nu ** p * (x_l2_sq + t * hs_sq)))


def exp_moment_rate(nu: float, Q: NoiseSpec) -> float:
    """lambda* = nu / (2*||A^(-1/2)Q||^2)."""
    return nu / (2.0 * a_minus_half_op_norm(Q) ** 2)


def exp_moment_bound(nu: float, Q: NoiseSpec, x_l2_sq: float, t: float) -> float:
    """Closed-form right side exp[lambda*(||x||^2 + ||Q||_HS^2 t)]."""
    lam = exp_moment_rate(nu, Q)
    return float(np.exp(lam * (x_l2_sq + hs_norm(Q) ** 2 * t)))


def require_admissible(nu: float, Q: NoiseSpec) -> None:
    if not admissible(nu, Q):
        bound = 4.0 * np.pi * a_minus_half_op_norm(Q) ** 2
        raise ValueError(
            f"noise is inadmissible: nu^3 = {nu ** 3:.6g} < 4*pi*|A^-1/2 Q|^2 = {bound:.6g}")


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score confidence interval for a binomial frequency k/n."""
    if n < 1:
        raise ValueError("need at least one sample")
    p = k / n
    denom = 1.0 + z ** 2 / n
    center = (p + z ** 2 / (2 * n)) / denom
    half = z / denom * np.sqrt(p * (1 - p) / n + z ** 2 / (4 * n ** 2))
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# Test functions (bounded, C^1, f >= 1)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """f(x) = 1 + c*exp(-|x-a|^2/s^2) (gauss_bump) or 1 + c*sigmoid(<x,h>/s) (sigmoid_ray)."""

    __test__ = False  # not a pytest test class

    kind: str
    anchor: SpectralField  # center a, or ray direction h
    c: float = 1.0
    s: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gauss_bump", "sigmoid_ray"):
            raise ValueError(f"unknown test-function kind {self.kind!r}")
        if self.c <= 0.0 or self.s <= 0.0:
            raise ValueError("amplitude c and scale s must be positive")

    @property
    def label(self) -> str:
        return f"{self.kind}(c={self.c:g},s={self.s:g})"

    def value_batch(self, coeffs: np.ndarray) -> np.ndarray:
        a = self.anchor.coeffs
        if self.kind == "gauss_bump":
            d2 = 2.0 * np.sum(np.abs(coeffs - a) ** 2, axis=-1)
            return 1.0 + self.c * np.exp(-d2 / self.s ** 2)
        u = 2.0 * np.sum((coeffs * np.conj(a)).real, axis=-1) / self.s
        return 1.0 + self.c / (1.0 + np.exp(-u))

    def grad_batch(self, coeffs: np.ndarray) -> np.ndarray:
        """Gradient Df(x) as coefficient arrays of the same batch shape."""
        a = self.anchor.coeffs
        if self.kind == "gauss_bump":
            d2 = 2.0 * np.sum(np.abs(coeffs - a) ** 2, axis=-1)
            w = -(2.0 * self.c / self.s ** 2) * np.exp(-d2 / self.s ** 2)
            return w[..., None] * (coeffs - a)
        u = 2.0 * np.sum((coeffs * np.conj(a)).real, axis=-1) / self.s
        sig = 1.0 / (1.0 + np.exp(-u))
        w = (self.c / self.s) * sig * (1.0 - sig)
        return w[..., None] * np.broadcast_to(a, coeffs.shape)

    def value(self, x: SpectralField) -> float:
        return float(self.value_batch(x.coeffs[None, :])[0])

    def grad(self, x: SpectralField) -> SpectralField:
        return SpectralField(x.m, self.grad_batch(x.coeffs[None, :])[0])


def default_test_functions(m: int) -> list[TestFunction]:
    from .spectral import sin_field, zero_field

    return [TestFunction("gauss_bump", zero_field(m), c=1.0, s=1.0),
            TestFunction("sigmoid_ray", sin_field(m), c=1.0, s=1.0)]


# ---------------------------------------------------------------------------
# Generic Monte-Carlo evaluation of path functionals
# ---------------------------------------------------------------------------

def mc_functionals(x0: SpectralField, times, evaluators, cfg: SimConfig,
                   Q: NoiseSpec, *, n: int | None = None, seed: int | None = None,
                   stream: int = 0, threads: int = 1):
    """Sample mean/SE/max of each evaluator(coeffs, v_integral) at each grid time.

    Returns (means, ses, maxima) of shape (n_evaluators, n_times).
    """
    n = cfg.n_samples if n is None else n
    seed = cfg.seed if seed is None else seed
    steps = [cfg.step_index(t) for t in times]
    ne, nt = len(evaluators), len(times)

    def run(block: int, size: int):
        rng = block_rng(seed, stream, block)
        coeffs = np.broadcast_to(x0.coeffs, (size, cfg.m)).copy()
        s1 = np.zeros((ne, nt))
        s2 = np.zeros((ne, nt))
        mx = np.full((ne, nt), -np.inf)

        def sink(step, c, v):
            for j in {i for i, s in enumerate(steps) if s == step}:
                for e, ev in enumerate(evaluators):
                    vals = ev(c, v)
                    s1[e, j] = np.sum(vals)
                    s2[e, j] = np.sum(vals ** 2)
                    mx[e, j] = np.max(vals)

        evolve_block(coeffs, cfg, Q, rng, steps, sink)
        return s1, s2, mx

    parts = map_blocks(n, run, threads)
    tot1 = sum(p[0] for p in parts)
    tot2 = sum(p[1] for p in parts)
    mx = np.max(np.stack([p[2] for p in parts]), axis=0)
    means = tot1 / n
    var = np.maximum(tot2 - n * means ** 2, 0.0) / max(n - 1, 1)
    ses = np.sqrt(var / n)
    return means, ses, mx


def estimate_Ptf(f: TestFunction, x: SpectralField, t: float, cfg: SimConfig,
                 Q: NoiseSpec, *, n: int | None = None, seed: int | None = None,
                 stream: int = 0, threads: int = 1) -> MCEstimate:
    """Sample mean of f(X_t^x) over n independent paths."""
    means, ses, _ = mc_functionals(x, [t], [lambda c, v: f.value_batch(c)],
                                   cfg, Q, n=n, seed=seed, stream=stream,
                                   threads=threads)
    return MCEstimate(float(means[0, 0]), float(ses[0, 0]),
                      cfg.n_samples if n is None else n)


def log_of_mean(mean: float, se: float, n: int) -> tuple[float, float]:
    """Delta-method log of an MC mean with first-order bias correction."""
    var = se ** 2 * n
    return float(np.log(mean) + var / (2.0 * n * mean ** 2)), float(se / mean)


def estimate_log_harnack(f: TestFunction, x: SpectralField, y: SpectralField,
                         t: float, cfg: SimConfig, Q: NoiseSpec, *,
                         n: int | None = None, seed: int | None = None,
                         threads: int = 1) -> InequalityReport:
    """Compare E log f(X_t^x) against log E f(X_t^y) + C(t, x, y)."""
    require_admissible(cfg.nu, Q)
    qdist = q_norm(x - y, Q)
    if not np.isfinite(qdist):
        raise ValueError("x - y has infinite intrinsic norm; the bound is vacuous")
    n = cfg.n_samples if n is None else n
    hs2 = hs_norm(Q) ** 2
    lm, ls, _ = mc_functionals(x, [t], [lambda c, v: np.log(f.value_batch(c))],
                               cfg, Q, n=n, seed=seed, stream=0, threads=threads)
    rm, rs, _ = mc_functionals(y, [t], [lambda c, v: f.value_batch(c)],
                               cfg, Q, n=n, seed=seed, stream=1, threads=threads)
    left, left_se = float(lm[0, 0]), float(ls[0, 0])
    log_mean, log_se = log_of_mean(float(rm[0, 0]), float(rs[0, 0]), n)
    const = log_harnack_constant(cfg.nu, hs2, qdist ** 2, l2_norm(x), l2_norm(y), t)
    const_alt = log_harnack_constant(cfg.nu, hs2, qdist ** 2, l2_norm(x), l2_norm(y),
                                     t, variant="alt")
    params = {"t": t, "n": n, "f": f.label, "x_l2": l2_norm(x), "y_l2": l2_norm(y),
              "qdist": qdist, "C": const, "C_alt": const_alt,
              "right_alt": log_mean + const_alt}
    return make_report("log_harnack", params, left, left_se,
                       log_mean + const, log_se)


def estimate_exp_moment(x: SpectralField, t: float, cfg: SimConfig, Q: NoiseSpec, *,
                        n: int | None = None, seed: int | None = None,
                        threads: int = 1) -> InequalityReport:
    """Exponential moment of ||X_t||^2 + nu*int ||X_s||_V^2 ds at rate lambda*."""
    n = cfg.n_samples if n is None else n
    lam = exp_moment_rate(cfg.nu, Q)

    def ev(c, v):
        return np.exp(lam * (l2_sq_batch(c) + cfg.nu * v))

    def ev_exponent(c, v):
        return lam * (l2_sq_batch(c) + cfg.nu * v)

    means, ses, mx = mc_functionals(x, [t], [ev, ev_exponent], cfg, Q,
                                    n=n, seed=seed, stream=0, threads=threads)
    left, left_se = float(means[0, 0]), float(ses[0, 0])
    right = exp_moment_bound(cfg.nu, Q, l2_norm(x) ** 2, t)
    if left > 0 and left_se / left > 0.20:
        warnings.warn("exponential-moment estimator has relative SE > 20% "
                      "(heavy tails); increase n or decrease t", RuntimeWarning)
    params = {"t": t, "n": n, "lambda": lam, "x_l2": l2_norm(x),
              "max_exponent": float(mx[1, 0])}
    return make_report("exp_moment", params, left, left_se, right, 0.0)


def estimate_hitting(x_target: SpectralField, r: float, y0: SpectralField,
                     t: float, cfg: SimConfig, Q: NoiseSpec, *,
                     n: int | None = None, seed: int | None = None,
                     threads: int = 1) -> tuple[MCEstimate, tuple[float, float]]:
    """Frequency of ||X_t^y - x_target||_V < r with its Wilson-score interval."""
    if r <= 0.0:
        raise ValueError("radius must be positive")
    n = cfg.n_samples if n is None else n
    target = x_target.coeffs

    def ev(c, v):
        return (v_sq_batch(c - target) < r ** 2).astype(float)

    means, ses, _ = mc_functionals(y0, [t], [ev], cfg, Q, n=n, seed=seed,
                                   threads=threads)
    freq = float(means[0, 0])
    k = round(freq * n)
    return MCEstimate(freq, float(ses[0, 0]), n), wilson_interval(k, n)


# ---------------------------------------------------------------------------
# Gradient assembly via tangent frames
# ---------------------------------------------------------------------------

def _frame_directions(m: int) -> np.ndarray:
    """Orthonormal real basis of H_m as 2m coefficient vectors (2m, m)."""
    frame = np.zeros((2 * m, m), dtype=np.complex128)
    for k in range(m):
        frame[2 * k, k] = 1.0 / np.sqrt(2.0)
        frame[2 * k + 1, k] = 1j / np.sqrt(2.0)
    return frame


def _pair_inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """<a, b> batched over leading axes: 2*Re sum_k a_k conj(b_k)."""
    return 2.0 * np.sum((a * np.conj(b)).real, axis=-1)


def gradient_frame_scan(fs, x: SpectralField, times, cfg: SimConfig, Q: NoiseSpec, *,
                        n: int | None = None, seed: int | None = None,
                        threads: int = 1, block_size: int | None = None):
    """Assemble D P_t f(x) from tangent solves over the full 2m-direction frame.

    Returns a dict with, for each (f index, time index):
      left      -- ||Q g||^2 of the assembled gradient g
      left_se   -- delete-one-block jackknife standard error
      right     -- MC mean of ||Q Df(X_t)||^2 (without the exponential factor)
      right_se  -- its standard error
    """
    n = cfg.n_samples if n is None else n
    seed = cfg.seed if seed is None else seed
    if block_size is None:
        block_size = max(50, int(np.ceil(n / 25)))
    steps = [cfg.step_index(t) for t in times]
    m = cfg.m
    frame0 = _frame_directions(m)
    ne, nt = len(fs), len(times)
    q = Q.q

    def run(block: int, size: int):
        rng = block_rng(seed, 2, block)
        coeffs = np.broadcast_to(x.coeffs, (size, m)).copy()
        frame = np.broadcast_to(frame0, (size, 2 * m, m)).copy()
        alpha_sum = np.zeros((ne, nt, 2 * m))
        r1 = np.zeros((ne, nt))
        r2 = np.zeros((ne, nt))

        def sink(step, c, fr):
            for j in {i for i, s in enumerate(steps) if s == step}:
                for e, f in enumerate(fs):
                    g = f.grad_batch(c)  # (size, m)
                    alpha = _pair_inner(g[:, None, :], fr)  # (size, 2m)
                    alpha_sum[e, j] = alpha.sum(axis=0)
                    qg2 = 2.0 * np.sum(q ** 2 * np.abs(g) ** 2, axis=-1)
                    r1[e, j] = qg2.sum()
                    r2[e, j] = np.sum(qg2 ** 2)

        evolve_block_with_frame(coeffs, frame, cfg, Q, rng, steps, sink)
        return alpha_sum, r1, r2, size

    parts = map_blocks(n, run, threads, block_size=block_size)
    alpha_tot = sum(p[0] for p in parts)
    r1_tot = sum(p[1] for p in parts)
    r2_tot = sum(p[2] for p in parts)

    def qg_sq_of_alpha(alpha_mean: np.ndarray) -> np.ndarray:
        # alpha_mean (..., 2m) -> ||Q g||^2 with g_k = (a_{2k} + i a_{2k+1})/sqrt(2)
        gk = (alpha_mean[..., 0::2] + 1j * alpha_mean[..., 1::2]) / np.sqrt(2.0)
        return 2.0 * np.sum(q ** 2 * np.abs(gk) ** 2, axis=-1)

    left = qg_sq_of_alpha(alpha_tot / n)
    nb = len(parts)
    if nb > 1:
        loo = np.stack([qg_sq_of_alpha((alpha_tot - p[0]) / (n - p[3]))
                        for p in parts])  # (nb, ne, nt)
        left_se = np.sqrt((nb - 1) / nb * np.sum((loo - loo.mean(axis=0)) ** 2, axis=0))
    else:
        left_se = np.zeros_like(left)
    right = r1_tot / n
    right_var = np.maximum(r2_tot - n * right ** 2, 0.0) / max(n - 1, 1)
    right_se = np.sqrt(right_var / n)
    return {"left": left, "left_se": left_se, "right": right, "right_se": right_se,
            "n": n}


def estimate_gradient_bound(f: TestFunction, x: SpectralField, t: float,
                            cfg: SimConfig, Q: NoiseSpec, *, n: int | None = None,
                            seed: int | None = None, threads: int = 1,
                            block_size: int | None = None) -> InequalityReport:
    """Assembled ||Q D P_t f||^2(x) against (P_t ||Q Df||^2)(x) times the factor."""
    require_admissible(cfg.nu, Q)
    n = cfg.n_samples if n is None else n
    scan = gradient_frame_scan([f], x, [t], cfg, Q, n=n, seed=seed,
                               threads=threads, block_size=block_size)
    hs2 = hs_norm(Q) ** 2
    xl2sq = l2_norm(x) ** 2
    fac = gradient_factor(cfg.nu, xl2sq, t, hs2, "nu2")
    fac_alt = gradient_factor(cfg.nu, xl2sq, t, hs2, "nu1")
    left = float(scan["left"][0, 0])
    left_se = float(scan["left_se"][0, 0])
    raw_right = float(scan["right"][0, 0])
    raw_se = float(scan["right_se"][0, 0])
    params = {"t": t, "n": n, "f": f.label, "x_l2": np.sqrt(xl2sq),
              "factor": fac, "factor_alt": fac_alt,
              "right_alt": raw_right * fac_alt, "right_raw": raw_right}
    return make_report("gradient", params, left, left_se,
                       raw_right * fac, raw_se * fac)


# ---------------------------------------------------------------------------
# Finite-difference cross-checks and the intrinsic continuity probe, all with
# common random numbers (identical block streams).
# ---------------------------------------------------------------------------

def _evolve_pair_block(c_pair: np.ndarray, cfg: SimConfig, Q: NoiseSpec,
                       rng: np.random.Generator, n_last: int) -> np.ndarray:
    """Advance (size, 2, m) path pairs with shared increments to step n_last."""
    damping = mode_damping(cfg)
    for _ in range(n_last):
        z = rng.standard_normal((c_pair.shape[0], cfg.m, 2))
        dw = Q.q * (z[..., 0] + 1j * z[..., 1]) * np.sqrt(cfg.dt / 2.0)
        c_pair = damping * (c_pair - cfg.dt * drift_quadratic_batch(c_pair)
                            + dw[:, None, :])
    return c_pair


def fd_tangent_comparison(f: TestFunction, x: SpectralField, h: SpectralField,
                          t: float, cfg: SimConfig, Q: NoiseSpec, eps_list, *,
                          n: int = 2000, seed: int | None = None):
    """Directional derivative D_h P_t f(x): tangent estimator vs finite differences.

    All runs share the same noise (common random numbers), so the residual
    between the two estimators is an O(eps) quantity with its own paired SE.
    Returns {"tangent": (mean, se), eps: (fd_mean, fd_se, resid_mean, resid_se)}.
    """
    seed = cfg.seed if seed is None else seed
    n_last = cfg.step_index(t)
    results = {}
    tan_vals = []
    fd_vals = {eps: [] for eps in eps_list}

    for block, size in iter_blocks(n):
        rng = block_rng(seed, 3, block)
        coeffs = np.broadcast_to(x.coeffs, (size, cfg.m)).copy()
        frame = np.broadcast_to(h.coeffs, (size, 1, cfg.m)).copy()
        out = {}

        def sink(step, c, fr):
            out["base"] = c.copy()
            out["tan"] = fr[:, 0, :].copy()

        evolve_block_with_frame(coeffs, frame, cfg, Q, rng, [n_last], sink)
        g = f.grad_batch(out["base"])
        tan_vals.append(_pair_inner(g, out["tan"]))
        f_base = f.value_batch(out["base"])
        for eps in eps_list:
            rng = block_rng(seed, 3, block)  # identical noise
            pair = np.stack([np.broadcast_to(x.coeffs, (size, cfg.m)),
                             np.broadcast_to(x.coeffs + eps * h.coeffs,
                                             (size, cfg.m))], axis=1).astype(complex)
            pair = _evolve_pair_block(pair, cfg, Q, rng, n_last)
            if not np.allclose(pair[:, 0, :], out["base"]):
                raise AssertionError("common-random-number replay drifted")
            fd_vals[eps].append((f.value_batch(pair[:, 1, :]) - f_base) / eps)

    tan = np.concatenate(tan_vals)
    results["tangent"] = (float(tan.mean()), float(tan.std(ddof=1) / np.sqrt(n)))
    for eps in eps_list:
        fd = np.concatenate(fd_vals[eps])
        resid = fd - tan
        results[eps] = (float(fd.mean()), float(fd.std(ddof=1) / np.sqrt(n)),
                        float(resid.mean()), float(resid.std(ddof=1) / np.sqrt(n)))
    return results


def strong_feller_probe(f: TestFunction, x: SpectralField, direction: SpectralField,
                        t: float, cfg: SimConfig, Q: NoiseSpec, *,
                        n: int | None = None, seed: int | None = None,
                        levels: int = 4, threads: int = 1):
    """|P_t f(y_k) - P_t f(x)| along y_k = x + direction/2^k with common noise.

    Returns a list of (intrinsic distance, |difference|), one per level,
    ordered from the largest displacement down.
    """
    base = estimate_Ptf(f, x, t, cfg, Q, n=n, seed=seed, stream=4, threads=threads)
    out = []
    for k in range(levels):
        y = x + direction * (0.5 ** k)
        est = estimate_Ptf(f, y, t, cfg, Q, n=n, seed=seed, stream=4, threads=threads)
        out.append((q_norm(y - x, Q), abs(est.mean - base.mean)))
    return out
