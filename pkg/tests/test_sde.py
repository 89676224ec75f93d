"""Time stepping: exact linear decay, ODE-oracle drift, tangent flow, RNG blocks."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from burgers_harnack.noise import NoiseSpec
from burgers_harnack.sde import (BLOCK_SIZE, SimConfig, SimulationDiverged,
                                 block_rng, drift, evolve_block,
                                 evolve_block_with_frame, iter_blocks, map_blocks,
                                 mode_damping, simulate_coupled, simulate_path,
                                 simulate_tangent, step)
from burgers_harnack.spectral import (SpectralField, drift_quadratic_batch, l2_norm,
                                      random_field, sin_field, zero_field)


def make_cfg(**kw):
    base = dict(nu=2.0, m=8, dt=1e-3, t_end=0.1)
    base.update(kw)
    return SimConfig(**base)


class TestSimConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            make_cfg(nu=0.0)
        with pytest.raises(ValueError):
            make_cfg(dt=-1e-3)
        with pytest.raises(ValueError):
            make_cfg(t_end=0.0505)  # not a multiple of dt
        with pytest.raises(ValueError):
            make_cfg(scheme="euler")

    def test_steps_and_grid(self):
        cfg = make_cfg(t_end=0.25)
        assert cfg.n_steps == 250
        assert cfg.step_index(0.1) == 100
        with pytest.raises(ValueError):
            cfg.step_index(0.1005)

    def test_mode_damping(self):
        cfg = make_cfg(nu=2.0, dt=0.05, m=3)
        assert np.allclose(mode_damping(cfg),
                           1.0 / (1.0 + 0.1 * np.array([1.0, 4.0, 9.0])))
        cfg = make_cfg(nu=2.0, dt=0.05, m=3, scheme="exponential")
        assert np.allclose(mode_damping(cfg),
                           np.exp(-0.1 * np.array([1.0, 4.0, 9.0])))


class TestLinearDecayOracle:
    """Along the zero path the tangent flow is the pure heat semigroup, so each
    scheme must reproduce its own per-mode closed form exactly."""

    @pytest.mark.parametrize("scheme", ["semi_implicit", "exponential"])
    def test_tangent_along_zero_path(self, scheme):
        cfg = make_cfg(scheme=scheme, t_end=0.05)
        zero_states = tuple(zero_field(cfg.m) for _ in range(cfg.n_steps + 1))
        path = type("P", (), {"states": zero_states,
                              "times": np.arange(cfg.n_steps + 1) * cfg.dt})
        h = random_field(cfg.m, np.random.default_rng(1))
        tan = simulate_tangent(path, h, cfg)
        k2 = np.arange(1, cfg.m + 1, dtype=float) ** 2
        n = cfg.n_steps
        if scheme == "semi_implicit":
            factor = (1.0 + cfg.nu * cfg.dt * k2) ** (-n)
        else:
            factor = np.exp(-cfg.nu * k2 * n * cfg.dt)
        assert np.allclose(tan.states[-1].coeffs, factor * h.coeffs, rtol=1e-12)


class TestDeterministicFlowOracle:
    """The noise-free discrete map must converge (first order in dt) to the
    Galerkin ODE dX/dt = -nu*A*X - B_m(X) integrated by an adaptive solver."""

    @staticmethod
    def det_evolve(x0, cfg):
        damping = mode_damping(cfg)
        c = x0.coeffs[None, :].copy()
        for _ in range(cfg.n_steps):
            c = damping * (c - cfg.dt * drift_quadratic_batch(c))
        return c[0]

    def test_against_ode_solver(self):
        m, nu, T = 8, 1.0, 0.25
        x0 = sin_field(m)

        def rhs(_, v):
            x = SpectralField(m, v[:m] + 1j * v[m:])
            d = drift(x, nu, m)
            return np.concatenate([d.coeffs.real, d.coeffs.imag])

        v0 = np.concatenate([x0.coeffs.real, x0.coeffs.imag])
        sol = solve_ivp(rhs, (0.0, T), v0, rtol=1e-10, atol=1e-12)
        exact = sol.y[:m, -1] + 1j * sol.y[m:, -1]

        err = {}
        for dt in (1e-3, 5e-4):
            got = self.det_evolve(x0, make_cfg(nu=nu, m=m, dt=dt, t_end=T))
            err[dt] = np.linalg.norm(got - exact)
        assert err[1e-3] < 0.02
        assert err[5e-4] < 0.75 * err[1e-3]  # first-order decay


class TestPaths:
    def test_step_matches_simulate_path(self):
        cfg = make_cfg(t_end=0.005)
        Q = NoiseSpec.power_law(cfg.m)
        x0 = sin_field(cfg.m)
        traj = simulate_path(x0, cfg, Q, np.random.default_rng(77))
        rng = np.random.default_rng(77)
        x = x0
        for _ in range(cfg.n_steps):
            x = step(x, cfg, Q, rng)
        assert np.allclose(x.coeffs, traj.states[-1].coeffs)

    def test_trajectory_bookkeeping(self):
        cfg = make_cfg(t_end=0.02)
        Q = NoiseSpec.power_law(cfg.m)
        traj = simulate_path(zero_field(cfg.m), cfg, Q, np.random.default_rng(5))
        assert len(traj.states) == cfg.n_steps + 1
        assert traj.times[-1] == pytest.approx(0.02)
        assert np.all(np.diff(traj.v_integral) >= 0.0)
        mid = traj.state_at(0.01, cfg)
        assert np.allclose(mid.coeffs, traj.states[10].coeffs)

    def test_seed_determinism(self):
        cfg = make_cfg(t_end=0.01)
        Q = NoiseSpec.power_law(cfg.m)
        a = simulate_path(sin_field(cfg.m), cfg, Q, np.random.default_rng(9))
        b = simulate_path(sin_field(cfg.m), cfg, Q, np.random.default_rng(9))
        assert np.array_equal(a.states[-1].coeffs, b.states[-1].coeffs)

    def test_divergence_guard(self):
        cfg = make_cfg(dt=0.5, t_end=1.0)
        Q = NoiseSpec.power_law(cfg.m)
        huge = sin_field(cfg.m, amplitude=1e5)
        with pytest.raises(SimulationDiverged):
            simulate_path(huge, cfg, Q, np.random.default_rng(0))

    def test_coupled_same_start_identical(self):
        cfg = make_cfg(t_end=0.01)
        Q = NoiseSpec.power_law(cfg.m)
        x0 = sin_field(cfg.m)
        tx, ty = simulate_coupled(x0, x0, cfg, Q, np.random.default_rng(3))
        assert np.array_equal(tx.states[-1].coeffs, ty.states[-1].coeffs)

    def test_coupled_contracts_near_origin(self):
        # synchronous coupling: the noise cancels and the gap decays with the
        # linear rate for small displacements
        cfg = make_cfg(t_end=0.5, nu=2.0)
        Q = NoiseSpec.power_law(cfg.m)
        x0, y0 = zero_field(cfg.m), sin_field(cfg.m, amplitude=0.1)
        tx, ty = simulate_coupled(x0, y0, cfg, Q, np.random.default_rng(4))
        gap0 = l2_norm(y0 - x0)
        gapT = l2_norm(ty.states[-1] - tx.states[-1])
        assert gapT < 0.5 * gap0


class TestTangent:
    def test_linearity(self):
        cfg = make_cfg(t_end=0.02)
        Q = NoiseSpec.power_law(cfg.m)
        path = simulate_path(sin_field(cfg.m), cfg, Q, np.random.default_rng(6))
        h1 = random_field(cfg.m, np.random.default_rng(7))
        h2 = random_field(cfg.m, np.random.default_rng(8))
        d1 = simulate_tangent(path, h1, cfg).states[-1]
        d2 = simulate_tangent(path, h2, cfg).states[-1]
        d12 = simulate_tangent(path, h1 + 2.0 * h2, cfg).states[-1]
        assert np.allclose(d12.coeffs, d1.coeffs + 2.0 * d2.coeffs, atol=1e-13)

    def test_state_level_first_order(self):
        # || X^eps_T - X_T - eps*D_T || = O(eps^2) under common noise
        cfg = make_cfg(t_end=0.1)
        Q = NoiseSpec.power_law(cfg.m)
        x0 = sin_field(cfg.m, amplitude=0.5)
        h = sin_field(cfg.m, k=2)
        base = simulate_path(x0, cfg, Q, np.random.default_rng(10))
        tan = simulate_tangent(base, h, cfg).states[-1]
        resid = {}
        for eps in (1e-2, 1e-3):
            pert = simulate_path(x0 + eps * h, cfg, Q, np.random.default_rng(10))
            resid[eps] = l2_norm(pert.states[-1] - base.states[-1] - eps * tan)
        assert resid[1e-3] < 0.05 * resid[1e-2]  # quadratic decay, factor ~100


class TestBlockEngine:
    def test_iter_blocks_cover(self):
        blocks = list(iter_blocks(25_001))
        assert blocks == [(0, BLOCK_SIZE), (1, BLOCK_SIZE), (2, 1)]
        assert list(iter_blocks(10, 4)) == [(0, 4), (1, 4), (2, 2)]

    def test_block_rng_reproducible_and_distinct(self):
        a = block_rng(42, 0, 0).standard_normal(4)
        b = block_rng(42, 0, 0).standard_normal(4)
        c = block_rng(42, 0, 1).standard_normal(4)
        d = block_rng(42, 1, 0).standard_normal(4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
        assert not np.array_equal(a, d)

    def test_map_blocks_thread_invariant(self):
        def fn(i, s):
            return block_rng(1, 0, i).standard_normal(s).sum()

        serial = map_blocks(10, fn, threads=1, block_size=3)
        parallel = map_blocks(10, fn, threads=4, block_size=3)
        assert serial == parallel

    def test_evolve_block_matches_simulate_path(self):
        cfg = make_cfg(t_end=0.01)
        Q = NoiseSpec.power_law(cfg.m)
        x0 = sin_field(cfg.m)
        traj = simulate_path(x0, cfg, Q, np.random.default_rng(55))
        got = {}

        def sink(s, c, v):
            got[s] = (c.copy(), v.copy())

        evolve_block(x0.coeffs[None, :].copy(), cfg, Q,
                     np.random.default_rng(55), [5, cfg.n_steps], sink)
        assert np.allclose(got[cfg.n_steps][0][0], traj.states[-1].coeffs)
        assert np.allclose(got[5][0][0], traj.states[5].coeffs)
        assert got[cfg.n_steps][1][0] == pytest.approx(traj.v_integral[-1])

    def test_frame_matches_tangent_solver(self):
        cfg = make_cfg(t_end=0.01)
        Q = NoiseSpec.power_law(cfg.m)
        x0 = sin_field(cfg.m)
        h = random_field(cfg.m, np.random.default_rng(66))
        traj = simulate_path(x0, cfg, Q, np.random.default_rng(56))
        expect = simulate_tangent(traj, h, cfg).states[-1]
        got = {}

        def sink(s, c, fr):
            got[s] = (c.copy(), fr.copy())

        evolve_block_with_frame(x0.coeffs[None, :].copy(),
                                h.coeffs[None, None, :].copy(), cfg, Q,
                                np.random.default_rng(56), [cfg.n_steps], sink)
        assert np.allclose(got[cfg.n_steps][0][0], traj.states[-1].coeffs)
        assert np.allclose(got[cfg.n_steps][1][0, 0], expect.coeffs)

    def test_drift_validation(self):
        with pytest.raises(ValueError):
            drift(SpectralField(4, np.zeros(4, dtype=complex), mean=1.0), 1.0, 4)
        with pytest.raises(ValueError):
            drift(zero_field(4), 1.0, 8)
