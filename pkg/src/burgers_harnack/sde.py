"""Time integration of the spectral Galerkin system and its tangent flow.

The state equation dX = -(nu*A*X + B_m(X))dt + Q dW is advanced per Fourier
mode.  Both schemes treat the linear part implicitly/exactly and are
unconditionally stable for it:

  semi_implicit:  X+ = (I + nu*dt*A)^{-1} (X - dt*B_m(X) + Q dW)
  exponential:    X+ = exp(-nu*dt*A)     (X - dt*B_m(X) + Q dW)

The tangent flow dD/dt = -(nu*A*D + B~_m(X, D)), B~(x,y) = B(x,y)+B(y,x),
is integrated with the same scheme along a frozen base path, so that it is
the exact derivative of the discrete flow up to first order in the
displacement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .noise import NoiseSpec
from .spectral import (SpectralField, bilinear_B, coupling_batch,
                       drift_quadratic_batch, l2_sq_batch, project, v_sq_batch)

DIVERGENCE_LIMIT = 1e6

SCHEMES = ("semi_implicit", "exponential")


class SimulationDiverged(RuntimeError):
    """Raised when a path's L2 norm exceeds the overflow guard (dt too large)."""


@dataclass(frozen=True)
class SimConfig:
    nu: float
    m: int
    dt: float
    t_end: float
    n_samples: int = 10_000
    seed: int = 42
    scheme: str = "semi_implicit"

    def __post_init__(self):
        if self.nu <= 0.0:
            raise ValueError(f"nu must be positive, got {self.nu}")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        n = round(self.t_end / self.dt)
        if n < 1 or abs(n * self.dt - self.t_end) > 1e-12 * max(1.0, self.t_end):
            raise ValueError(f"t_end={self.t_end} is not a positive multiple of dt={self.dt}")

    @property
    def n_steps(self) -> int:
        return round(self.t_end / self.dt)

    def step_index(self, t: float) -> int:
        """Index of a grid time t = n*dt, validating that t lies on the grid."""
        n = round(t / self.dt)
        if abs(n * self.dt - t) > 1e-10 * max(1.0, t):
            raise ValueError(f"t={t} is not on the dt={self.dt} grid")
        return n


def mode_damping(cfg: SimConfig) -> np.ndarray:
    """Per-mode linear propagation factor for one step."""
    k2 = np.arange(1, cfg.m + 1, dtype=float) ** 2
    if cfg.scheme == "semi_implicit":
        return 1.0 / (1.0 + cfg.nu * cfg.dt * k2)
    return np.exp(-cfg.nu * cfg.dt * k2)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: tuple  # SpectralField at each grid time
    v_integral: np.ndarray  # left-endpoint quadrature of int ||X_s||_V^2 ds

    def state_at(self, t: float, cfg: SimConfig) -> SpectralField:
        return self.states[cfg.step_index(t)]


@dataclass(frozen=True)
class TangentPath:
    times: np.ndarray
    states: tuple  # SpectralField D_h X at each grid time
    direction: SpectralField


def drift(x: SpectralField, nu: float, m: int) -> SpectralField:
    """-nu*A*x - B_m(x) on H_m."""
    if x.mean != 0.0 or x.m != m:
        raise ValueError("drift expects a zero-mean field at the working truncation")
    k2 = np.arange(1, m + 1, dtype=float) ** 2
    bm = project(bilinear_B(x, x), m)
    return SpectralField(m, -nu * k2 * x.coeffs - bm.coeffs)


def _step_coeffs(coeffs: np.ndarray, damping: np.ndarray, dt: float,
                 increments: np.ndarray | None, workers: int = 1) -> np.ndarray:
    out = coeffs - dt * drift_quadratic_batch(coeffs, workers)
    if increments is not None:
        out = out + increments
    return damping * out


def step(x: SpectralField, cfg: SimConfig, Q: NoiseSpec,
         rng: np.random.Generator) -> SpectralField:
    """One time step of the chosen scheme from state x."""
    from .noise import sample_increments_batch

    if x.m != cfg.m:
        raise ValueError(f"state truncation {x.m} does not match config m={cfg.m}")
    dw = sample_increments_batch(Q, cfg.dt, 1, rng)
    new = _step_coeffs(x.coeffs[None, :], mode_damping(cfg), cfg.dt, dw)
    return SpectralField(cfg.m, new[0])


def simulate_path(x0: SpectralField, cfg: SimConfig, Q: NoiseSpec,
                  rng: np.random.Generator) -> Trajectory:
    """Iterate the scheme from x0 to t_end, recording every grid state."""
    from .noise import sample_increments_batch

    damping = mode_damping(cfg)
    coeffs = x0.coeffs[None, :].copy()
    states = [x0]
    v_int = [0.0]
    for n in range(cfg.n_steps):
        v_int.append(v_int[-1] + cfg.dt * float(v_sq_batch(coeffs)[0]))
        dw = sample_increments_batch(Q, cfg.dt, 1, rng)
        coeffs = _step_coeffs(coeffs, damping, cfg.dt, dw)
        if l2_sq_batch(coeffs)[0] > DIVERGENCE_LIMIT ** 2:
            raise SimulationDiverged(
                f"path diverged at t={(n + 1) * cfg.dt:.6g} (|X| > {DIVERGENCE_LIMIT:g}); "
                "reduce dt")
        states.append(SpectralField(cfg.m, coeffs[0]))
    times = np.arange(cfg.n_steps + 1) * cfg.dt
    return Trajectory(times, tuple(states), np.asarray(v_int))


def simulate_coupled(x0: SpectralField, y0: SpectralField, cfg: SimConfig,
                     Q: NoiseSpec, rng: np.random.Generator) -> tuple[Trajectory, Trajectory]:
    """Two trajectories driven by identical noise increments (synchronous coupling)."""
    from .noise import sample_increments_batch

    damping = mode_damping(cfg)
    coeffs = np.stack([x0.coeffs, y0.coeffs])
    states_x, states_y = [x0], [y0]
    vx, vy = [0.0], [0.0]
    for n in range(cfg.n_steps):
        v = v_sq_batch(coeffs)
        vx.append(vx[-1] + cfg.dt * float(v[0]))
        vy.append(vy[-1] + cfg.dt * float(v[1]))
        dw = sample_increments_batch(Q, cfg.dt, 1, rng)
        coeffs = _step_coeffs(coeffs, damping, cfg.dt, np.broadcast_to(dw, coeffs.shape))
        if np.max(l2_sq_batch(coeffs)) > DIVERGENCE_LIMIT ** 2:
            raise SimulationDiverged(f"coupled pair diverged at t={(n + 1) * cfg.dt:.6g}")
        states_x.append(SpectralField(cfg.m, coeffs[0]))
        states_y.append(SpectralField(cfg.m, coeffs[1]))
    times = np.arange(cfg.n_steps + 1) * cfg.dt
    return (Trajectory(times, tuple(states_x), np.asarray(vx)),
            Trajectory(times, tuple(states_y), np.asarray(vy)))


def simulate_tangent(path: Trajectory, h: SpectralField, cfg: SimConfig) -> TangentPath:
    """Integrate the tangent flow along a frozen base path, D_0 = h."""
    if h.m != cfg.m:
        raise ValueError(f"direction truncation {h.m} does not match config m={cfg.m}")
    damping = mode_damping(cfg)
    d = h.coeffs[None, :].copy()
    states = [h]
    for n in range(cfg.n_steps):
        base = path.states[n].coeffs[None, :]
        d = damping * (d - cfg.dt * coupling_batch(base, d))
        states.append(SpectralField(cfg.m, d[0]))
    return TangentPath(path.times.copy(), tuple(states), h)


# ---------------------------------------------------------------------------
# Batched Monte-Carlo engine.  Samples are split into fixed-size blocks, each
# block owning a random stream derived from (seed, stream, block index); the
# reduction is ordered by block index, so results do not depend on how many
# threads process the blocks.
# ---------------------------------------------------------------------------

BLOCK_SIZE = 12_500


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(entropy=seed, spawn_key=(stream, block))))


def iter_blocks(n: int, block_size: int = BLOCK_SIZE):
    """Yield (block_index, block_size) pairs covering n samples."""
    idx = 0
    done = 0
    while done < n:
        size = min(block_size, n - done)
        yield idx, size
        idx += 1
        done += size


def map_blocks(n: int, fn: Callable[[int, int], object], threads: int = 1,
               block_size: int = BLOCK_SIZE) -> list:
    """Apply fn(block_index, size) over all blocks; result order is by index."""
    blocks = list(iter_blocks(n, block_size))
    if threads <= 1 or len(blocks) == 1:
        return [fn(i, s) for i, s in blocks]
    from concurrent.futures import ThreadPoolExecutor
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(fn, i, s) for i, s in blocks]
        return [f.result() for f in futures]


def evolve_block(coeffs: np.ndarray, cfg: SimConfig, Q: NoiseSpec,
                 rng: np.random.Generator, record: Sequence[int],
                 sink: Callable[[int, np.ndarray, np.ndarray], None]) -> None:
    """Advance a block of paths, calling sink(step, coeffs, v_integral) at each
    recorded step index (0 = initial condition)."""
    damping = mode_damping(cfg)
    record = set(record)
    n_last = max(record) if record else cfg.n_steps
    v_int = np.zeros(coeffs.shape[0])
    if 0 in record:
        sink(0, coeffs, v_int)
    for n in range(n_last):
        v_int = v_int + cfg.dt * v_sq_batch(coeffs)
        z = rng.standard_normal((coeffs.shape[0], cfg.m, 2))
        dw = Q.q * (z[..., 0] + 1j * z[..., 1]) * np.sqrt(cfg.dt / 2.0)
        coeffs = _step_coeffs(coeffs, damping, cfg.dt, dw)
        if np.max(l2_sq_batch(coeffs)) > DIVERGENCE_LIMIT ** 2:
            raise SimulationDiverged(
                f"a Monte-Carlo path diverged at t={(n + 1) * cfg.dt:.6g}; reduce dt")
        if (n + 1) in record:
            sink(n + 1, coeffs, v_int)


def evolve_block_with_frame(coeffs: np.ndarray, frame: np.ndarray, cfg: SimConfig,
                            Q: NoiseSpec, rng: np.random.Generator,
                            record: Sequence[int],
                            sink: Callable[[int, np.ndarray, np.ndarray], None]) -> None:
    """Advance paths together with a batch of tangent directions.

    frame has shape (n_paths, n_dir, m); sink receives (step, coeffs, frame).
    """
    damping = mode_damping(cfg)
    record = set(record)
    n_last = max(record)
    if 0 in record:
        sink(0, coeffs, frame)
    for n in range(n_last):
        z = rng.standard_normal((coeffs.shape[0], cfg.m, 2))
        dw = Q.q * (z[..., 0] + 1j * z[..., 1]) * np.sqrt(cfg.dt / 2.0)
        base = coeffs[:, None, :]
        frame = damping * (frame - cfg.dt * coupling_batch(base, frame))
        coeffs = _step_coeffs(coeffs, damping, cfg.dt, dw)
        if np.max(l2_sq_batch(coeffs)) > DIVERGENCE_LIMIT ** 2:
            raise SimulationDiverged(
                f"a Monte-Carlo path diverged at t={(n + 1) * cfg.dt:.6g}; reduce dt")
        if (n + 1) in record:
            sink(n + 1, coeffs, frame)
