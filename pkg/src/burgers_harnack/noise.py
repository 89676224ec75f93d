"""Diagonal covariance operators and Wiener increments.

The covariance Q acts diagonally in the Fourier basis with real symbols
q_k > 0 (q_{-k} = q_k, q_0 = 0).  The diagonal form keeps the
Hilbert-Schmidt norm, the operator norm of A^(-1/2)Q and the intrinsic
norm ||x||_Q = inf{||z|| : Q*z = x} in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectralField


@dataclass(frozen=True)
class NoiseSpec:
    m: int
    q: np.ndarray = field(repr=False)  # real amplitudes q_k > 0, shape (m,)

    def __post_init__(self):
        amps = np.asarray(self.q, dtype=float)
        if amps.shape != (self.m,):
            raise ValueError(f"q shape {amps.shape} does not match m={self.m}")
        if not np.all(amps > 0.0):
            raise ValueError("all mode amplitudes q_k must be strictly positive")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "q", amps)

    @classmethod
    def power_law(cls, m: int, q0: float = 0.5, gamma: float = 1.0) -> "NoiseSpec":
        """q_k = q0 * k**(-gamma); the package default is q0=0.5, gamma=1."""
        k = np.arange(1, m + 1, dtype=float)
        return cls(m, q0 * k ** (-gamma))


def hs_norm(Q: NoiseSpec) -> float:
    """Hilbert-Schmidt norm sqrt(2*sum q_k^2)."""
    return float(np.sqrt(2.0 * np.sum(Q.q ** 2)))


def a_minus_half_op_norm(Q: NoiseSpec) -> float:
    """Operator norm of A^(-1/2)Q, i.e. max_k q_k/k for diagonal Q."""
    k = np.arange(1, Q.m + 1, dtype=float)
    return float(np.max(Q.q / k))


def admissible(nu: float, Q: NoiseSpec) -> bool:
    """The standing condition nu^3 >= 4*pi*||A^(-1/2)Q||^2."""
    return nu ** 3 >= 4.0 * np.pi * a_minus_half_op_norm(Q) ** 2


def q_norm(x: SpectralField, Q: NoiseSpec) -> float:
    """Intrinsic norm ||x||_Q = sqrt(2*sum |x_k|^2/q_k^2); inf on missing modes.

    Infinity is returned when x carries content on a mode outside the range
    of Q (only possible when x.m > Q.m, since the amplitudes are strictly
    positive by construction).
    """
    if x.mean != 0.0:
        raise ValueError("q_norm is defined on zero-mean fields only")
    c = x.coeffs
    if x.m > Q.m and np.any(c[Q.m:] != 0.0):
        return float("inf")
    n = min(x.m, Q.m)
    return float(np.sqrt(2.0 * np.sum(np.abs(c[:n]) ** 2 / Q.q[:n] ** 2)))


def sample_increment(Q: NoiseSpec, dt: float, rng: np.random.Generator) -> SpectralField:
    """One increment Q*dW: mode k gets q_k*(xi + i*eta)*sqrt(dt/2).

    The normalization gives E||Q dW||^2 = hs_norm(Q)^2 * dt.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    z = rng.standard_normal((Q.m, 2))
    c = Q.q * (z[:, 0] + 1j * z[:, 1]) * np.sqrt(dt / 2.0)
    return SpectralField(Q.m, c)


def sample_increments_batch(Q: NoiseSpec, dt: float, n: int,
                            rng: np.random.Generator) -> np.ndarray:
    """n independent increments as a complex array of shape (n, m)."""
    z = rng.standard_normal((n, Q.m, 2))
    return Q.q * (z[..., 0] + 1j * z[..., 1]) * np.sqrt(dt / 2.0)
