"""Truncated Fourier representation of zero-mean fields on the torus.

A field is stored through its coefficients on the orthonormal basis
e_k(theta) = (2*pi)**(-1/2) * exp(i*k*theta).  Only the modes k = 1..m are
kept; the negative modes are the complex conjugates (the physical field is
real), and the mode-0 coefficient is carried separately as ``mean`` because
quadratic products of zero-mean fields generally pick up a constant part.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class SpectralField:
    """A real field x(theta) = mean*e_0 + sum_{0<|k|<=m} x_k e_k, x_{-k} = conj(x_k)."""

    m: int
    coeffs: np.ndarray = field(repr=False)  # complex, shape (m,), modes 1..m
    mean: float = 0.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"truncation level must be >= 1, got {self.m}")
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != (self.m,):
            raise ValueError(f"coeffs shape {c.shape} does not match m={self.m}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "mean", float(self.mean))

    # -- small vector-space conveniences used throughout the tests/drivers --

    def _check_same(self, other: "SpectralField"):
        if self.m != other.m:
            raise ValueError(f"truncation mismatch: {self.m} != {other.m}")

    def __add__(self, other: "SpectralField") -> "SpectralField":
        self._check_same(other)
        return SpectralField(self.m, self.coeffs + other.coeffs, self.mean + other.mean)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        self._check_same(other)
        return SpectralField(self.m, self.coeffs - other.coeffs, self.mean - other.mean)

    def __mul__(self, a: float) -> "SpectralField":
        return SpectralField(self.m, self.coeffs * a, self.mean * a)

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralField":
        return self * (-1.0)


@dataclass(frozen=True)
class NormReport:
    """L2 norm, first-order Sobolev norm and the pointwise sup bound sqrt(pi)*|x|_V."""

    l2: float
    v: float
    sup_bound: float


def zero_field(m: int) -> SpectralField:
    return SpectralField(m, np.zeros(m, dtype=np.complex128))


def sin_field(m: int, k: int = 1, amplitude: float = 1.0) -> SpectralField:
    """amplitude * sin(k*theta); its mode-k coefficient is -i*amplitude*sqrt(pi/2)."""
    if not 1 <= k <= m:
        raise ValueError(f"mode {k} outside 1..{m}")
    c = np.zeros(m, dtype=np.complex128)
    c[k - 1] = -1j * amplitude * np.sqrt(np.pi / 2.0)
    return SpectralField(m, c)


def cos_field(m: int, k: int = 1, amplitude: float = 1.0) -> SpectralField:
    """amplitude * cos(k*theta); its mode-k coefficient is amplitude*sqrt(pi/2)."""
    if not 1 <= k <= m:
        raise ValueError(f"mode {k} outside 1..{m}")
    c = np.zeros(m, dtype=np.complex128)
    c[k - 1] = amplitude * np.sqrt(np.pi / 2.0)
    return SpectralField(m, c)


def random_field(m: int, rng: np.random.Generator, decay: float = 1.0,
                 scale: float = 1.0) -> SpectralField:
    """Zero-mean field with independent complex Gaussian modes of size scale*k**(-decay)."""
    k = np.arange(1, m + 1, dtype=float)
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return SpectralField(m, scale * z * k ** (-decay))


def embed(x: SpectralField, m: int) -> SpectralField:
    """Zero-pad x into a larger truncation level."""
    if m < x.m:
        raise ValueError(f"cannot embed m={x.m} into smaller m={m}")
    c = np.zeros(m, dtype=np.complex128)
    c[: x.m] = x.coeffs
    return SpectralField(m, c, x.mean)


def inner(x: SpectralField, y: SpectralField) -> float:
    """L2 inner product <x, y> on the torus."""
    x._check_same(y)
    return x.mean * y.mean + 2.0 * float(np.sum(x.coeffs * np.conj(y.coeffs)).real)


def l2_norm(x: SpectralField) -> float:
    """||x|| = sqrt(mean^2 + 2*sum |x_k|^2)."""
    return float(np.sqrt(x.mean ** 2 + 2.0 * np.sum(np.abs(x.coeffs) ** 2)))


def v_norm(x: SpectralField) -> float:
    """||x||_V = sqrt(2*sum k^2 |x_k|^2); defined on zero-mean fields only."""
    if x.mean != 0.0:
        raise ValueError("v_norm is defined on zero-mean fields only")
    k = np.arange(1, x.m + 1, dtype=float)
    return float(np.sqrt(2.0 * np.sum(k ** 2 * np.abs(x.coeffs) ** 2)))


def norm_report(x: SpectralField) -> NormReport:
    v = v_norm(x)
    return NormReport(l2=l2_norm(x), v=v, sup_bound=float(np.sqrt(np.pi)) * v)


def apply_A_power(x: SpectralField, s: float) -> SpectralField:
    """Apply A^s where A = -Laplacian, i.e. multiply mode k by k^(2s)."""
    if x.mean != 0.0:
        raise ValueError("fractional powers of A act on zero-mean fields only")
    k = np.arange(1, x.m + 1, dtype=float)
    return SpectralField(x.m, x.coeffs * k ** (2.0 * s))


def project(x: SpectralField, m: int) -> SpectralField:
    """Orthogonal projection onto span{e_k : 0 < |k| <= m}; drops the mean."""
    if m > x.m:
        raise ValueError(f"projection level {m} exceeds truncation {x.m}")
    return SpectralField(m, x.coeffs[:m])


def _full_spectrum(x: SpectralField) -> np.ndarray:
    """Coefficients on modes -m..m as an array indexed by k+m."""
    full = np.zeros(2 * x.m + 1, dtype=np.complex128)
    full[x.m] = x.mean
    full[x.m + 1:] = x.coeffs
    full[: x.m] = np.conj(x.coeffs[::-1])
    return full


def bilinear_B(x: SpectralField, y: SpectralField) -> SpectralField:
    """Exact spectral coefficients of x * y' on modes |k| <= 2m, mean included.

    Computed by direct convolution, so there is no aliasing error; the
    Galerkin drift term is project(bilinear_B(x, x), m).
    """
    x._check_same(y)
    if x.mean != 0.0 or y.mean != 0.0:
        raise ValueError("bilinear operator takes zero-mean fields")
    m = x.m
    fx = _full_spectrum(x)
    k = np.arange(-m, m + 1, dtype=float)
    dy = 1j * k * _full_spectrum(y)
    conv = np.convolve(fx, dy) / SQRT_2PI  # modes -2m..2m
    mid = 2 * m
    return SpectralField(2 * m, conv[mid + 1:], mean=conv[mid].real)


def bilinear_B_sym(x: SpectralField, y: SpectralField) -> SpectralField:
    """B(x,y) + B(y,x) = (x*y)'; the mean coefficient is structurally zero."""
    x._check_same(y)
    if x.mean != 0.0 or y.mean != 0.0:
        raise ValueError("bilinear operator takes zero-mean fields")
    m = x.m
    prod = np.convolve(_full_spectrum(x), _full_spectrum(y)) / SQRT_2PI
    k = np.arange(-2 * m, 2 * m + 1, dtype=float)
    deriv = 1j * k * prod
    return SpectralField(2 * m, deriv[2 * m + 1:], mean=0.0)


def eval_physical(x: SpectralField, n_grid: int) -> np.ndarray:
    """Sample x on the uniform grid theta_j = 2*pi*j/n_grid (exact for n_grid >= 2m+1)."""
    if n_grid < 2 * x.m + 1:
        raise ValueError(f"n_grid={n_grid} too coarse for m={x.m} (need >= {2 * x.m + 1})")
    a = np.zeros(n_grid, dtype=np.complex128)
    a[0] = x.mean
    a[1: x.m + 1] = x.coeffs
    a[-x.m:] = np.conj(x.coeffs[::-1])
    vals = np.fft.ifft(a) * (n_grid / SQRT_2PI)
    if np.max(np.abs(vals.imag)) > 1e-12 * max(1.0, np.max(np.abs(vals.real))):
        raise AssertionError("inverse transform left a non-negligible imaginary part")
    return vals.real


def field_from_samples(values: np.ndarray, m: int) -> SpectralField:
    """Recover the field (modes 0..m) from uniform physical samples."""
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    if n < 2 * m + 1:
        raise ValueError(f"{n} samples cannot resolve m={m}")
    spec = np.fft.rfft(values) * (SQRT_2PI / n)
    return SpectralField(m, spec[1: m + 1], mean=spec[0].real)


# ---------------------------------------------------------------------------
# Batched kernels.  Monte-Carlo drivers carry ensembles of fields as complex
# arrays of shape (..., m) (modes 1..m, zero mean); the quadratic terms are
# evaluated pseudospectrally on a padded grid of >= 3m+1 points, which is
# exact (dealiased) for the retained modes.
# ---------------------------------------------------------------------------

def padded_grid_size(m: int) -> int:
    return sfft.next_fast_len(3 * m + 1, real=True)


def physical_batch(coeffs: np.ndarray, n_grid: int, workers: int = 1) -> np.ndarray:
    """Real grid values of a batch of zero-mean fields, shape (..., n_grid)."""
    m = coeffs.shape[-1]
    spec = np.zeros(coeffs.shape[:-1] + (n_grid // 2 + 1,), dtype=np.complex128)
    spec[..., 1: m + 1] = coeffs
    return sfft.irfft(spec, n=n_grid, axis=-1, workers=workers) * (n_grid / SQRT_2PI)


def l2_sq_batch(coeffs: np.ndarray) -> np.ndarray:
    return 2.0 * np.sum(np.abs(coeffs) ** 2, axis=-1)


def v_sq_batch(coeffs: np.ndarray) -> np.ndarray:
    k2 = np.arange(1, coeffs.shape[-1] + 1, dtype=float) ** 2
    return 2.0 * np.sum(k2 * np.abs(coeffs) ** 2, axis=-1)


def drift_quadratic_batch(coeffs: np.ndarray, workers: int = 1) -> np.ndarray:
    """Modes 1..m of x*x' = (x^2)'/2 for a batch of fields, dealiased."""
    m = coeffs.shape[-1]
    ng = padded_grid_size(m)
    phys = physical_batch(coeffs, ng, workers)
    spec = sfft.rfft(phys * phys, axis=-1, workers=workers) * (SQRT_2PI / ng)
    k = np.arange(1, m + 1, dtype=float)
    return 0.5j * k * spec[..., 1: m + 1]


def coupling_batch(x_coeffs: np.ndarray, d_coeffs: np.ndarray,
                   workers: int = 1) -> np.ndarray:
    """Modes 1..m of (x*d)' = B(x,d) + B(d,x), broadcasting x against d."""
    m = d_coeffs.shape[-1]
    ng = padded_grid_size(m)
    px = physical_batch(x_coeffs, ng, workers)
    pd = physical_batch(d_coeffs, ng, workers)
    spec = sfft.rfft(px * pd, axis=-1, workers=workers) * (SQRT_2PI / ng)
    k = np.arange(1, m + 1, dtype=float)
    return 1j * k * spec[..., 1: m + 1]
