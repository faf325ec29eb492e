"""Fourier transforms, derivatives and the L2 / H1 norms behind every metric.

Transforms approximate the unitary continuous transform
``f_hat(k) = (2 pi)^(-1/2) int f(x) exp(-i k x) dx`` so that Parseval reads
``int |f|^2 dx = int |f_hat|^2 dk`` with no extra factors.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from revlab.grid import ComplexField, Grid1D, RadialGrid, RealField

Region = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Coefficients ordered by j in [-n/2, n/2), i.e. ``k_j = 2 pi j / L``."""

    grid: Grid1D
    coeffs: np.ndarray

    @property
    def k(self) -> np.ndarray:
        return wavenumbers(self.grid)

    @property
    def dk(self) -> float:
        return 2.0 * np.pi / self.grid.length

    @property
    def intensity(self) -> np.ndarray:
        return self.coeffs.real**2 + self.coeffs.imag**2


def wavenumbers(grid: Grid1D) -> np.ndarray:
    """Angular wavenumbers in ascending (shifted) order."""
    j = np.arange(-grid.n // 2, grid.n // 2)
    return 2.0 * np.pi * j / grid.length


def _require_periodic(fld):
    if not isinstance(fld.grid, Grid1D):
        raise TypeError("spectral operations need a periodic Grid1D field, got "
                        f"{type(fld.grid).__name__}")


def forward_transform(fld) -> Spectrum:
    _require_periodic(fld)
    g = fld.grid
    k = wavenumbers(g)
    raw = np.fft.fftshift(np.fft.fft(fld.values))
    coeffs = raw * (g.dx / np.sqrt(2.0 * np.pi)) * np.exp(-1j * k * g.x_min)
    return Spectrum(g, coeffs)


def inverse_transform(spec: Spectrum, z: float = 0.0) -> ComplexField:
    g = spec.grid
    k = wavenumbers(g)
    raw = spec.coeffs * np.exp(1j * k * g.x_min) * (np.sqrt(2.0 * np.pi) / g.dx)
    return ComplexField(g, np.fft.ifft(np.fft.ifftshift(raw)), z)


def _derivative_values(values: np.ndarray, grid: Grid1D) -> np.ndarray:
    return np.fft.ifft(1j * grid.k * np.fft.fft(values))


def spectral_derivative(fld):
    _require_periodic(fld)
    d = _derivative_values(fld.values, fld.grid)
    if isinstance(fld, RealField):
        return RealField(fld.grid, d.real, fld.t)
    return ComplexField(fld.grid, d, fld.z)


def _abs2(v):
    return v.real**2 + v.imag**2


def radial_gradient_density(values: np.ndarray, grid: RadialGrid) -> tuple[np.ndarray, np.ndarray]:
    """|d psi/dr|^2 on half nodes and the matching weights r_{j+1/2} dr.

    The last half node couples to the Dirichlet ghost psi(r_max) = 0.
    """
    dr = grid.dr
    padded = np.append(values, 0.0)
    grad = np.diff(padded) / dr
    r_half = (np.arange(grid.n) + 0.5) * dr
    return _abs2(grad), r_half * dr


def l2_norm_sq(fld) -> float:
    g = fld.grid
    if isinstance(g, RadialGrid):
        return float(2.0 * np.pi * np.sum(g.weights * _abs2(fld.values)))
    return float(g.dx * np.sum(_abs2(fld.values)))


def gradient_norm_sq(fld) -> float:
    g = fld.grid
    if isinstance(g, RadialGrid):
        dens, w = radial_gradient_density(fld.values, g)
        return float(2.0 * np.pi * np.sum(w * dens))
    return float(g.dx * np.sum(_abs2(_derivative_values(fld.values, g))))


def h1_norm_sq(fld) -> float:
    return l2_norm_sq(fld) + gradient_norm_sq(fld)


def h1_norm_sq_restricted(fld, region: Region) -> float:
    """H1 norm squared over ``region`` (predicate on positions).

    The gradient is taken on the whole field before restricting, so the
    result is the norm of the unmodified field on that region.
    """
    g = fld.grid
    if isinstance(g, RadialGrid):
        mask = np.asarray(region(g.r), dtype=bool)
        dens, w = radial_gradient_density(fld.values, g)
        half_mask = np.asarray(region((np.arange(g.n) + 0.5) * g.dr), dtype=bool)
        return float(2.0 * np.pi * (np.sum(g.weights[mask] * _abs2(fld.values[mask]))
                                    + np.sum(w[half_mask] * dens[half_mask])))
    mask = np.asarray(region(g.x), dtype=bool)
    if not mask.any():
        return 0.0
    d = _derivative_values(fld.values, g)
    return float(g.dx * np.sum(_abs2(fld.values[mask]) + _abs2(d[mask])))


def h1_from_farfield(intensity, grid: Grid1D) -> float:
    """H1 norm squared from far-field intensity samples |f_hat(k_j)|^2."""
    intensity = np.asarray(intensity, dtype=float)
    if np.any(intensity < 0):
        raise ValueError("far-field intensity must be nonnegative")
    k = wavenumbers(grid)
    dk = 2.0 * np.pi / grid.length
    return float(np.sum((1.0 + k**2) * intensity) * dk)


def outside(x_max: float) -> Region:
    """Region |x| > x_max (for radial grids, r > x_max)."""
    return lambda x: np.abs(x) > x_max


def at_or_outside(x_max: float) -> Region:
    return lambda x: np.abs(x) >= x_max


def between(a: float, b: float) -> Region:
    """Region a < |x| < b."""
    return lambda x: (np.abs(x) > a) & (np.abs(x) < b)


def not_between(a: float, b: float) -> Region:
    return lambda x: ~((np.abs(x) > a) & (np.abs(x) < b))


def everywhere(x):
    return np.ones(np.shape(x), dtype=bool)


def nowhere(x):
    return np.zeros(np.shape(x), dtype=bool)


def spectral_tail_fraction(values: np.ndarray, fraction: float = 0.1) -> float:
    """Share of L2 energy in the top ``fraction`` of |k| (resolution guard)."""
    spec = _abs2(np.fft.fft(values))
    n = values.shape[0]
    kabs = np.abs(np.fft.fftfreq(n))
    cut = 0.5 * (1.0 - fraction)
    total = spec.sum()
    if total == 0:
        return 0.0
    return float(spec[kabs >= cut].sum() / total)
