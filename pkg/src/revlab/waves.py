"""Coherent structures and initial conditions.

Cubic-quintic solitary waves (closed form in 1D, shooting in 2D), the
two-beam fusion input, phi^4 kinks, the explicit 2D blowup solution and
the Galilean boost.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq, minimize_scalar

from revlab import kernels
from revlab.grid import ComplexField, Grid1D, RadialGrid, RealField


class BracketError(RuntimeError):
    """A shooting or root search failed to bracket a sign change."""


@dataclass(frozen=True)
class SolitaryParams:
    kappa: float
    epsilon: float = 1e-3
    dimension: int = 1

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if self.dimension == 1 and 1.0 - 16.0 * self.kappa * self.epsilon / 3.0 < 0:
            raise ValueError(f"no 1D solitary wave for kappa*epsilon = {self.kappa * self.epsilon}"
                             " (need kappa*epsilon <= 3/16)")


@dataclass(frozen=True)
class KinkParams:
    x0: float = 0.0
    v: float = 0.0
    sign: int = 1  # +1 kink, -1 antikink

    def __post_init__(self):
        if not -1.0 < self.v < 1.0:
            raise ValueError(f"kink velocity must satisfy |v| < 1, got {self.v}")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 (kink) or -1 (antikink)")


@dataclass(frozen=True)
class BlowupParams:
    t_c: float = 1.0

    def __post_init__(self):
        if self.t_c <= 0:
            raise ValueError("t_c must be positive")


# ---------------------------------------------------------------------------
# 1D cubic-quintic solitary wave


def cq_amplitude_sq(kappa, epsilon):
    """Peak intensity R_kappa(0)^2 of the 1D solitary wave."""
    disc = 1.0 - 16.0 * kappa * epsilon / 3.0
    if np.any(np.asarray(disc) < 0):
        raise ValueError("kappa*epsilon out of range for the 1D solitary wave")
    return 4.0 * kappa / (1.0 + np.sqrt(disc))


def cq_profile(x, kappa, epsilon):
    """R_kappa(x) solving -kappa R + R'' + R^3 - epsilon R^5 = 0 on the line.

    R^2 = 4 kappa / (1 + sqrt(1 - 16 kappa epsilon / 3) cosh(2 sqrt(kappa) x)).
    """
    disc = 1.0 - 16.0 * kappa * epsilon / 3.0
    if disc < 0:
        raise ValueError(f"kappa*epsilon = {kappa * epsilon} exceeds 3/16; no solitary wave")
    arg = np.minimum(np.abs(2.0 * np.sqrt(kappa) * np.asarray(x, dtype=float)), 700.0)
    return 2.0 * np.sqrt(kappa) / np.sqrt(1.0 + np.sqrt(disc) * np.cosh(arg))


def cq_solitary_1d(params: SolitaryParams | float, grid: Grid1D, epsilon: float | None = None) -> ComplexField:
    if not isinstance(params, SolitaryParams):
        params = SolitaryParams(float(params), 1e-3 if epsilon is None else epsilon)
    return ComplexField(grid, cq_profile(grid.x, params.kappa, params.epsilon).astype(complex))


def cq_residual_1d(fld: ComplexField, kappa: float, epsilon: float) -> np.ndarray:
    """-kappa R + R'' + R^3 - eps R^5 with a spectral second derivative."""
    g = fld.grid
    v = fld.values
    d2 = np.fft.ifft(-(g.k**2) * np.fft.fft(v))
    a = np.abs(v) ** 2
    return -kappa * v + d2 + a * v - epsilon * a * a * v


def fusion_ic(kappa: float = 90.0, x0: float = 2.0, theta: float = 7 * np.pi / 8,
              grid: Grid1D | None = None, epsilon: float = 1e-3) -> ComplexField:
    """Two in-phase solitary waves at +-x0 moving towards each other."""
    if grid is None:
        raise ValueError("fusion_ic needs a grid")
    edge = min(-grid.x_min, grid.x_max) - x0
    if cq_profile(edge, kappa, epsilon) > 1e-12:
        raise ValueError(f"domain too narrow for x0={x0}: solitary tail at the edge is "
                         f"{cq_profile(edge, kappa, epsilon):.3e}")
    x = grid.x
    values = (np.exp(-1j * theta * x) * cq_profile(x - x0, kappa, epsilon)
              + np.exp(1j * theta * x) * cq_profile(x + x0, kappa, epsilon))
    return ComplexField(grid, values)


# ---------------------------------------------------------------------------
# 2D radial ground states


def radial_operator(grid: RadialGrid):
    """Tridiagonal finite-volume Laplacian d_rr + d_r / r with Dirichlet at r_max.

    Returns (lower, diag, upper); the operator is self-adjoint with respect
    to ``grid.weights``.
    """
    n, dr = grid.n, grid.dr
    j = np.arange(n, dtype=float)
    lower = np.zeros(n)
    upper = np.zeros(n)
    diag = np.full(n, -2.0 / dr**2)
    jj = j[1:]
    lower[1:] = (jj - 0.5) / (jj * dr**2)
    upper[1:] = (jj + 0.5) / (jj * dr**2)
    upper[0] = 4.0 / dr**2
    diag[0] = -4.0 / dr**2
    upper[-1] = 0.0
    return lower, diag, upper


def apply_radial_operator(values, grid: RadialGrid):
    lower, diag, upper = radial_operator(grid)
    out = diag * values
    out[:-1] += upper[:-1] * values[1:]
    out[1:] += lower[1:] * values[:-1]
    return out


def radial_residual(values, kappa, epsilon, grid: RadialGrid):
    """Discrete residual A R - kappa R + R^3 - eps R^5 (A = radial_operator)."""
    a = np.abs(values) ** 2
    return apply_radial_operator(values, grid) - kappa * values + a * values - epsilon * a * a * values


def _upper_bracket(kappa, epsilon):
    if epsilon > 0:
        disc = 1.0 - 4.0 * epsilon * kappa
        if disc <= 0:
            raise BracketError(f"no radial ground state for kappa*epsilon={kappa * epsilon} >= 1/4")
        # larger root of kappa - R^2 + eps R^4; beyond it the force changes sign again
        return np.sqrt((1.0 + np.sqrt(disc)) / (2.0 * epsilon)) * (1.0 - 1e-9)
    return 10.0 * np.sqrt(kappa)


def _linear_tail(values, start, kappa, grid: RadialGrid):
    """Overwrite values[start:] with the decaying solution of A R = kappa R.

    Backward recurrence from the Dirichlet ghost is stable for the decaying
    branch; the result is rescaled to match values[start].
    """
    n, dr = grid.n, grid.dr
    tail = np.zeros(n + 1)
    tail[n] = 0.0
    tail[n - 1] = 1e-300
    dr2 = dr * dr
    for j in range(n - 1, start, -1):
        r_j, r_n = tail[j], tail[j + 1]
        tail[j - 1] = r_j - ((j + 0.5) * (r_n - r_j) - j * dr2 * kappa * r_j) / (j - 0.5)
        if tail[j - 1] > 1e250:
            tail[j - 1:] *= 1e-250
    if tail[start] == 0.0:
        return
    values[start:] = tail[start:n] * (values[start] / tail[start])


def solitary_2d_shoot(params: SolitaryParams | float, grid: RadialGrid, epsilon: float | None = None,
                      max_iter: int = 200) -> ComplexField:
    """Radial ground state of -kappa R + R'' + R'/r + R^3 - eps R^5 = 0.

    Bisection on R(0), marching the same finite-volume discretisation the
    radial propagator uses, so the result is a discrete stationary state of
    that solver. Beyond the point where the two bracketing trajectories part,
    the decaying linear tail is attached.
    """
    if not isinstance(params, SolitaryParams):
        params = SolitaryParams(float(params), 0.0 if epsilon is None else epsilon, dimension=2)
    kappa, eps = params.kappa, params.epsilon
    values = _shoot_profile(kappa, eps, grid.r_max, grid.n, max_iter)
    return ComplexField(grid, values.astype(complex))


@lru_cache(maxsize=64)
def _shoot_profile_cached(kappa, eps, r_max, n, max_iter):
    grid = RadialGrid(r_max, n)
    dr = grid.dr
    lo, hi = 0.0, _upper_bracket(kappa, eps)
    buf_lo = np.zeros(n)
    buf_hi = np.zeros(n)
    status, _ = kernels.radial_shoot(hi, kappa, eps, dr, buf_hi)
    while status != 1 and eps == 0 and hi < 1e6:
        hi *= 2.0
        status, _ = kernels.radial_shoot(hi, kappa, eps, dr, buf_hi)
    if status != 1:
        raise BracketError(f"shooting bracket [0, {hi:g}] has no overshoot "
                           f"(kappa={kappa}, eps={eps})")
    last_lo = last_hi = 0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        buf = np.zeros(n)
        status, last = kernels.radial_shoot(mid, kappa, eps, dr, buf)
        if status == 0:
            buf_lo, last_lo = buf, last
            lo = hi = mid
            break
        if status > 0:
            hi, buf_hi, last_hi = mid, buf, last
        else:
            lo, buf_lo, last_lo = mid, buf, last
    if lo == 0.0:
        raise BracketError(f"shooting did not converge for kappa={kappa}, eps={eps}")
    kernels.radial_shoot(lo, kappa, eps, dr, buf_lo)
    status_hi, last_hi = kernels.radial_shoot(hi, kappa, eps, dr, buf_hi)
    status_lo, last_lo = kernels.radial_shoot(lo, kappa, eps, dr, buf_lo)
    limit = min(last_lo, last_hi) if status_lo != 0 else n - 1
    if limit >= n - 1:
        return buf_lo.copy()
    ref = np.maximum(np.abs(buf_lo[: limit + 1]), 1e-300)
    apart = np.flatnonzero(np.abs(buf_hi[: limit + 1] - buf_lo[: limit + 1]) > 1e-6 * ref)
    start = int(apart[0]) if apart.size else limit
    start = max(1, min(start, limit))
    values = buf_lo.copy()
    values[start + 1:] = 0.0
    _linear_tail(values, start, kappa, grid)
    values[values < 0] = 0.0
    return _newton_polish(values, kappa, eps, grid)


def _newton_polish(values, kappa, eps, grid: RadialGrid, iters=6, tol=1e-13):
    # the splice leaves an O(1e-6) kink; a few Newton steps on the banded
    # discrete system remove it
    lower, diag, upper = radial_operator(grid)
    n = grid.n
    ab = np.zeros((3, n))
    for _ in range(iters):
        res = radial_residual(values, kappa, eps, grid)
        if np.max(np.abs(res)) < tol * max(1.0, kappa * values[0]):
            break
        a = values * values
        ab[0, 1:] = upper[:-1]
        ab[1] = diag - kappa + 3.0 * a - 5.0 * eps * a * a
        ab[2, :-1] = lower[1:]
        step = solve_banded((1, 1), ab, res, check_finite=False)
        values = values - step
    return values


def _shoot_profile(kappa, eps, r_max, n, max_iter):
    prof = _shoot_profile_cached(float(kappa), float(eps), float(r_max), int(n), int(max_iter))
    return prof.copy()


def rk4_ground_state(kappa: float, epsilon: float, r_max: float, n: int, substeps: int = 4,
                     max_iter: int = 80):
    """Continuous-ODE ground state by RK4 shooting; returns (r, R(0)).

    Independent of the finite-volume route; used as a cross-check.
    """
    h = r_max / n / substeps

    def rhs(r, y):
        R, P = y
        g = kappa * R - R**3 + epsilon * R**5
        return np.array([P, g - P / r])

    def march(r0):
        g0 = kappa * r0 - r0**3 + epsilon * r0**5
        r = h
        y = np.array([r0 + 0.25 * g0 * h * h, 0.5 * g0 * h])
        for _ in range(n * substeps - 1):
            k1 = rhs(r, y)
            k2 = rhs(r + h / 2, y + h / 2 * k1)
            k3 = rhs(r + h / 2, y + h / 2 * k2)
            k4 = rhs(r + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            r += h
            if y[0] < 0:
                return 1
            if y[1] > 0:
                return -1
        return 0

    lo, hi = 0.0, _upper_bracket(kappa, epsilon)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        s = march(mid)
        if s == 0:
            return mid
        if s > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-13 * hi:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# peak-amplitude fit


def _radial_peak(kappa, epsilon):
    # grid sized to the core width; accuracy O(dr^2) with ~300 points per width
    width = 1.0 / np.sqrt(kappa)
    grid = RadialGrid(40.0 * width, 8192)
    return float(_shoot_profile(kappa, epsilon, grid.r_max, grid.n, 200)[0])


@lru_cache(maxsize=8)
def _radial_peak_top(epsilon):
    res = minimize_scalar(lambda k: -_radial_peak(k, epsilon), method="bounded",
                          bounds=(0.3 / epsilon / 4.0, 0.7 / epsilon / 4.0),
                          options={"xatol": 1e-3})
    return float(res.x)


def fit_kappa(fld: ComplexField, epsilon: float, tol: float = 1e-10) -> float:
    """kappa whose solitary wave has the same peak amplitude as ``fld``."""
    peak = float(np.max(np.abs(fld.values)))
    if isinstance(fld.grid, RadialGrid):
        if epsilon <= 0:
            # R_kappa(0) = sqrt(kappa) R_1(0) when epsilon = 0
            return (peak / _radial_peak(1.0, 0.0)) ** 2
        # the 2D peak amplitude rises, tops out and falls again as the
        # profile flattens; only the rising branch is used
        k_top = _radial_peak_top(epsilon)

        def f(k):
            return _radial_peak(k, epsilon) - peak

        lo = 1e-6
        if f(lo) > 0 or f(k_top) < 0:
            raise ValueError(f"peak amplitude {peak:g} outside the radial solitary family")
        return brentq(f, lo, k_top, xtol=tol * 1e3, rtol=1e-12)
    target = peak**2
    if epsilon <= 0:
        return target / 2.0
    k_hi = 3.0 / (16.0 * epsilon)
    if target > cq_amplitude_sq(k_hi, epsilon):
        raise ValueError(f"peak intensity {target:g} exceeds the solitary family maximum")
    lo, hi = 0.0, k_hi
    while hi - lo > tol * max(hi, 1.0):
        mid = 0.5 * (lo + hi)
        if cq_amplitude_sq(mid, epsilon) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# phi^4 kinks


def kink_profile(x, t, params: KinkParams):
    gamma = np.sqrt(1.0 - params.v**2)
    xi = (np.asarray(x) - params.x0 - params.v * t) / gamma
    return params.sign * np.tanh(xi / np.sqrt(2.0))


def kink_velocity(x, t, params: KinkParams):
    """d/dt of kink_profile."""
    gamma = np.sqrt(1.0 - params.v**2)
    xi = (np.asarray(x) - params.x0 - params.v * t) / gamma
    return -params.sign * params.v / (gamma * np.sqrt(2.0)) / np.cosh(xi / np.sqrt(2.0)) ** 2


def kink_field(params: KinkParams, grid: Grid1D, t: float = 0.0) -> RealField:
    return RealField(grid, kink_profile(grid.x, t, params), t)


def kink_antikink_ic(v: float, x0: float, grid: Grid1D):
    """Kink at -x0 moving right, antikink at +x0 moving left, vacuum -1 outside.

    phi = phi_K(x + x0; v) - phi_K(x - x0; -v) - 1, which sits at the same
    vacuum at both ends and at +1 between the pair.
    """
    from revlab.phi4 import KleinGordonState

    if not -1.0 < v < 1.0:
        raise ValueError(f"|v| must be < 1, got {v}")
    if x0 <= 0:
        raise ValueError("x0 must be positive")
    kink = KinkParams(x0=-x0, v=v, sign=1)
    anti = KinkParams(x0=x0, v=-v, sign=-1)
    x = grid.x
    phi = kink_profile(x, 0.0, kink) + kink_profile(x, 0.0, anti) - 1.0
    pi = kink_velocity(x, 0.0, kink) + kink_velocity(x, 0.0, anti)
    return KleinGordonState(RealField(grid, phi), RealField(grid, pi), 0.0)


# ---------------------------------------------------------------------------
# explicit blowup solution and Galilean boost


def explicit_blowup(params: BlowupParams, t: float, grid: RadialGrid) -> ComplexField:
    """psi = R(r/L) / L * exp(i (zeta - r^2 / (4 L))), L = t_c - t.

    R is the 2D cubic ground state, taken from the discrete shooting on the
    rescaled grid r/L so that it is sampled exactly at the nodes.
    """
    t_c = params.t_c
    if t >= t_c:
        raise ValueError(f"t={t} must be below the collapse time t_c={t_c}")
    L = t_c - t
    scaled = RadialGrid(grid.r_max / L, grid.n)
    R = _shoot_profile(1.0, 0.0, scaled.r_max, scaled.n, 200)
    r = grid.r
    zeta = t / (t_c * L)
    values = R / L * np.exp(1j * (zeta - r**2 / (4.0 * L)))
    return ComplexField(grid, values, t)


def galilean(fld: ComplexField, c: float, t: float | None = None) -> ComplexField:
    """Boost psi(t, x) -> psi(t, x - c t) exp(i (c x / 2 - c^2 t / 4)).

    The translation is a Fourier shift, exact for band-limited periodic data.
    ``c * L / (4 pi)`` must be an integer so the phase ramp is periodic.
    """
    g = fld.grid
    if not isinstance(g, Grid1D):
        raise TypeError("galilean needs a periodic 1D field")
    t = fld.z if t is None else t
    if c == 0:
        return fld
    m = c * g.length / (4.0 * np.pi)
    if abs(m - round(m)) > 1e-9:
        raise ValueError(f"c={c} does not give a periodic phase on a domain of length {g.length}")
    shifted = np.fft.ifft(np.fft.fft(fld.values) * np.exp(-1j * g.k * c * t))
    x = g.x
    return ComplexField(g, shifted * np.exp(1j * (c * x / 2.0 - c * c * t / 4.0)), fld.z)


def galilean_callable(f, c):
    """Boost an analytic solution ``f(t, x)``."""
    def boosted(t, x):
        x = np.asarray(x)
        return f(t, x - c * t) * np.exp(1j * (c * x / 2.0 - c * c * t / 4.0))
    return boosted
