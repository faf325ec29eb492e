"""Pure numpy implementations of the kernels in ``_kernels.pyx``.

Same signatures and in-place semantics, so either module can back
:mod:`revlab.kernels`.
"""

import numpy as np
from scipy.linalg import solve_banded


def nonlinear_phase(psi, epsilon, h):
    a = psi.real**2 + psi.imag**2
    psi *= np.exp(1j * ((a - epsilon * a * a) * h))


def cn_radial_step(psi, lower, diag, upper, dz, work_c=None, work_d=None):
    ith = 0.5j * dz
    rhs = psi + ith * diag * psi
    rhs[:-1] += ith * upper[:-1] * psi[1:]
    rhs[1:] += ith * lower[1:] * psi[:-1]
    ab = np.empty((3, psi.shape[0]), dtype=complex)
    ab[0, 1:] = -ith * upper[:-1]
    ab[0, 0] = 0.0
    ab[1] = 1.0 - ith * diag
    ab[2, :-1] = -ith * lower[1:]
    ab[2, -1] = 0.0
    psi[:] = solve_banded((1, 1), ab, rhs, overwrite_ab=True, overwrite_b=True,
                          check_finite=False)


def _phi4_force(phi, inv_dx2, periodic):
    if periodic:
        left, right = np.roll(phi, 1), np.roll(phi, -1)
    else:
        left = np.concatenate(([phi[1]], phi[:-1]))
        right = np.concatenate((phi[1:], [phi[-2]]))
    return (right - 2.0 * phi + left) * inv_dx2 + phi - phi**3


def leapfrog_phi4(phi, pi, dt, dx, nsteps, periodic=True):
    inv_dx2 = 1.0 / (dx * dx)
    half = 0.5 * dt
    for _ in range(nsteps):
        pi += half * _phi4_force(phi, inv_dx2, periodic)
        phi += dt * pi
        pi += half * _phi4_force(phi, inv_dx2, periodic)


def _burgers_flux(ul, ur):
    shock = ul > ur
    f_shock = np.where(ul + ur > 0.0, 0.5 * ul * ul, 0.5 * ur * ur)
    f_fan = np.where(ul > 0.0, 0.5 * ul * ul, np.where(ur < 0.0, 0.5 * ur * ur, 0.0))
    return np.where(shock, f_shock, f_fan)


def godunov_burgers(u, dt_dx, nsteps):
    for _ in range(nsteps):
        padded = np.concatenate(([u[0]], u, [u[-1]]))
        flux = _burgers_flux(padded[:-1], padded[1:])
        u -= dt_dx * (flux[1:] - flux[:-1])


def radial_shoot(r0, kappa, epsilon, dr, out):
    n = out.shape[0]
    dr2 = dr * dr
    out[0] = r0
    if n == 1:
        return 0, 0
    g = kappa * r0 - r0**3 + epsilon * r0**5
    out[1] = r0 + 0.25 * dr2 * g
    if out[1] < 0.0:
        return 1, 0
    if out[1] > r0:
        return -1, 0
    for j in range(1, n - 1):
        r = out[j]
        g = kappa * r - r**3 + epsilon * r**5
        nxt = r + ((j - 0.5) * (r - out[j - 1]) + j * dr2 * g) / (j + 0.5)
        if nxt < 0.0:
            return 1, j
        if nxt > r:
            return -1, j
        out[j + 1] = nxt
    return 0, n - 1
