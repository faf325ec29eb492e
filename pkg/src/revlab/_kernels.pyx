# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the propagators.

Every function here has a numpy twin in :mod:`revlab._fallback` with the same
signature and semantics; :mod:`revlab.kernels` picks one at import time.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport cos, sin

cnp.import_array()


def nonlinear_phase(double complex[::1] psi, double epsilon, double h):
    """Rotate ``psi`` in place by exp(i (|psi|^2 - eps |psi|^4) h)."""
    cdef Py_ssize_t j, n = psi.shape[0]
    cdef double re, im, a, phase, c, s
    for j in range(n):
        re = psi[j].real
        im = psi[j].imag
        a = re * re + im * im
        phase = (a - epsilon * a * a) * h
        c = cos(phase)
        s = sin(phase)
        psi[j] = (re * c - im * s) + 1j * (re * s + im * c)


def cn_radial_step(double complex[::1] psi, double[::1] lower, double[::1] diag,
                   double[::1] upper, double dz, double complex[::1] work_c,
                   double complex[::1] work_d):
    """One Crank-Nicolson step of psi_z = i A psi, A tridiagonal and real.

    ``lower[j]`` couples row j to j-1 and ``upper[j]`` couples row j to j+1;
    the sample beyond the last row is a homogeneous Dirichlet ghost.
    Overwrites ``psi``; ``work_c``/``work_d`` are scratch of the same length.
    """
    cdef Py_ssize_t j, n = psi.shape[0]
    cdef double th = 0.5 * dz
    cdef double complex ith = 1j * th
    cdef double complex rhs, b, a, c, m
    cdef double complex prev = 0.0, nxt
    # forward sweep (Thomas), rhs built on the fly from the old psi
    for j in range(n):
        nxt = psi[j + 1] if j + 1 < n else 0.0
        rhs = psi[j] + ith * (diag[j] * psi[j] + upper[j] * nxt)
        if j > 0:
            rhs = rhs + ith * lower[j] * prev
        prev = psi[j]
        b = 1.0 - ith * diag[j]
        c = -ith * upper[j]
        if j > 0:
            a = -ith * lower[j]
            m = b - a * work_c[j - 1]
            work_c[j] = c / m
            work_d[j] = (rhs - a * work_d[j - 1]) / m
        else:
            work_c[j] = c / b
            work_d[j] = rhs / b
    psi[n - 1] = work_d[n - 1]
    for j in range(n - 2, -1, -1):
        psi[j] = work_d[j] - work_c[j] * psi[j + 1]


cdef inline double _phi4_force(double[::1] phi, Py_ssize_t j, Py_ssize_t n,
                               double inv_dx2, bint periodic) nogil:
    cdef Py_ssize_t jm, jp
    if periodic:
        jm = j - 1 if j > 0 else n - 1
        jp = j + 1 if j < n - 1 else 0
    else:
        # mirror ghosts: zero slope at both ends
        jm = j - 1 if j > 0 else 1
        jp = j + 1 if j < n - 1 else n - 2
    cdef double p = phi[j]
    return (phi[jp] - 2.0 * p + phi[jm]) * inv_dx2 + p - p * p * p


def leapfrog_phi4(double[::1] phi, double[::1] pi, double dt, double dx, Py_ssize_t nsteps,
                  bint periodic=True):
    """Advance (phi, pi) in place by ``nsteps`` kick-drift-kick steps.

    Integrates phi_tt = phi_xx + phi - phi^3 with a three-point Laplacian,
    periodic or with reflecting (zero-slope) ends.
    """
    cdef Py_ssize_t j, step, n = phi.shape[0]
    cdef double inv_dx2 = 1.0 / (dx * dx)
    cdef double half = 0.5 * dt
    for step in range(nsteps):
        for j in range(n):
            pi[j] += half * _phi4_force(phi, j, n, inv_dx2, periodic)
        for j in range(n):
            phi[j] += dt * pi[j]
        for j in range(n):
            pi[j] += half * _phi4_force(phi, j, n, inv_dx2, periodic)


cdef inline double _burgers_flux(double ul, double ur) nogil:
    # exact Riemann solution of u_t + (u^2/2)_x = 0 sampled at x/t = 0
    if ul > ur:
        if ul + ur > 0.0:
            return 0.5 * ul * ul
        return 0.5 * ur * ur
    if ul > 0.0:
        return 0.5 * ul * ul
    if ur < 0.0:
        return 0.5 * ur * ur
    return 0.0


def godunov_burgers(double[::1] u, double dt_dx, Py_ssize_t nsteps):
    """Advance cell averages ``u`` in place with transmissive boundaries."""
    cdef Py_ssize_t j, step, n = u.shape[0]
    cdef cnp.ndarray[double, ndim=1] flux_arr = np.empty(n + 1)
    cdef double[::1] flux = flux_arr
    for step in range(nsteps):
        flux[0] = _burgers_flux(u[0], u[0])
        flux[n] = _burgers_flux(u[n - 1], u[n - 1])
        for j in range(1, n):
            flux[j] = _burgers_flux(u[j - 1], u[j])
        for j in range(n):
            u[j] -= dt_dx * (flux[j + 1] - flux[j])


def radial_shoot(double r0, double kappa, double epsilon, double dr, double[::1] out):
    """March the discrete radial ground-state recurrence from R(0) = r0.

    Fills ``out`` until the trajectory either crosses zero (returns +1, r0 too
    large), turns upward (returns -1, r0 too small) or reaches the end
    (returns 0). The second return value is the last valid index.
    """
    cdef Py_ssize_t j, n = out.shape[0]
    cdef double dr2 = dr * dr
    cdef double g, r, nxt
    out[0] = r0
    if n == 1:
        return 0, 0
    g = kappa * r0 - r0 * r0 * r0 + epsilon * r0 * r0 * r0 * r0 * r0
    out[1] = r0 + 0.25 * dr2 * g
    if out[1] < 0.0:
        return 1, 0
    if out[1] > r0:
        return -1, 0
    for j in range(1, n - 1):
        r = out[j]
        g = kappa * r - r * r * r + epsilon * r * r * r * r * r
        nxt = r + ((j - 0.5) * (r - out[j - 1]) + j * dr2 * g) / (j + 0.5)
        if nxt < 0.0:
            return 1, j
        if nxt > r:
            return -1, j
        out[j + 1] = nxt
    return 0, n - 1
