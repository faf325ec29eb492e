"""Cubic-quintic NLS: i psi_z + Laplacian psi + |psi|^2 psi - eps |psi|^4 psi = 0.

Strang split-step. The nonlinear substep is an exact phase rotation; the
linear substep is exact in Fourier space on periodic 1D grids and
Crank-Nicolson on radial 2D grids. Backward propagation goes through the
symmetry z -> -z, psi -> conj(psi) and never uses a negative step.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from revlab import kernels
from revlab.grid import ComplexField, Grid1D, RadialGrid
from revlab.spectral import l2_norm_sq, radial_gradient_density, spectral_tail_fraction

GEOMETRIES = ("periodic-1d", "radial-2d")


class ResolutionError(RuntimeError):
    """Propagation aborted because a resolution guard tripped."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


@dataclass(frozen=True)
class NlsParams:
    epsilon: float = 1e-3
    geometry: str = "periodic-1d"

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.geometry not in GEOMETRIES:
            raise ValueError(f"geometry must be one of {GEOMETRIES}")

    @classmethod
    def for_field(cls, fld: ComplexField, epsilon: float = 1e-3) -> "NlsParams":
        geom = "radial-2d" if isinstance(fld.grid, RadialGrid) else "periodic-1d"
        return cls(epsilon, geom)


@dataclass(frozen=True)
class StepControl:
    """Step selection. With ``adapt`` the step is min(dz, factor / max|psi|^2),
    never below ``dz_min``; otherwise the distance is cut into equal steps
    no longer than ``dz``."""

    dz: float = 1e-4
    dz_min: float = 1e-7
    adapt: bool = False
    cfl_like_factor: float = 0.05

    def __post_init__(self):
        if not 0 < self.dz_min <= self.dz:
            raise ValueError(f"need 0 < dz_min <= dz, got dz_min={self.dz_min}, dz={self.dz}")
        if self.cfl_like_factor <= 0:
            raise ValueError("cfl_like_factor must be positive")


@dataclass(frozen=True)
class Guards:
    """Resolution guards checked at every snapshot.

    The spectral tail limit is relative to the total spectral energy; fields
    that start above it (a hard-edged perturbation has an algebraic tail)
    are instead held to ``tail_growth`` times their initial tail fraction.
    """

    power_drift: float = 1e-6
    spectral_tail: float = 1e-8
    tail_growth: float = 10.0
    enabled: bool = True


@dataclass(frozen=True, eq=False)
class Trajectory:
    snapshots: tuple
    log: np.ndarray  # rows: z, power, hamiltonian, peak_intensity
    steps: int = 0
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.snapshots:
            raise ValueError("empty trajectory")
        z = np.array([s[0] for s in self.snapshots])
        d = np.diff(z)
        if len(z) > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("snapshot z must be strictly monotone")
        g = self.snapshots[0][1].grid
        if any(s[1].grid != g for s in self.snapshots):
            raise ValueError("snapshots must share one grid")

    @property
    def z(self) -> np.ndarray:
        return np.array([s[0] for s in self.snapshots])

    @property
    def fields(self) -> list:
        return [s[1] for s in self.snapshots]

    @property
    def initial(self) -> ComplexField:
        return self.snapshots[0][1]

    @property
    def final(self) -> ComplexField:
        return self.snapshots[-1][1]

    @property
    def grid(self):
        return self.initial.grid

    def intensity_map(self) -> np.ndarray:
        """|psi|^2 as a (snapshot, position) array."""
        return np.array([f.intensity for f in self.fields])

    def at(self, z: float) -> ComplexField:
        """Snapshot nearest to ``z``."""
        return self.snapshots[int(np.argmin(np.abs(self.z - z)))][1]

    def write_log(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z", "power", "hamiltonian", "peak_intensity"])
            for row in self.log:
                w.writerow([repr(float(v)) for v in row])


# ---------------------------------------------------------------------------
# functionals


def hamiltonian(psi: ComplexField, params: NlsParams | float = 1e-3) -> float:
    """Integral of |grad psi|^2 - |psi|^4 / 2 + eps |psi|^6 / 3."""
    eps = params.epsilon if isinstance(params, NlsParams) else float(params)
    g = psi.grid
    a = psi.intensity
    pot = 0.5 * a * a - eps / 3.0 * a**3
    if isinstance(g, RadialGrid):
        dens, w = radial_gradient_density(psi.values, g)
        return float(2.0 * np.pi * (np.sum(w * dens) - np.sum(g.weights * pot)))
    spec = np.fft.fft(psi.values)
    grad = g.dx / g.n * np.sum(g.k**2 * (spec.real**2 + spec.imag**2))
    return float(grad - g.dx * np.sum(pot))


@lru_cache(maxsize=4)
def _townes_power(r_max: float, n: int) -> float:
    from revlab.waves import SolitaryParams, solitary_2d_shoot

    gs = solitary_2d_shoot(SolitaryParams(1.0, 0.0, dimension=2), RadialGrid(r_max, n))
    return l2_norm_sq(gs)


def critical_power(grid: RadialGrid | None = None) -> float:
    """Power of the 2D cubic ground state R_{kappa=1}; the collapse threshold."""
    if grid is None or grid.r_max < 20.0:
        return _townes_power(40.0, 2**14)
    return _townes_power(float(grid.r_max), int(grid.n))


def critical_power_ratio(psi0: ComplexField) -> float:
    if not isinstance(psi0.grid, RadialGrid):
        raise TypeError("critical_power_ratio needs a radial 2D field")
    return l2_norm_sq(psi0) / critical_power(psi0.grid)


# ---------------------------------------------------------------------------
# propagation


class _Periodic:
    def __init__(self, grid: Grid1D):
        self.k2 = grid.k**2
        self._h = None
        self._factor = None

    def linear(self, psi, h):
        if h != self._h:
            self._factor = np.exp(-1j * self.k2 * h)
            self._h = h
        spec = sfft.fft(psi, overwrite_x=True)
        spec *= self._factor
        return sfft.ifft(spec, overwrite_x=True)

    def tail(self, psi):
        return spectral_tail_fraction(psi)


class _Radial:
    def __init__(self, grid: RadialGrid):
        from revlab.waves import radial_operator

        self.lower, self.diag, self.upper = radial_operator(grid)
        self.wc = np.empty(grid.n, dtype=complex)
        self.wd = np.empty(grid.n, dtype=complex)

    def linear(self, psi, h):
        kernels.cn_radial_step(psi, self.lower, self.diag, self.upper, h, self.wc, self.wd)
        return psi

    def tail(self, psi):
        return 0.0


def _log_row(z, psi_field, eps):
    a = psi_field.intensity
    return (z, l2_norm_sq(psi_field), hamiltonian(psi_field, eps), float(a.max()))


def propagate(psi0: ComplexField, params: NlsParams | None = None, z_target: float = 0.95,
              step_control: StepControl | None = None, snapshot_stride: int | None = None,
              guards: Guards | None = None) -> Trajectory:
    """Advance ``psi0`` from ``psi0.z`` to ``z_target``.

    ``snapshot_stride`` is the number of steps between stored snapshots
    (default: about 100 snapshots per run); the final state is always kept.
    """
    params = params or NlsParams.for_field(psi0)
    ctl = step_control or StepControl()
    guards = guards or Guards()
    g = psi0.grid
    radial = isinstance(g, RadialGrid)
    if radial != (params.geometry == "radial-2d"):
        raise ValueError(f"geometry {params.geometry!r} does not match the field's grid")
    z0 = float(psi0.z)
    dist = float(z_target) - z0
    if not dist > 0:
        raise ValueError(f"z_target={z_target} must exceed the starting z={z0}")
    eps = params.epsilon
    ops = _Radial(g) if radial else _Periodic(g)

    n_uniform = max(1, int(np.ceil(dist / ctl.dz - 1e-9)))
    h_uniform = dist / n_uniform
    if snapshot_stride is None:
        expected = n_uniform if not ctl.adapt else max(n_uniform, 1000)
        snapshot_stride = max(1, expected // 100)

    def choose(psi, done):
        remaining = dist - done
        if not ctl.adapt:
            return h_uniform
        peak = float(np.max(psi.real**2 + psi.imag**2))
        h = ctl.dz if peak == 0 else min(ctl.dz, ctl.cfl_like_factor / peak)
        h = max(h, ctl.dz_min)
        if remaining <= h * (1 + 1e-12):
            return remaining
        if remaining < 2 * h:
            return 0.5 * remaining
        return h

    psi = np.array(psi0.values, dtype=complex, copy=True)
    p0 = l2_norm_sq(psi0)
    tail0 = ops.tail(psi)
    tail_limit = max(guards.spectral_tail, guards.tail_growth * tail0)

    snaps = [(z0, psi0)]
    log = [_log_row(z0, psi0, eps)]
    diag = {"initial_tail": tail0, "max_tail": tail0, "max_power_drift": 0.0, "min_step": np.inf}

    def record(done, count):
        z_here = z0 + done
        fld_vals = psi.copy()
        if not np.all(np.isfinite(fld_vals)):
            raise ResolutionError(f"non-finite field after {count} steps (z offset {done:.6g})",
                                  {"steps": count, "distance": done})
        fld = ComplexField(g, fld_vals, z_here)
        row = _log_row(z_here, fld, eps)
        drift = abs(row[1] - p0) / p0 if p0 > 0 else 0.0
        tail = ops.tail(fld_vals)
        diag["max_power_drift"] = max(diag["max_power_drift"], drift)
        diag["max_tail"] = max(diag["max_tail"], tail)
        if guards.enabled and drift > guards.power_drift:
            raise ResolutionError(f"power drift {drift:.3e} exceeds {guards.power_drift:g}",
                                  {"steps": count, "distance": done, "power_drift": drift})
        if guards.enabled and tail > tail_limit:
            raise ResolutionError(f"spectral tail fraction {tail:.3e} exceeds {tail_limit:.3e}; "
                                  "refine the grid", {"steps": count, "distance": done, "tail": tail})
        snaps.append((z_here, fld))
        log.append(row)

    done = 0.0
    count = 0
    h = choose(psi, done)
    kernels.nonlinear_phase(psi, eps, 0.5 * h)
    while True:
        psi = ops.linear(psi, h)
        count += 1
        done = count * h_uniform if not ctl.adapt else done + h
        diag["min_step"] = min(diag["min_step"], h)
        finished = (count >= n_uniform) if not ctl.adapt else done >= dist * (1 - 1e-14)
        if finished:
            done = dist
        if finished or count % snapshot_stride == 0:
            kernels.nonlinear_phase(psi, eps, 0.5 * h)
            record(done, count)
            if finished:
                break
            h_next = choose(psi, done)
            kernels.nonlinear_phase(psi, eps, 0.5 * h_next)
        else:
            h_next = choose(psi, done)
            # |psi| is invariant under the phase rotation, so the two half
            # rotations merge into one
            kernels.nonlinear_phase(psi, eps, 0.5 * (h + h_next))
        h = h_next

    diag["steps"] = count
    return Trajectory(tuple(snaps), np.array(log), count, diag)


def reverse(psi_out: ComplexField, params: NlsParams | None = None, z_back: float | None = None,
            step_control: StepControl | None = None, snapshot_stride: int | None = None,
            guards: Guards | None = None) -> Trajectory:
    """Back-propagate ``psi_out`` by ``z_back`` using only the forward solver.

    The output is conjugated, propagated forward, and every stored snapshot is
    conjugated back. Snapshot z runs downward from ``psi_out.z``.
    """
    z_back = psi_out.z if z_back is None else z_back
    if not z_back > 0:
        raise ValueError("z_back must be positive")
    start = ComplexField(psi_out.grid, np.conj(psi_out.values), 0.0)
    fwd = propagate(start, params or NlsParams.for_field(psi_out), z_back, step_control,
                    snapshot_stride, guards)
    z_top = psi_out.z
    snaps = tuple((z_top - s, ComplexField(f.grid, np.conj(f.values), z_top - s))
                  for s, f in fwd.snapshots)
    log = fwd.log.copy()
    log[:, 0] = z_top - log[:, 0]
    return Trajectory(snaps, log, fwd.steps, fwd.diagnostics)


def self_convergence_ratio(psi0: ComplexField, params: NlsParams, z_target: float, dz: float) -> float:
    """||u_dz - u_dz/2|| / ||u_dz/2 - u_dz/4|| at z_target; about 4 for a second-order scheme."""
    outs = []
    for h in (dz, dz / 2, dz / 4):
        tr = propagate(psi0, params, z_target, StepControl(dz=h, dz_min=min(h, 1e-7)),
                       snapshot_stride=10**9, guards=Guards(enabled=False))
        outs.append(tr.final.values)
    return float(np.linalg.norm(outs[0] - outs[1]) / np.linalg.norm(outs[1] - outs[2]))
