"""Inviscid Burgers u_t + u u_x = 0: exact front tracking and a Godunov oracle.

The exact solver works on piecewise-linear profiles in rational arithmetic.
Breakpoints travel at their characteristic speed, shocks at the
Rankine-Hugoniot speed, and nodes that meet are merged, so two profiles
that reach the same state compare equal breakpoint by breakpoint.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from revlab import kernels
from revlab.grid import Grid1D, RealField

CFL_LIMIT = 0.9


class CflError(ValueError):
    pass


def _q(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class PiecewiseProfile:
    """u(x) with breakpoints x_i and one-sided limits left_i, right_i.

    Between x_i and x_{i+1} the profile is linear from right_i to
    left_{i+1}; it is constant left_0 to the left of x_0 and right_{-1}
    beyond the last breakpoint. All numbers are Fractions.
    """

    breakpoints: tuple
    left: tuple
    right: tuple
    t: Fraction = Fraction(0)

    def __post_init__(self):
        if not self.breakpoints:
            raise ValueError("a profile needs at least one breakpoint")
        if not len(self.breakpoints) == len(self.left) == len(self.right):
            raise ValueError("breakpoints, left and right limits differ in length")
        for name in ("breakpoints", "left", "right"):
            object.__setattr__(self, name, tuple(_q(v) for v in getattr(self, name)))
        object.__setattr__(self, "t", _q(self.t))
        if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be strictly increasing")

    @classmethod
    def from_pieces(cls, nodes, t=0) -> "PiecewiseProfile":
        """``nodes``: iterable of (x, u_left, u_right)."""
        xs, ls, rs = zip(*nodes)
        return cls(xs, ls, rs, t)

    @property
    def slopes(self) -> tuple:
        """Slope on the right of each breakpoint (0 past the last one)."""
        out = []
        for i, x in enumerate(self.breakpoints[:-1]):
            out.append((self.left[i + 1] - self.right[i]) / (self.breakpoints[i + 1] - x))
        out.append(Fraction(0))
        return tuple(out)

    def __call__(self, x) -> np.ndarray:
        """Evaluate in floating point; at a jump the right limit is returned."""
        xs = np.asarray(x, dtype=float)
        bp = np.array([float(b) for b in self.breakpoints])
        lv = np.array([float(v) for v in self.left])
        rv = np.array([float(v) for v in self.right])
        out = np.full(xs.shape, lv[0])
        for i in range(len(bp)):
            nxt = bp[i + 1] if i + 1 < len(bp) else np.inf
            inside = (xs >= bp[i]) & (xs < nxt)
            if i + 1 < len(bp):
                frac = (xs[inside] - bp[i]) / (nxt - bp[i])
                out[inside] = rv[i] + frac * (lv[i + 1] - rv[i])
            else:
                out[inside] = rv[i]
        return out

    def integral(self, a, b) -> Fraction:
        """Exact integral of u over [a, b] (a <= b)."""
        a, b = _q(a), _q(b)
        if b < a:
            raise ValueError("need a <= b")
        xs = self.breakpoints
        pts = sorted({a, b, *(x for x in xs if a < x < b)})
        total = Fraction(0)
        for lo, hi in zip(pts, pts[1:]):
            mid = (lo + hi) / 2
            total += (hi - lo) * (self._value(lo, mid) + self._value(hi, mid)) / 2
        return total

    def _value(self, x, towards):
        """Exact value at x, taking the limit from the side of ``towards``."""
        xs = self.breakpoints
        for i, b in enumerate(xs):
            if x == b:
                return self.left[i] if towards < x else self.right[i]
        if x < xs[0]:
            return self.left[0]
        if x > xs[-1]:
            return self.right[-1]
        i = max(j for j, b in enumerate(xs) if b < x)
        w = (x - xs[i]) / (xs[i + 1] - xs[i])
        return self.right[i] + w * (self.left[i + 1] - self.right[i])

    def shifted(self, dx) -> "PiecewiseProfile":
        dx = _q(dx)
        return PiecewiseProfile(tuple(b + dx for b in self.breakpoints), self.left, self.right, self.t)

    def write_csv(self, path) -> None:
        """Breakpoint table: x, u_left, u_right, slope_right."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "u_left", "u_right", "slope_right"])
            for row in zip(self.breakpoints, self.left, self.right, self.slopes):
                w.writerow([str(v) for v in row])


def step_down() -> PiecewiseProfile:
    """u = 1 for x < 0 and 0 for x >= 0."""
    return PiecewiseProfile.from_pieces([(0, 1, 0)])


def ramp_down(shift=0) -> PiecewiseProfile:
    """u = 1 for x < 0, 1 - x on [0, 1), 0 beyond; translated by ``shift``."""
    return PiecewiseProfile.from_pieces([(0, 1, 1), (1, 0, 0)]).shifted(shift)


def shock_positions(profile: PiecewiseProfile) -> list:
    """Positions of the entropy-admissible jumps (left limit above right)."""
    return [x for x, a, b in zip(profile.breakpoints, profile.left, profile.right) if a > b]


# ---------------------------------------------------------------------------
# front tracking


class TrackingError(NotImplementedError):
    """The exact tracker only follows shocks flanked by constant states."""


def _speed(node):
    _, a, b = node
    return a if a == b else (a + b) / 2


def _simplify(nodes):
    """Drop continuous breakpoints where the slope does not change."""
    out = []
    for i, (x, a, b) in enumerate(nodes):
        if a == b and 0 < i < len(nodes) - 1:
            xl, _, bl = nodes[i - 1]
            xr, ar, _ = nodes[i + 1]
            if (a - bl) * (xr - x) == (ar - a) * (x - xl):
                continue
        elif a == b and len(nodes) > 1:
            if i == 0 and nodes[1][1] == a:
                continue
            if i == len(nodes) - 1 and out and out[-1][2] == a:
                continue
        out.append((x, a, b))
    return out or [nodes[0]]


def _check_flanks(nodes):
    for i, (x, a, b) in enumerate(nodes):
        if a > b:
            flat_left = i == 0 or nodes[i - 1][2] == a
            flat_right = i == len(nodes) - 1 or nodes[i + 1][1] == b
            if not (flat_left and flat_right):
                raise TrackingError(
                    f"shock at x={x} borders a sloped segment; use evolve_godunov for such data")


def _open_fans(nodes):
    """Split upward jumps into the two edges of a centred rarefaction fan."""
    out = []
    for x, a, b in nodes:
        if a < b:
            out.extend([(x, a, a), (x, b, b)])
        else:
            out.append((x, a, b))
    return out


def evolve_exact(profile: PiecewiseProfile, t) -> PiecewiseProfile:
    """Entropy solution at time ``profile.t + t``.

    Events are collisions of adjacent nodes; the nodes that meet are merged
    into a single node carrying the outer limits (a new shock, a shock
    absorbing a characteristic, or two shocks fusing).
    """
    dt_total = _q(t)
    if dt_total < 0:
        raise ValueError("t must be nonnegative")
    if dt_total == 0:
        return profile
    nodes = _simplify(_open_fans(list(zip(profile.breakpoints, profile.left, profile.right))))
    _check_flanks(nodes)
    now = Fraction(0)
    while True:
        speeds = [_speed(nd) for nd in nodes]
        hit = None
        for i in range(len(nodes) - 1):
            closing = speeds[i] - speeds[i + 1]
            if closing > 0:
                tau = (nodes[i + 1][0] - nodes[i][0]) / closing
                hit = tau if hit is None else min(hit, tau)
        step = dt_total - now if hit is None or now + hit > dt_total else hit
        nodes = [(x + v * step, a, b) for (x, a, b), v in zip(nodes, speeds)]
        now += step
        merged = [nodes[0]]
        last_speed = speeds[0]
        for nd, v in zip(nodes[1:], speeds[1:]):
            x0, a0, _ = merged[-1]
            if nd[0] == x0 and last_speed > v:
                merged[-1] = (x0, a0, nd[2])
            else:
                merged.append(nd)
            last_speed = v
        nodes = _simplify(merged)
        if now == dt_total:
            break
        _check_flanks(nodes)
    return PiecewiseProfile.from_pieces(nodes, profile.t + dt_total)


# ---------------------------------------------------------------------------
# finite volumes


def evolve_godunov(u0: RealField, t: float, cfl: float = 0.5) -> RealField:
    """First-order Godunov with the exact Riemann flux and outflow ends.

    Equal steps are chosen so that max|u| dt / dx <= ``cfl``.
    """
    if not 0 < cfl <= CFL_LIMIT:
        raise CflError(f"CFL number {cfl} outside (0, {CFL_LIMIT}]")
    if t < 0:
        raise ValueError("t must be nonnegative")
    u = np.array(u0.values, dtype=float)
    if t == 0:
        return u0
    dx = u0.grid.dx
    vmax = max(float(np.max(np.abs(u))), 1e-300)
    nsteps = int(np.ceil(t * vmax / (cfl * dx)))
    kernels.godunov_burgers(u, t / nsteps / dx, nsteps)
    return u0.with_values(u, u0.t + t)


def sample_profile(profile: PiecewiseProfile, grid: Grid1D) -> RealField:
    """Cell averages of ``profile`` on cells centred at the grid nodes."""
    x = grid.x
    h = grid.dx
    # Simpson's rule is exact on each linear piece; cells holding a breakpoint
    # are integrated exactly piece by piece.
    vals = (profile(x - h / 2) + 4 * profile(x) + profile(x + h / 2)) / 6
    bp = np.array([float(b) for b in profile.breakpoints])
    for j in np.flatnonzero(np.any(np.abs(x[:, None] - bp[None, :]) < h / 2, axis=1)):
        lo, hi = x[j] - h / 2, x[j] + h / 2
        vals[j] = float(profile.integral(Fraction(lo), Fraction(hi))) / h
    return RealField(grid, vals, float(profile.t))


def l1_distance(profile: PiecewiseProfile, fld: RealField) -> float:
    """dx * sum |cell average of profile - fld|."""
    ref = sample_profile(profile, fld.grid)
    return float(fld.grid.dx * np.sum(np.abs(ref.values - fld.values)))


__all__ = ["CflError", "PiecewiseProfile", "TrackingError", "evolve_exact", "evolve_godunov",
           "l1_distance", "ramp_down", "sample_profile", "shock_positions", "step_down"]
