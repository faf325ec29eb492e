"""Verdicts on back-propagated trajectories: did the beam split again?"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from revlab.grid import ComplexField, RadialGrid

SPLIT, SINGLE, AMBIGUOUS = "Split", "Single", "Ambiguous"


@dataclass(frozen=True)
class Peak:
    position: float
    height: float


@dataclass(frozen=True, eq=False)
class ReversalVerdict:
    outcome: str
    peak_count: int
    peak_positions: tuple
    separation_series: np.ndarray  # rows: z, separation (0 when fewer than two peaks)
    ellipse_extent: float | None

    def __post_init__(self):
        if self.outcome not in (SPLIT, SINGLE, AMBIGUOUS):
            raise ValueError(f"bad outcome {self.outcome!r}")


def _profile(fld: ComplexField):
    g = fld.grid
    inten = fld.intensity
    if isinstance(g, RadialGrid):
        # mirror so that a maximum on the axis is an interior maximum
        pos = np.concatenate((-g.r[:0:-1], g.r))
        return pos, np.concatenate((inten[:0:-1], inten)), g.dr, True
    return g.x, inten, g.dx, False


def detect_peaks(fld: ComplexField, eta: float = 0.1, d_min: float = 1.0) -> list:
    """Local maxima of |psi|^2 above eta * max, at least d_min apart.

    Positions are refined by a parabola through the three samples around
    each maximum. Flat profiles have no peaks.
    """
    if not 0 < eta < 1:
        raise ValueError("eta must lie in (0, 1)")
    if not d_min > 0:
        raise ValueError("d_min must be positive")
    pos, y, dx, mirrored = _profile(fld)
    top = float(np.max(y)) if y.size else 0.0
    if top <= 0:
        return []
    distance = max(1, int(np.ceil(d_min / dx - 1e-9)))
    idx, _ = find_peaks(y, height=eta * top, distance=distance)
    peaks = []
    for i in idx:
        x, h = pos[i], y[i]
        if 0 < i < len(y) - 1:
            a, b, c = y[i - 1], y[i], y[i + 1]
            curv = a - 2 * b + c
            if curv < 0:
                off = 0.5 * (a - c) / curv
                x = pos[i] + off * dx
                h = b - 0.25 * (a - c) * off
        if mirrored and x < -0.5 * dx:
            continue
        peaks.append(Peak(float(max(x, 0.0) if mirrored else x), float(h)))
    return peaks


def _separation(peaks) -> float:
    if len(peaks) < 2:
        return 0.0
    two = sorted(peaks, key=lambda p: -p.height)[:2]
    return abs(two[0].position - two[1].position)


def _ellipse_extent(z, counts):
    """Total z-length of runs with exactly two peaks that are followed by a merge."""
    extent = 0.0
    found = False
    i = 0
    n = len(counts)
    while i < n:
        if counts[i] == 2:
            j = i
            while j + 1 < n and counts[j + 1] == 2:
                j += 1
            if j + 1 < n and counts[j + 1] == 1:
                extent += abs(z[j + 1] - z[i])
                found = True
            i = j + 1
        else:
            i += 1
    return extent if found else None


def classify_reversal(trajectory, window_fraction: float = 0.15, eta: float = 0.1,
                      d_min: float = 1.0) -> ReversalVerdict:
    """Split when the last snapshot has two or more peaks moving apart over the
    final ``window_fraction`` of the run; Single when one peak remains."""
    snaps = trajectory.snapshots
    if not snaps:
        raise ValueError("empty trajectory")
    z = np.array([s[0] for s in snaps])
    all_peaks = [detect_peaks(f, eta, d_min) for _, f in snaps]
    counts = [len(p) for p in all_peaks]
    sep = np.array([_separation(p) for p in all_peaks])
    series = np.column_stack((z, sep))
    end = all_peaks[-1]
    grid = snaps[0][1].grid
    dx = grid.dr if isinstance(grid, RadialGrid) else grid.dx
    span = abs(z[-1] - z[0])
    window = np.abs(z - z[-1]) <= window_fraction * span + 1e-12
    if len(end) >= 2:
        # a single peak counts as separation 0, so a split inside the window still qualifies
        outward = bool(np.all(np.diff(sep[window]) >= -0.25 * dx))
        outcome = SPLIT if outward else AMBIGUOUS
    elif len(end) == 1:
        outcome = SINGLE
    else:
        outcome = AMBIGUOUS
    return ReversalVerdict(outcome, len(end), tuple(p.position for p in end), series,
                           _ellipse_extent(z, counts))


def merge_distance(trajectory, eta: float = 0.1, d_min: float = 0.1) -> float | None:
    """First z at which beams that started apart show a single peak.

    Later breathing of the fused beam may raise side lobes again; they do
    not move the fusion point. None if the beams never merge.
    """
    seen_two = False
    for z, fld in zip(trajectory.z, trajectory.fields):
        count = len(detect_peaks(fld, eta, d_min))
        if count >= 2:
            seen_two = True
        elif count == 1 and seen_two:
            return float(z)
    return None


def _inner(a, b, grid):
    if isinstance(grid, RadialGrid):
        return 2.0 * np.pi * np.sum(grid.weights * np.conj(a) * b)
    return grid.dx * np.sum(np.conj(a) * b)


def input_recovery_error(result, psi0: ComplexField) -> float:
    """min over beta of ||e^{i beta} psi(0) - psi0|| / ||psi0||.

    ``result`` is a trajectory (its last snapshot is used) or a field.
    """
    fld = result.final if hasattr(result, "final") else result
    if fld.grid != psi0.grid:
        raise ValueError("recovered field and input live on different grids")
    a, b = fld.values, psi0.values
    overlap = _inner(a, b, psi0.grid)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    diff = a * phase - b
    return float(np.sqrt(abs(_inner(diff, diff, psi0.grid)) / abs(_inner(b, b, psi0.grid))))
