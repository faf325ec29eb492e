"""Grids, immutable field containers and the binary snapshot format."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

import numpy as np

SNAPSHOT_MAGIC = b"RVLB"
SNAPSHOT_VERSION = 1
_HEADER = struct.Struct("<4sIBQddd")

KIND_PERIODIC = 0
KIND_RADIAL = 1


class SnapshotError(ValueError):
    """Raised for malformed or mismatched snapshot files."""


@dataclass(frozen=True)
class Grid1D:
    """Uniform periodic grid; sample j sits at ``x_min + j*dx``, ``x_max`` excluded."""

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise ValueError(f"x_max ({self.x_max}) must exceed x_min ({self.x_min})")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.x_min + np.arange(self.n) * self.dx

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    @property
    def half_width(self) -> float:
        return min(-self.x_min, self.x_max)

    @classmethod
    def symmetric(cls, half_width: float, n: int) -> "Grid1D":
        return cls(-half_width, half_width, n)


@dataclass(frozen=True)
class RadialGrid:
    """Radial grid r_j = j*dr, j = 0..n-1, with a Dirichlet ghost at r_max = n*dr."""

    r_max: float
    n: int

    def __post_init__(self):
        if not self.r_max > 0 or self.n < 2:
            raise ValueError(f"invalid radial grid r_max={self.r_max}, n={self.n}")

    @property
    def dr(self) -> float:
        return self.r_max / self.n

    @property
    def r(self) -> np.ndarray:
        return np.arange(self.n) * self.dr

    # same name as Grid1D so generic code can ask for sample positions
    @property
    def x(self) -> np.ndarray:
        return self.r

    @property
    def half_width(self) -> float:
        return self.r_max

    @property
    def weights(self) -> np.ndarray:
        """Control-volume weights for integral(. r dr); w_0 = dr^2/8."""
        w = self.r * self.dr
        w[0] = self.dr**2 / 8.0
        return w


Grid = Union[Grid1D, RadialGrid]


def _frozen(values, dtype):
    arr = np.array(values, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class ComplexField:
    grid: Grid
    values: np.ndarray
    z: float = 0.0

    def __post_init__(self):
        vals = _frozen(self.values, complex)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite samples")
        object.__setattr__(self, "values", vals)

    @property
    def intensity(self) -> np.ndarray:
        return self.values.real**2 + self.values.imag**2

    def with_values(self, values, z=None) -> "ComplexField":
        return ComplexField(self.grid, values, self.z if z is None else z)

    def conj(self) -> "ComplexField":
        return ComplexField(self.grid, np.conj(self.values), self.z)

    def same_as(self, other) -> bool:
        return (
            isinstance(other, ComplexField)
            and self.grid == other.grid
            and self.z == other.z
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class RealField:
    grid: Grid1D
    values: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        vals = _frozen(self.values, float)
        if vals.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite samples")
        object.__setattr__(self, "values", vals)

    def with_values(self, values, t=None) -> "RealField":
        return RealField(self.grid, values, self.t if t is None else t)

    def same_as(self, other) -> bool:
        return (
            isinstance(other, RealField)
            and self.grid == other.grid
            and self.t == other.t
            and np.array_equal(self.values, other.values)
        )


Field = Union[ComplexField, RealField]


def sample(grid: Grid, f: Callable, real: bool = False) -> Field:
    """Evaluate ``f`` at the grid nodes; ``f`` receives the position array."""
    x = grid.x
    vals = np.asarray(f(x))
    if vals.shape == ():
        vals = np.full(grid.n, vals)
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        j = int(bad[0])
        raise ValueError(f"non-finite sample at index {j} (x={x[j]!r})")
    if real:
        if np.iscomplexobj(vals) and np.any(vals.imag != 0):
            raise ValueError("real field requested but f returned complex values")
        return RealField(grid, vals.real.astype(float))
    return ComplexField(grid, vals.astype(complex))


def save_snapshot(fld: Field, path) -> None:
    grid = fld.grid
    if isinstance(grid, RadialGrid):
        kind, lo, hi = KIND_RADIAL, 0.0, float(grid.r_max)
    else:
        kind, lo, hi = KIND_PERIODIC, float(grid.x_min), float(grid.x_max)
    coord = fld.z if isinstance(fld, ComplexField) else fld.t
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, kind, grid.n, lo, hi, float(coord))
    data = np.asarray(fld.values, dtype="<c16").tobytes()
    Path(path).write_bytes(header + data)


def load_snapshot(path, real: bool = False) -> Field:
    """Read a snapshot; ``real=True`` returns a RealField (imaginary parts must be 0)."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, kind, n, lo, hi, coord = _HEADER.unpack_from(raw)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise SnapshotError(f"{path}: unsupported version {version}")
    body = raw[_HEADER.size:]
    if len(body) != 16 * n:
        raise SnapshotError(f"{path}: length mismatch, header says {n} samples, "
                            f"file holds {len(body) / 16:g}")
    values = np.frombuffer(body, dtype="<c16").astype(complex)
    if kind == KIND_RADIAL:
        grid = RadialGrid(hi, int(n))
    elif kind == KIND_PERIODIC:
        grid = Grid1D(lo, hi, int(n))
    else:
        raise SnapshotError(f"{path}: unknown grid kind {kind}")
    if real:
        if np.any(values.imag != 0):
            raise SnapshotError(f"{path}: real field requested but imaginary parts are nonzero")
        return RealField(grid, values.real, coord)
    return ComplexField(grid, values, coord)
