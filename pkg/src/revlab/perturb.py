"""Detector imperfections applied to an output field before it is reversed.

Every operator returns a new field; samples it does not touch are copied
bit for bit.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from revlab.grid import ComplexField, Grid1D, RadialGrid

KINDS = ("truncate", "bandlimit", "phase_flip_tail", "scale_tail", "block", "digitize")


@dataclass(frozen=True)
class PerturbationSpec:
    """One detector imperfection.

    ``param`` is x_max for the tail operators, k_max for bandlimit, x_b for
    block and dI for digitize. ``beta`` is used by scale_tail, ``width`` by
    block and ``soft`` (ramp width of a piecewise-linear edge) by truncate.
    """

    kind: str
    param: float
    beta: float | None = None
    width: float = 1.0
    soft: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown perturbation kind {self.kind!r}; expected one of {KINDS}")
        if not self.param > 0:
            raise ValueError(f"{self.kind} parameter must be positive, got {self.param}")
        if self.kind == "scale_tail" and self.beta is None:
            raise ValueError("scale_tail needs beta")
        if self.width <= 0 or self.soft < 0:
            raise ValueError("width must be positive and soft nonnegative")

    @property
    def label(self) -> str:
        if self.kind == "scale_tail":
            return f"scale_tail:{self.param:g},{self.beta:g}"
        if self.kind == "block" and self.width != 1.0:
            return f"block:{self.param:g},{self.width:g}"
        return f"{self.kind}:{self.param:g}"

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "PerturbationSpec":
        return cls(**d)

    @classmethod
    def parse(cls, text: str) -> "PerturbationSpec":
        """Parse ``kind:param[,extra]``, e.g. ``truncate:13`` or ``scale_tail:13,0.4``."""
        try:
            kind, rest = text.split(":", 1)
            nums = [float(v) for v in rest.split(",")]
        except ValueError as exc:
            raise ValueError(f"cannot parse perturbation {text!r}") from exc
        kind = kind.strip()
        if kind == "scale_tail":
            if len(nums) != 2:
                raise ValueError("scale_tail needs x_max,beta")
            return cls(kind, nums[0], beta=nums[1])
        if kind == "block" and len(nums) == 2:
            return cls(kind, nums[0], width=nums[1])
        if kind == "truncate" and len(nums) == 2:
            return cls(kind, nums[0], soft=nums[1])
        if len(nums) != 1:
            raise ValueError(f"{kind} takes one parameter")
        return cls(kind, nums[0])


def _positions(fld):
    g = fld.grid
    return np.abs(g.r if isinstance(g, RadialGrid) else g.x)


def _check_radius(fld, x_max, name="x_max"):
    if not x_max > 0:
        raise ValueError(f"{name}={x_max} must be positive")


def _replace(fld, mask, new_values):
    vals = np.where(mask, new_values, fld.values)
    return fld.with_values(vals)


def truncate(fld, x_max: float, soft: float = 0.0, fill: float = 0.0):
    """Zero the field for |x| >= x_max (r >= x_max on radial grids).

    With ``soft`` > 0 the edge is a linear ramp from 1 at x_max - soft down
    to 0 at x_max. ``fill`` is the value written outside (the vacuum for
    fields with a nonzero background).
    """
    _check_radius(fld, x_max)
    ax = _positions(fld)
    if soft > 0:
        weight = np.clip((x_max - ax) / soft, 0.0, 1.0)
        mask = weight < 1.0
        return _replace(fld, mask, fill + weight * (fld.values - fill))
    return _replace(fld, ax >= x_max, fill)


def bandlimit(fld: ComplexField, k_max: float) -> ComplexField:
    """Remove all Fourier components with |k| > k_max (angular wavenumber)."""
    if not isinstance(fld.grid, Grid1D):
        raise TypeError("bandlimit is defined for periodic 1D fields only")
    if not k_max > 0:
        raise ValueError("k_max must be positive")
    k = fld.grid.k
    if k_max >= np.max(np.abs(k)):
        return fld.with_values(fld.values)
    spec = np.fft.fft(fld.values)
    spec[np.abs(k) > k_max] = 0.0
    return fld.with_values(np.fft.ifft(spec))


def phase_flip_tail(fld: ComplexField, x_max: float) -> ComplexField:
    """Multiply the field by e^{i pi} = -1 for |x| >= x_max."""
    _check_radius(fld, x_max)
    return _replace(fld, _positions(fld) >= x_max, -fld.values)


def scale_tail(fld: ComplexField, x_max: float, beta: float) -> ComplexField:
    _check_radius(fld, x_max)
    return _replace(fld, _positions(fld) >= x_max, beta * fld.values)


def block(fld, x_b: float, width: float = 1.0, fill: float = 0.0):
    """Zero the band x_b < |x| < x_b + width."""
    if not x_b > 0 or not width > 0:
        raise ValueError("x_b and width must be positive")
    if x_b + width > fld.grid.half_width:
        raise ValueError(f"band [{x_b}, {x_b + width}] leaves the domain (half-width {fld.grid.half_width})")
    ax = _positions(fld)
    return _replace(fld, (ax > x_b) & (ax < x_b + width), fill)


def digitize(fld: ComplexField, dI: float) -> ComplexField:
    """Project |psi|^2 onto the levels n*dI (nearest, ties upward), keeping the phase."""
    if not dI > 0:
        raise ValueError("dI must be positive")
    v = fld.values
    amp = np.abs(v)
    level = np.floor(amp * amp / dI + 0.5) * dI
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(amp > 0, v / amp, 0.0)
    return fld.with_values(unit * np.sqrt(level))


def apply(spec: PerturbationSpec | None, fld):
    """Apply ``spec`` to ``fld``; ``None`` is the identity."""
    if spec is None:
        return fld
    if spec.kind == "truncate":
        return truncate(fld, spec.param, spec.soft)
    if spec.kind == "bandlimit":
        return bandlimit(fld, spec.param)
    if spec.kind == "phase_flip_tail":
        return phase_flip_tail(fld, spec.param)
    if spec.kind == "scale_tail":
        return scale_tail(fld, spec.param, spec.beta)
    if spec.kind == "block":
        return block(fld, spec.param, spec.width)
    return digitize(fld, spec.param)


def modified_region(spec: PerturbationSpec):
    """Predicate on |x| for the samples ``spec`` changes (None: everywhere)."""
    if spec.kind in ("truncate", "phase_flip_tail", "scale_tail"):
        edge = spec.param - spec.soft
        return lambda x: np.abs(x) >= edge if spec.soft == 0 else np.abs(x) > edge
    if spec.kind == "block":
        return lambda x: (np.abs(x) > spec.param) & (np.abs(x) < spec.param + spec.width)
    return None


__all__ = ["KINDS", "PerturbationSpec", "apply", "bandlimit", "block", "digitize",
           "modified_region", "phase_flip_tail", "scale_tail", "truncate"]
