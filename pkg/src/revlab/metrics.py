"""Discrepancy measures between an exact output and its perturbed copy."""

from __future__ import annotations

from dataclasses import dataclass, field

from revlab.grid import ComplexField
from revlab.perturb import PerturbationSpec, modified_region
from revlab.spectral import h1_norm_sq, h1_norm_sq_restricted, l2_norm_sq

# whether the plain H1 difference is meaningful for each perturbation kind.
# "annotated": the perturbed field has jumps but a value is still reported
# (block, for comparison with the published number).
H1_APPLICABILITY = {
    None: "defined",
    "bandlimit": "defined",
    "truncate": "undefined",
    "phase_flip_tail": "undefined",
    "scale_tail": "undefined",
    "digitize": "undefined",
    "block": "annotated",
}

TILDE_KINDS = ("truncate", "phase_flip_tail", "scale_tail", "block")


def _same_grid(a, b):
    if a.grid != b.grid:
        raise ValueError("fields live on different grids")


def delta_p(psi: ComplexField, psi_per: ComplexField) -> float:
    """||psi - psi_per||^2 / ||psi||^2."""
    _same_grid(psi, psi_per)
    denom = l2_norm_sq(psi)
    if denom == 0:
        raise ZeroDivisionError("reference field has zero power")
    return l2_norm_sq(psi.with_values(psi.values - psi_per.values)) / denom


def delta_h1(psi: ComplexField, psi_per: ComplexField) -> float:
    """||psi - psi_per||_{H1}^2 / ||psi||_{H1}^2 with the grid's derivative."""
    _same_grid(psi, psi_per)
    denom = h1_norm_sq(psi)
    if denom == 0:
        raise ZeroDivisionError("reference field has zero H1 norm")
    return h1_norm_sq(psi.with_values(psi.values - psi_per.values)) / denom


def tail_h1_fraction(psi: ComplexField, region) -> float:
    return h1_norm_sq_restricted(psi, region) / h1_norm_sq(psi)


def tilde_factor(spec: PerturbationSpec) -> float:
    """Weight applied to the restricted H1 fraction.

    |1 - beta|^2 for the tail multipliers (beta = -1 for the phase flip, 0 for
    truncation): the squared norm of (1 - beta) psi over the tail.
    """
    if spec.kind == "truncate":
        return 1.0
    if spec.kind == "phase_flip_tail":
        return 4.0
    if spec.kind == "scale_tail":
        return abs(1.0 - spec.beta) ** 2
    if spec.kind == "block":
        return 1.0
    raise ValueError(f"restricted H1 measure is not defined for {spec.kind}")


def delta_h1_tilde(psi: ComplexField, spec: PerturbationSpec) -> float:
    """Restricted H1 fraction of the unperturbed output over the modified region."""
    if spec.kind not in TILDE_KINDS:
        raise ValueError(f"restricted H1 measure is not defined for {spec.kind}")
    factor = tilde_factor(spec)
    return factor * tail_h1_fraction(psi, modified_region(spec))


def delta_h_rel(state, state_per) -> float:
    """(H(per) - H) / H for phi^4 states."""
    from revlab.phi4 import energy

    h = energy(state)
    if h == 0:
        raise ZeroDivisionError("reference state has zero energy")
    return (energy(state_per) - h) / h


@dataclass(frozen=True)
class MetricReport:
    delta_p: float
    delta_h1: float | None = None
    delta_h1_tilde: float | None = None
    delta_h_rel: float | None = None
    notes: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.delta_p < 0:
            raise ValueError("delta_p must be nonnegative")

    def as_row(self) -> dict:
        def fmt(v):
            return "" if v is None else repr(float(v))
        return {"delta_p": fmt(self.delta_p), "delta_h1": fmt(self.delta_h1),
                "delta_h1_tilde": fmt(self.delta_h1_tilde)}


def report(psi: ComplexField, psi_per: ComplexField, spec: PerturbationSpec | None) -> MetricReport:
    kind = None if spec is None else spec.kind
    notes = []
    status = H1_APPLICABILITY[kind]
    dh1 = None
    if status == "undefined":
        notes.append(f"delta_h1 undefined: {kind} leaves a jump, the perturbed field is not in H1")
    else:
        dh1 = delta_h1(psi, psi_per)
        if status == "annotated":
            notes.append("delta_h1 computed on a field with jumps; value depends on the derivative "
                         "discretisation")
    tilde = None
    if kind in TILDE_KINDS:
        tilde = delta_h1_tilde(psi, spec)
        notes.append(f"delta_h1_tilde: factor {tilde_factor(spec):g} times the H1 fraction "
                     "of the exact output on the modified region")
    else:
        notes.append("delta_h1_tilde not applicable")
    return MetricReport(delta_p(psi, psi_per), dh1, tilde, None, tuple(notes))


__all__ = ["H1_APPLICABILITY", "MetricReport", "delta_h1", "delta_h1_tilde", "delta_h_rel",
           "delta_p", "report", "tail_h1_fraction", "tilde_factor"]
