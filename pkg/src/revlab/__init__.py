"""Reversal laboratory: forward and time-reversed propagation of dispersive
and hyperbolic PDEs, detector perturbations, and reversibility metrics."""

from revlab.grid import ComplexField, Grid1D, RadialGrid, RealField, load_snapshot, sample, save_snapshot

__all__ = ["ComplexField", "Grid1D", "RadialGrid", "RealField", "load_snapshot", "sample", "save_snapshot"]
__version__ = "0.1.0"
