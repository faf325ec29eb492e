"""Scenario files: one TOML document per experiment.

Schema (all tables optional except ``ic`` and ``solver``)::

    name = "fig1d-truncate"
    system = "nls1d"            # nls1d | nls2d | phi4 | burgers
    endpoint = 0.95             # z_f for NLS, t_f for phi4 and Burgers
    reversal_depth = 0.95       # defaults to endpoint
    description = "..."

    [ic]                        # named constructor plus its keyword arguments
    name = "fusion"
    kappa = 90.0
    theta_pi = 0.875            # a trailing _pi multiplies the value by pi

    [solver]                    # grid and stepping, see the system's builder
    [perturbation]              # PerturbationSpec fields, or absent
    [analysis]                  # classifier thresholds and extra checks
    [family]                    # parameter, bracket, tol, zf_list, brackets (per z_f)

Numbers given as ``key_pi`` are stored under ``key`` multiplied by pi.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from revlab.perturb import PerturbationSpec

SYSTEMS = ("nls1d", "nls2d", "phi4", "burgers")
IC_NAMES = {
    "nls1d": ("fusion", "solitary", "gaussian"),
    "nls2d": ("gaussian", "solitary"),
    "phi4": ("kink_antikink",),
    "burgers": ("step_down", "ramp_down"),
}


class ConfigError(ValueError):
    pass


def _expand_pi(table: dict) -> dict:
    out = {}
    for key, value in table.items():
        if isinstance(value, dict):
            out[key] = _expand_pi(value)
        elif key.endswith("_pi") and isinstance(value, (int, float)):
            out[key[:-3]] = float(value) * math.pi
        elif key.endswith("_pi") and isinstance(value, list):
            out[key[:-3]] = [float(v) * math.pi for v in value]
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    system: str
    ic: dict
    solver: dict
    endpoint: float
    perturbation: PerturbationSpec | None = None
    reversal_depth: float | None = None
    analysis: dict = field(default_factory=dict)
    family: dict = field(default_factory=dict)
    alt_ic: dict = field(default_factory=dict)
    description: str = ""

    def __post_init__(self):
        if self.system not in SYSTEMS:
            raise ConfigError(f"{self.name}: system must be one of {SYSTEMS}, got {self.system!r}")
        if not self.endpoint > 0:
            raise ConfigError(f"{self.name}: endpoint must be positive")
        ic_name = self.ic.get("name")
        if ic_name not in IC_NAMES[self.system]:
            raise ConfigError(f"{self.name}: unknown initial condition {ic_name!r} for {self.system}; "
                              f"expected one of {IC_NAMES[self.system]}")
        if self.reversal_depth is not None and not self.reversal_depth > 0:
            raise ConfigError(f"{self.name}: reversal_depth must be positive")

    @property
    def depth(self) -> float:
        return self.endpoint if self.reversal_depth is None else self.reversal_depth

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        d = _expand_pi(copy.deepcopy(raw))
        known = {"name", "system", "ic", "solver", "endpoint", "perturbation", "reversal_depth",
                 "analysis", "family", "alt_ic", "description"}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown keys {sorted(extra)}")
        for key in ("name", "system", "ic", "endpoint"):
            if key not in d:
                raise ConfigError(f"missing required key {key!r}")
        pert = d.get("perturbation")
        return cls(
            name=d["name"], system=d["system"], ic=d["ic"], solver=d.get("solver", {}),
            endpoint=float(d["endpoint"]),
            perturbation=PerturbationSpec.from_dict(pert) if pert else None,
            reversal_depth=d.get("reversal_depth"), analysis=d.get("analysis", {}),
            family=d.get("family", {}), alt_ic=d.get("alt_ic", {}),
            description=d.get("description", ""),
        )

    def with_perturbation(self, spec: PerturbationSpec | None) -> "ScenarioConfig":
        return replace(self, perturbation=spec)

    def with_endpoint(self, endpoint: float, depth: float | None = None) -> "ScenarioConfig":
        return replace(self, endpoint=float(endpoint), reversal_depth=depth)

    def forward_key(self) -> tuple:
        """Everything the forward run depends on, as a hashable key."""
        def freeze(d):
            return tuple(sorted((k, freeze(v) if isinstance(v, dict) else
                                 tuple(v) if isinstance(v, list) else v) for k, v in d.items()))
        return (self.system, freeze(self.ic), freeze(self.solver), self.endpoint)


def load_config(path) -> ScenarioConfig:
    with open(path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    return ScenarioConfig.from_dict(raw)


def _catalog_files():
    root = resources.files("revlab") / "catalog"
    return sorted((p for p in root.iterdir() if p.name.endswith(".toml")), key=lambda p: p.name)


def scenario_catalog() -> dict:
    """All shipped scenarios keyed by name, in file order."""
    out = {}
    for item in _catalog_files():
        with item.open("rb") as fh:
            cfg = ScenarioConfig.from_dict(tomllib.load(fh))
        if cfg.name in out:
            raise ConfigError(f"duplicate scenario name {cfg.name!r}")
        out[cfg.name] = cfg
    return out


def lookup(name: str) -> ScenarioConfig:
    cat = scenario_catalog()
    if name not in cat:
        raise KeyError(f"unknown scenario {name!r}; known: {', '.join(cat)}")
    return cat[name]


def resolve(name_or_path: str) -> ScenarioConfig:
    """A catalog name, or a path to a scenario file."""
    p = Path(name_or_path)
    if p.suffix == ".toml" and p.exists():
        return load_config(p)
    return lookup(name_or_path)


__all__ = ["ConfigError", "ScenarioConfig", "load_config", "lookup", "resolve", "scenario_catalog"]
