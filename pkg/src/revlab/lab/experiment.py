"""Reversal pipelines: forward run, perturbation, back-propagation, verdict, metrics."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from revlab import burgers, classify, metrics, nls, perturb, phi4, waves
from revlab.grid import Grid1D, RadialGrid, sample, save_snapshot
from revlab.lab.config import ConfigError, ScenarioConfig
from revlab.metrics import MetricReport
from revlab.perturb import PerturbationSpec

CSV_COLUMNS = ("scenario", "z_f", "perturbation_kind", "param", "delta_p", "delta_h1",
               "delta_h1_tilde", "verdict", "recovery_error")

RECOVERED, CAPTURED_AGAIN = "Recovered", "Captured-again"


class BracketError(RuntimeError):
    """Bisection cannot proceed: equal or ambiguous verdicts."""


@dataclass(frozen=True, eq=False)
class ExperimentRecord:
    scenario: ScenarioConfig
    metrics: MetricReport | None
    verdict: object  # ReversalVerdict, CollisionOutcome or None
    recovery_error: float
    conserved: dict
    wall_time: float
    snapshot_paths: tuple = ()
    extras: dict = field(default_factory=dict)
    forward: object = None
    reversed: object = None

    @property
    def verdict_label(self) -> str:
        if self.verdict is None:
            return ""
        if isinstance(self.verdict, phi4.CollisionOutcome):
            return RECOVERED if self.verdict.escaped else CAPTURED_AGAIN
        return self.verdict.outcome

    def row(self) -> dict:
        spec = self.scenario.perturbation
        m = self.metrics

        def num(v):
            return "" if v is None else repr(float(v))
        return {
            "scenario": self.scenario.name,
            "z_f": repr(self.scenario.endpoint),
            "perturbation_kind": spec.kind if spec else "none",
            "param": repr(spec.param) if spec else "",
            "delta_p": num(m.delta_p) if m else "",
            "delta_h1": num(m.delta_h1) if m else "",
            "delta_h1_tilde": num(m.delta_h1_tilde) if m else "",
            "verdict": self.verdict_label,
            "recovery_error": num(self.recovery_error),
        }

    def to_json(self) -> dict:
        def clean(v):
            if isinstance(v, dict):
                return {k: clean(x) for k, x in v.items()}
            if isinstance(v, (list, tuple)):
                return [clean(x) for x in v]
            if isinstance(v, (np.floating, np.integer)):
                return v.item()
            if isinstance(v, np.ndarray):
                return v.tolist()
            if isinstance(v, Fraction):
                return str(v)
            return v
        m = self.metrics
        return clean({
            "row": self.row(),
            "notes": list(m.notes) if m else [],
            "delta_h_rel": m.delta_h_rel if m else None,
            "conserved": self.conserved,
            "wall_time": self.wall_time,
            "snapshots": [str(p) for p in self.snapshot_paths],
            "extras": {k: v for k, v in self.extras.items() if not isinstance(v, np.ndarray)},
        })


@dataclass(frozen=True)
class ThresholdResult:
    z_f: float
    family: str
    x_th: float
    bracket: tuple  # (lost, maintained)
    delta_p_at_th: float
    delta_h1_tilde_at_th: float | None
    probes: tuple = ()  # (value, verdict) in evaluation order

    def __post_init__(self):
        lost, kept = self.bracket
        if lost == kept:
            raise ValueError("bracket ends coincide")


# ---------------------------------------------------------------------------
# builders


def _nls_setup(cfg: ScenarioConfig):
    s = cfg.solver
    eps = float(s.get("epsilon", 1e-3))
    if cfg.system == "nls1d":
        hw = float(s.get("half_width", 32 * math.pi))
        grid = Grid1D(-hw, hw, int(s.get("n", 2**14)))
        params = nls.NlsParams(eps, "periodic-1d")
    else:
        grid = RadialGrid(float(s.get("r_max", 120.0)), int(s.get("n", 2**14)))
        params = nls.NlsParams(eps, "radial-2d")
    ctl = nls.StepControl(dz=float(s.get("dz", 1e-4)), dz_min=float(s.get("dz_min", 1e-7)),
                          adapt=bool(s.get("adapt", False)),
                          cfl_like_factor=float(s.get("cfl_like_factor", 0.05)))
    guards = nls.Guards(**s.get("guards", {}))
    return grid, params, ctl, guards, s.get("snapshot_stride")


def build_nls_ic(cfg: ScenarioConfig, grid, epsilon: float):
    ic = dict(cfg.ic)
    name = ic.pop("name")
    if name == "fusion":
        return waves.fusion_ic(grid=grid, epsilon=epsilon, **ic)
    if name == "solitary":
        if isinstance(grid, RadialGrid):
            return waves.solitary_2d_shoot(ic["kappa"], grid, epsilon)
        return waves.cq_solitary_1d(ic["kappa"], grid, epsilon)
    if name == "gaussian":
        amp, width = float(ic.get("amplitude", 1.0)), float(ic.get("width", 1.0))
        return sample(grid, lambda x: amp * np.exp(-((x / width) ** 2)))
    raise ConfigError(f"unknown NLS initial condition {name!r}")


def _phi4_setup(cfg: ScenarioConfig):
    s = cfg.solver
    grid = Grid1D(float(s.get("x_min", -32.0)), float(s.get("x_max", 32.0)), int(s.get("n", 4096)))
    dt = float(s.get("dt_fraction", phi4.DEFAULT_DT_FRACTION)) * grid.dx
    ic = dict(cfg.ic)
    ic.pop("name")
    state = waves.kink_antikink_ic(float(ic["v"]), float(ic.get("x0", 8.0)), grid)
    return grid, dt, state, s.get("snapshot_stride")


def _burgers_ic(table: dict):
    t = dict(table)
    name = t.pop("name")
    if name == "step_down":
        return burgers.step_down().shifted(Fraction(str(t.get("shift", 0))))
    if name == "ramp_down":
        return burgers.ramp_down(Fraction(str(t.get("shift", 0))))
    raise ConfigError(f"unknown Burgers initial condition {name!r}")


# ---------------------------------------------------------------------------
# forward cache: probes of one family share their forward run


_FORWARD: dict = {}
_FORWARD_LIMIT = 2


def forward_run(cfg: ScenarioConfig):
    """Forward trajectory for ``cfg`` (memoised on the forward part of the config)."""
    key = cfg.forward_key()
    if key in _FORWARD:
        return _FORWARD[key]
    if cfg.system in ("nls1d", "nls2d"):
        grid, params, ctl, guards, stride = _nls_setup(cfg)
        psi0 = build_nls_ic(cfg, grid, params.epsilon)
        traj = nls.propagate(psi0, params, cfg.endpoint, ctl, stride, guards)
    elif cfg.system == "phi4":
        grid, dt, state, stride = _phi4_setup(cfg)
        traj = phi4.propagate(state, cfg.endpoint, dt, stride)
    else:
        raise ConfigError("Burgers scenarios have no forward trajectory to cache")
    while len(_FORWARD) >= _FORWARD_LIMIT:
        _FORWARD.pop(next(iter(_FORWARD)))
    _FORWARD[key] = traj
    return traj


def clear_cache() -> None:
    _FORWARD.clear()


def _concat(first, second):
    snaps = first.snapshots + second.snapshots[1:]
    log = np.vstack((first.log, second.log[1:]))
    diag = dict(first.diagnostics)
    for k in ("max_power_drift", "max_tail"):
        diag[k] = max(first.diagnostics.get(k, 0.0), second.diagnostics.get(k, 0.0))
    diag["min_step"] = min(first.diagnostics.get("min_step", np.inf), second.diagnostics.get("min_step", np.inf))
    return nls.Trajectory(snaps, log, first.steps + second.steps, diag)


def _relative_drift(series) -> float:
    series = np.asarray(series, dtype=float)
    return float(np.max(np.abs(series - series[0])) / abs(series[0]))


def _collapse_z(traj) -> float | None:
    """z of the first local maximum of the peak intensity (arrest of the collapse)."""
    z, peak = traj.log[:, 0], traj.log[:, 3]
    for i in range(1, len(peak) - 1):
        if peak[i] >= peak[i - 1] and peak[i] > peak[i + 1]:
            return float(z[i])
    return None


# ---------------------------------------------------------------------------
# pipelines


def _run_nls(cfg: ScenarioConfig):
    grid, params, ctl, guards, stride = _nls_setup(cfg)
    fwd = forward_run(cfg)
    psi0, out = fwd.initial, fwd.final
    per = perturb.apply(cfg.perturbation, out)
    # first leg stops exactly at z = 0 so the recovered input is a stored state
    back = nls.reverse(per, params, cfg.endpoint, ctl, stride, guards)
    full = back
    if cfg.depth > cfg.endpoint * (1 + 1e-12):
        more = nls.reverse(back.final, params, cfg.depth - cfg.endpoint, ctl, stride, guards)
        full = _concat(back, more)
    a = cfg.analysis
    verdict = classify.classify_reversal(back, a.get("window_fraction", 0.15), a.get("eta", 0.1),
                                         a.get("d_min", 1.0))
    report = metrics.report(out, per, cfg.perturbation)
    conserved = {
        "forward_power_drift": _relative_drift(fwd.log[:, 1]),
        "forward_hamiltonian_drift": _relative_drift(fwd.log[:, 2]),
        "forward_peak_intensity": float(np.max(fwd.log[:, 3])),
        "reverse_power_drift": _relative_drift(full.log[:, 1]),
        "forward_steps": fwd.steps,
        "reverse_steps": full.steps,
    }
    centre = 0 if cfg.system == "nls2d" else int(np.argmin(np.abs(grid.x)))
    extras = {
        "axis": np.column_stack((full.z, [abs(f.values[centre]) ** 2 for f in full.fields])),
    }
    if cfg.system == "nls2d":
        extras["critical_power_ratio"] = nls.critical_power_ratio(psi0)
        extras["collapse_z"] = _collapse_z(fwd)
        extras["output_peak_ratio"] = float(fwd.log[-1, 3] / np.max(psi0.intensity))
        extras["output_kappa"] = waves.fit_kappa(out, params.epsilon)
    err = classify.input_recovery_error(back.final, psi0)
    return report, verdict, err, conserved, extras, fwd, full, [("output", out), ("perturbed", per),
                                                              ("recovered", back.final)]


def _phi4_metrics(out, per):
    a = np.concatenate((out.phi.values - phi4.VACUUM, out.pi.values))
    d = np.concatenate((out.phi.values - per.phi.values, out.pi.values - per.pi.values))
    dp = float(np.sum(d * d) / np.sum(a * a))
    rel = metrics.delta_h_rel(out, per)
    return MetricReport(dp, None, None, rel, ("delta_p: squared L2 change of (phi + 1, pi) relative "
                                              "to the output",))


def _run_phi4(cfg: ScenarioConfig):
    grid, dt, state, stride = _phi4_setup(cfg)
    fwd = forward_run(cfg)
    out = fwd.final
    spec = cfg.perturbation
    if spec is None:
        per = out
    elif spec.kind == "truncate":
        per = phi4.truncate_state(out, spec.param)
    else:
        raise ConfigError(f"phi4 scenarios support truncation only, not {spec.kind}")
    a = cfg.analysis
    horizon = float(cfg.solver.get("classify_until", 150.0))
    if horizon > cfg.endpoint:
        tail = phi4.propagate(out, horizon, dt, stride)
        longer = phi4.Phi4Trajectory(fwd.snapshots + tail.snapshots[1:],
                                     np.vstack((fwd.energy_log, tail.energy_log[1:])))
    else:
        longer = fwd
    forward_outcome = phi4.classify_collision(longer, a.get("proximity", 1.0),
                                              a.get("escape_radius", 15.0))
    back = phi4.reverse(per, cfg.depth, dt, stride)
    x0 = float(cfg.ic.get("x0", 8.0))
    reversed_outcome = phi4.classify_collision(back, a.get("proximity", 1.0), x0)
    conserved = {
        "forward_energy_drift": _relative_drift(fwd.energy_log[:, 1]),
        "reverse_energy_drift": _relative_drift(back.energy_log[:, 1]),
    }
    extras = {
        "forward_outcome": forward_outcome.kind,
        "bounce_times": list(forward_outcome.bounce_times),
        "reverse_outcome": reversed_outcome.kind,
        "antikink": phi4.track_antikink(back),
    }
    err = phi4.recovery_error(back.final, fwd.initial)
    return _phi4_metrics(out, per), reversed_outcome, err, conserved, extras, longer, back, []


def _run_burgers(cfg: ScenarioConfig):
    first = _burgers_ic(cfg.ic)
    second = _burgers_ic(cfg.alt_ic) if cfg.alt_ic else None
    t_end = Fraction(str(cfg.endpoint))
    a = burgers.evolve_exact(first, t_end)
    extras = {"profile": a, "shocks": [str(x) for x in burgers.shock_positions(a)]}
    if second is not None:
        b = burgers.evolve_exact(second, t_end)
        extras["identical"] = a == b
        extras["alt_profile"] = b
    s = cfg.solver
    ns = s.get("n", [512])
    ns = ns if isinstance(ns, list) else [ns]
    errs = []
    for n in ns:
        grid = Grid1D(float(s.get("x_min", -2.0)), float(s.get("x_max", 4.0)), int(n))
        u0 = burgers.sample_profile(first, grid)
        errs.append(burgers.l1_distance(a, burgers.evolve_godunov(u0, float(t_end), float(s.get("cfl", 0.5)))))
    extras["godunov_l1"] = errs
    extras["godunov_order"] = [math.log2(e0 / e1) for e0, e1 in zip(errs, errs[1:])]
    return None, None, float("nan"), {}, extras, None, None, []


def run_reversal_experiment(config: ScenarioConfig, out_dir=None) -> ExperimentRecord:
    """Forward, perturb, reverse, classify and measure one scenario.

    With ``out_dir`` the record (JSON), the output / perturbed / recovered
    snapshots and a results row are written under ``out_dir``.
    Solver aborts surface as ``nls.ResolutionError`` with diagnostics.
    """
    t0 = time.perf_counter()
    runner = {"nls1d": _run_nls, "nls2d": _run_nls, "phi4": _run_phi4, "burgers": _run_burgers}
    report, verdict, err, conserved, extras, fwd, back, snaps = runner[config.system](config)
    paths = []
    if out_dir is not None:
        base = Path(out_dir) / config.name
        base.mkdir(parents=True, exist_ok=True)
        for label, fld in snaps:
            p = base / f"{label}.rvlb"
            save_snapshot(fld, p)
            paths.append(p)
    rec = ExperimentRecord(config, report, verdict, err, conserved, time.perf_counter() - t0,
                           tuple(paths), extras, fwd, back)
    if out_dir is not None:
        base = Path(out_dir) / config.name
        (base / "record.json").write_text(json.dumps(rec.to_json(), indent=2))
        if back is not None and hasattr(back, "write_log"):
            back.write_log(base / "reverse_log.csv")
        if isinstance(extras.get("antikink"), phi4.AntikinkSeries):
            extras["antikink"].write_csv(base / "antikink.csv")
        if isinstance(extras.get("profile"), burgers.PiecewiseProfile):
            extras["profile"].write_csv(base / "profile.csv")
        append_results(Path(out_dir) / "results.csv", [rec])
    return rec


def append_results(path, records) -> None:
    path = Path(path)
    new = not path.exists()
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if new:
            w.writeheader()
        for r in records:
            w.writerow(r.row())


# ---------------------------------------------------------------------------
# threshold search


FAMILIES = {
    "x_max": ("truncate", "param"),
    "dI": ("digitize", "param"),
    "beta_low": ("scale_tail", "beta"),
    "beta_high": ("scale_tail", "beta"),
    "k_max": ("bandlimit", "param"),
}


def family_member(config: ScenarioConfig, family: str, value: float) -> ScenarioConfig:
    if family not in FAMILIES:
        raise ConfigError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}")
    kind, attr = FAMILIES[family]
    base = config.perturbation
    if base is None or base.kind != kind:
        base = PerturbationSpec(kind, 13.0 if kind == "scale_tail" else float(value),
                                beta=1.0 if kind == "scale_tail" else None)
    spec = replace(base, **{attr: float(value)})
    return config.with_perturbation(spec)


def _verdict(config) -> str:
    return run_reversal_experiment(config).verdict.outcome


def threshold_bisect(config: ScenarioConfig, family: str | None = None, bracket=None,
                     tol: float | None = None) -> ThresholdResult:
    """Bisect a perturbation parameter between a Split and a Single verdict.

    Defaults come from the config's ``[family]`` table. Every probe is a full
    reversal; the forward run is shared. Ambiguous verdicts stop the search.
    """
    fam = config.family
    family = family or fam.get("parameter")
    bracket = tuple(bracket if bracket is not None else fam.get("bracket", ()))
    tol = float(tol if tol is not None else fam.get("tol", 0.05))
    if len(bracket) != 2 or not bracket[0] < bracket[1]:
        raise ConfigError(f"bracket must be an increasing pair, got {bracket}")
    if not tol > 0:
        raise ConfigError("tol must be positive")
    lo, hi = map(float, bracket)
    probes = []

    def probe(v):
        outcome = _verdict(family_member(config, family, v))
        probes.append((v, outcome))
        if outcome == classify.AMBIGUOUS:
            raise BracketError(f"ambiguous verdict at {family}={v}; bisection halted "
                               f"(probes so far: {probes})")
        return outcome

    v_lo, v_hi = probe(lo), probe(hi)
    if v_lo == v_hi:
        raise BracketError(f"{family}: same verdict at both ends ({lo}: {v_lo}, {hi}: {v_hi})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if probe(mid) == v_lo:
            lo = mid
        else:
            hi = mid
    lost, kept = (lo, hi) if v_lo == classify.SINGLE else (hi, lo)
    x_th = 0.5 * (lo + hi)
    cfg_th = family_member(config, family, x_th)
    out = forward_run(cfg_th).final
    rep = metrics.report(out, perturb.apply(cfg_th.perturbation, out), cfg_th.perturbation)
    return ThresholdResult(config.endpoint, family, x_th, (lost, kept), rep.delta_p, rep.delta_h1_tilde,
                           tuple(probes))


def sweep_zf(config: ScenarioConfig, zf_list=None, tol: float | None = None, family: str | None = None,
             bracket=None) -> list:
    """threshold_bisect at each z_f in increasing order.

    Without an explicit ``bracket``, a z_f listed in the config's ``zf_list``
    uses the matching entry of ``[family] brackets`` when present, otherwise
    the common ``bracket``.
    """
    fam = config.family
    zf_list = list(zf_list if zf_list is not None else fam.get("zf_list", ()))
    if not zf_list:
        raise ConfigError("zf_list is empty")
    if any(b <= a for a, b in zip(zf_list, zf_list[1:])):
        raise ConfigError("zf_list must be increasing")
    per_zf = {}
    if "brackets" in fam:
        if len(fam["brackets"]) != len(fam.get("zf_list", ())):
            raise ConfigError("brackets must have one entry per zf_list value")
        per_zf = {float(z): tuple(b) for z, b in zip(fam["zf_list"], fam["brackets"])}
    return [threshold_bisect(config.with_endpoint(zf), family,
                             bracket if bracket is not None else per_zf.get(float(zf)), tol)
            for zf in zf_list]


def write_thresholds(path, results) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["z_f", "family", "x_th", "lost", "maintained", "delta_p", "delta_h1_tilde"])
        for r in results:
            w.writerow([r.z_f, r.family, r.x_th, r.bracket[0], r.bracket[1], r.delta_p_at_th,
                        "" if r.delta_h1_tilde_at_th is None else r.delta_h1_tilde_at_th])


# ---------------------------------------------------------------------------
# scenario-level analyses


@dataclass(frozen=True)
class ForwardRobustness:
    z_end: float
    distances: dict  # label pair -> relative L2 distance of |psi| on the window
    kappa: float


def forward_robustness(config: ScenarioConfig) -> ForwardRobustness:
    """Propagate the exact output and its perturbed copies on to ``forward_to``
    and compare amplitude profiles on |x| <= ``window``."""
    a = config.analysis
    z_end = float(a["forward_to"])
    window = float(a.get("window", 5.0))
    grid, params, ctl, guards, stride = _nls_setup(config)
    out = forward_run(config).final
    fields = {"exact": out}
    for text in a.get("compare", []):
        spec = PerturbationSpec.parse(text)
        fields[spec.kind] = perturb.apply(spec, out)
    finals = {k: nls.propagate(v, params, z_end, ctl, 10**9, guards).final for k, v in fields.items()}
    inside = np.abs(grid.x) <= window
    dist = {}
    names = list(finals)
    for i, p in enumerate(names):
        for q in names[i + 1:]:
            u, v = np.abs(finals[p].values[inside]), np.abs(finals[q].values[inside])
            dist[(p, q)] = float(np.linalg.norm(u - v) / np.linalg.norm(u))
    return ForwardRobustness(z_end, dist, waves.fit_kappa(finals["exact"], params.epsilon))


def on_axis_agreement(a: ExperimentRecord, b: ExperimentRecord, z_max: float) -> float:
    """Largest relative gap of the on-axis intensities of two reversed runs over z <= z_max."""
    za, ia = a.extras["axis"][:, 0], a.extras["axis"][:, 1]
    zb, ib = b.extras["axis"][:, 0], b.extras["axis"][:, 1]
    sel = za <= z_max
    # both series run downward in z; interpolate b onto a's samples
    other = np.interp(za[sel], zb[::-1], ib[::-1])
    return float(np.max(np.abs(other - ia[sel]) / ia[sel]))


def antikink_divergence(a: ExperimentRecord, b: ExperimentRecord, tol: float = 0.5) -> float | None:
    """First time, along the reversed runs, at which the antikink positions differ by
    more than ``tol`` (a crossing found in only one run counts as a difference)."""
    sa, sb = a.extras["antikink"], b.extras["antikink"]
    if not np.allclose(sa.t, sb.t):
        raise ValueError("antikink series use different clocks")
    for t, xa, xb in zip(sa.t, sa.x, sb.x):
        if np.isnan(xa) and np.isnan(xb):
            continue
        if np.isnan(xa) or np.isnan(xb) or abs(xa - xb) > tol:
            return float(t)
    return None


__all__ = ["BracketError", "CSV_COLUMNS", "ExperimentRecord", "ForwardRobustness", "ThresholdResult",
           "antikink_divergence", "append_results", "clear_cache", "family_member", "forward_robustness",
           "forward_run", "on_axis_agreement", "run_reversal_experiment", "sweep_zf", "threshold_bisect",
           "write_thresholds"]
