"""``revlab`` command line.

Exit codes: 0 success, 1 bad input, 2 solver abort (resolution guard),
3 bracket error in a threshold search.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from revlab import metrics, nls
from revlab.grid import RadialGrid, SnapshotError, load_snapshot, save_snapshot
from revlab.lab import experiment
from revlab.lab.config import ConfigError, resolve, scenario_catalog
from revlab.perturb import PerturbationSpec

EXIT_SOLVER = 2
EXIT_BRACKET = 3


def _fail(code, message):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guarded(fn):
    """Map library exceptions onto the documented exit codes."""
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except nls.ResolutionError as exc:
            _fail(EXIT_SOLVER, f"solver abort: {exc} {json.dumps(exc.diagnostics, default=str)}")
        except experiment.BracketError as exc:
            _fail(EXIT_BRACKET, str(exc))
        except (ConfigError, SnapshotError, KeyError, ValueError) as exc:
            _fail(1, str(exc))
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _fmt(v):
    return "-" if v is None or v == "" else (f"{v:.6g}" if isinstance(v, float) else str(v))


@click.group()
@click.version_option(package_name="revlab")
def main():
    """Time-reversal experiments: forward runs, perturbed outputs, back-propagation."""


@main.command("list")
def list_scenarios():
    """List the shipped scenarios."""
    for name, cfg in scenario_catalog().items():
        click.echo(f"{name:28s} {cfg.system:8s} {cfg.description}")


@main.command()
@click.argument("scenario")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Directory for the record, snapshots and results.csv.")
@_guarded
def run(scenario, out_dir):
    """Run SCENARIO (a catalog name or a .toml path) end to end."""
    cfg = resolve(scenario)
    rec = experiment.run_reversal_experiment(cfg, out_dir)
    for key, value in rec.row().items():
        click.echo(f"{key:16s} {value}")
    for key, value in rec.conserved.items():
        click.echo(f"{key:16s} {_fmt(value)}")
    for key, value in rec.extras.items():
        if isinstance(value, (int, float, str, bool, list)) or value is None:
            click.echo(f"{key:16s} {_fmt(value)}")
    click.echo(f"{'wall_time':16s} {rec.wall_time:.1f} s")


@main.command()
@click.argument("snapshot", type=click.Path(exists=True, dir_okay=False))
@click.option("--system", type=click.Choice(["nls1d", "nls2d"]), required=True)
@click.option("--depth", type=float, required=True, help="Distance to back-propagate.")
@click.option("--epsilon", type=float, default=1e-3, show_default=True)
@click.option("--dz", type=float, default=1e-4, show_default=True)
@click.option("--adapt/--no-adapt", default=None, help="Intensity-adaptive steps (default: on for nls2d).")
@click.option("--factor", type=float, default=0.01, show_default=True, help="dz * max|psi|^2 bound.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None)
@_guarded
def reverse(snapshot, system, depth, epsilon, dz, adapt, factor, out_path):
    """Back-propagate the field stored in SNAPSHOT by DEPTH."""
    fld = load_snapshot(snapshot)
    radial = isinstance(fld.grid, RadialGrid)
    if radial != (system == "nls2d"):
        raise ValueError(f"snapshot grid does not match --system {system}")
    adapt = radial if adapt is None else adapt
    params = nls.NlsParams(epsilon, "radial-2d" if radial else "periodic-1d")
    ctl = nls.StepControl(dz=dz, dz_min=min(dz, 1e-8), adapt=adapt, cfl_like_factor=factor)
    traj = nls.reverse(fld, params, depth, ctl, 10**9)
    click.echo(f"z {traj.final.z:.6g}  power drift {traj.diagnostics['max_power_drift']:.3e}  "
               f"steps {traj.steps}")
    if out_path:
        save_snapshot(traj.final, out_path)
        click.echo(f"wrote {out_path}")


@main.command()
@click.argument("family_config")
@click.option("--tol", type=float, default=None, help="Bracket width at which to stop.")
@_guarded
def threshold(family_config, tol):
    """Bisect the perturbation parameter of FAMILY_CONFIG between Split and Single."""
    cfg = resolve(family_config)
    res = experiment.threshold_bisect(cfg, tol=tol)
    for value, verdict in res.probes:
        click.echo(f"probe {res.family}={value:.6g}: {verdict}")
    click.echo(f"threshold {res.family} = {res.x_th:.6g}  (lost {res.bracket[0]:.6g}, "
               f"maintained {res.bracket[1]:.6g})")
    click.echo(f"delta_p {res.delta_p_at_th:.6g}  delta_h1_tilde {_fmt(res.delta_h1_tilde_at_th)}")


@main.command()
@click.argument("family_config")
@click.option("--zf", "zf_list", type=float, multiple=True, help="Propagation distances (repeatable).")
@click.option("--tol", type=float, default=None)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="CSV of thresholds.")
@_guarded
def sweep(family_config, zf_list, tol, out_path):
    """Threshold of FAMILY_CONFIG at each --zf."""
    cfg = resolve(family_config)
    results = experiment.sweep_zf(cfg, list(zf_list) or None, tol)
    click.echo("z_f      x_th      delta_p   delta_h1_tilde")
    for r in results:
        click.echo(f"{r.z_f:<8.4g} {r.x_th:<9.5g} {r.delta_p_at_th:<9.4g} {_fmt(r.delta_h1_tilde_at_th)}")
    if out_path:
        experiment.write_thresholds(out_path, results)


@main.command("metrics")
@click.argument("snap_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("snap_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--perturbation", "spec_text", default=None,
              help="Perturbation that produced SNAP_B, e.g. truncate:13 or scale_tail:13,0.4.")
@_guarded
def metrics_cmd(snap_a, snap_b, spec_text):
    """Discrepancy between an exact output SNAP_A and its perturbed copy SNAP_B."""
    a, b = load_snapshot(snap_a), load_snapshot(snap_b)
    spec = PerturbationSpec.parse(spec_text) if spec_text else None
    rep = metrics.report(a, b, spec)
    click.echo(f"delta_p        {rep.delta_p:.6g}")
    click.echo(f"delta_h1       {_fmt(rep.delta_h1)}")
    click.echo(f"delta_h1_tilde {_fmt(rep.delta_h1_tilde)}")
    for note in rep.notes:
        click.echo(f"note: {note}")
    if not np.isfinite(rep.delta_p):
        sys.exit(1)


if __name__ == "__main__":
    main()
