"""Acceptance criteria, each evaluated at its stated tolerance.

Every test emits one PASS/FAIL line; the lines are repeated in the
terminal summary. A criterion the implementation does not reach is marked
``xfail(strict=True)`` and still computed in full. The checks listed in
``must_hold`` are the parts that are reproduced: if one of those breaks,
the test fails outright instead of counting as the expected failure.
"""

import time
from dataclasses import replace
from fractions import Fraction as F
from functools import lru_cache

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from revlab import burgers, classify, nls, phi4, spectral, waves
from revlab.grid import RadialGrid
from revlab.lab import lookup, run_reversal_experiment, sweep_zf, threshold_bisect
from revlab.lab.experiment import antikink_divergence, forward_robustness, on_axis_agreement

pytestmark = pytest.mark.slow

SPLIT, SINGLE = classify.SPLIT, classify.SINGLE
ETA_RANGE = (0.05, 0.1, 0.2)


class CriterionNotMet(AssertionError):
    """The criterion was evaluated at full tolerance and not met."""


def known_gap(reason):
    return pytest.mark.xfail(strict=True, raises=CriterionNotMet, reason=reason)


def report(number, title, checks, must_hold=()):
    """Record one line for the criterion and fail if any check failed."""
    ok = all(good for _, good, _ in checks)
    parts = "; ".join(f"{label} {detail}{'' if good else ' <-- miss'}" for label, good, detail in checks)
    line = f"{'PASS' if ok else 'FAIL'} [{number:>2}] {title}: {parts}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    broken = [label for label, good, _ in checks if label in must_hold and not good]
    if broken:
        raise AssertionError(f"reproduced part of criterion {number} regressed: {broken}")
    if not ok:
        raise CriterionNotMet(line)


def rel_ok(value, target, rel):
    return value is not None and abs(value - target) <= rel * abs(target)


def pct(v):
    return "n/a" if v is None else f"{100 * v:.3g}%"


def num(v):
    return "none" if v is None else f"{v:.4g}"


@lru_cache(maxsize=None)
def record(name):
    """Run a catalog scenario once; keep the summary, drop the trajectories."""
    rec = run_reversal_experiment(lookup(name))
    extras = dict(rec.extras)
    if rec.scenario.system == "nls1d":
        extras["merge_z"] = classify.merge_distance(rec.forward)
        extras["forward_final_peaks"] = len(classify.detect_peaks(rec.forward.final))
        extras["output"] = rec.forward.final
        extras["eta_verdicts"] = {eta: classify.classify_reversal(rec.reversed, eta=eta).outcome
                                  for eta in ETA_RANGE}
    return replace(rec, forward=None, reversed=None, extras=extras)


# ---------------------------------------------------------------------------


def test_criterion_01_fusion_round_trip():
    rec = record("fig1c-exact")
    merge = rec.extras["merge_z"]
    checks = [
        ("fused output", rec.extras["forward_final_peaks"] == 1, f"{rec.extras['forward_final_peaks']} peak at z_f"),
        ("fusion distance", rel_ok(merge, 0.35, 0.05 / 0.35), f"{num(merge)} (0.35 +- 0.05)"),
        ("verdict", rec.verdict.outcome == SPLIT, rec.verdict.outcome),
        ("recovery error", rec.recovery_error < 1e-4, f"{rec.recovery_error:.2e} (< 1e-4)"),
        ("runtime", rec.wall_time < 120, f"{rec.wall_time:.0f} s (< 120 s)"),
    ]
    report(1, "fusion round trip", checks)


VERDICT_TABLE = [
    ("truncate 13", "fig1d-truncate", SINGLE),
    ("bandlimit 1.2pi", "fig1e-bandlimit", SINGLE),
    ("phase flip 13", "fig2-phase-flip", SINGLE),
    ("block 4", "fig5-block-04", SINGLE),
    ("block 8", "fig5-block-08", SINGLE),
    ("block 10", "fig5-block-10", SINGLE),
    ("block 11", "fig5-block-11", SINGLE),
    ("digitize 0.88", "fig1f-digitize-088", SINGLE),
    ("digitize 0.25", "fig1g-digitize-025", SPLIT),
    ("beta 0.5", "fig5-scale-050", SPLIT),
    ("beta 1.3", "fig5-scale-130", SPLIT),
    ("beta 0.4", "fig5-scale-040", SINGLE),
    ("beta 1.4", "fig5-scale-140", SINGLE),
]


@known_gap("bandlimit, block 11 and beta 0.4 / 1.4 reversals still split; see the decisions notes")
def test_criterion_02_verdict_table():
    t0 = time.perf_counter()
    checks = []
    for label, name, expected in VERDICT_TABLE:
        got = record(name).verdict.outcome
        checks.append((label, got == expected, got))
    elapsed = time.perf_counter() - t0
    checks.append(("runtime", elapsed < 1200, f"{elapsed:.0f} s (< 1200 s)"))
    report(2, "perturbed-reversal verdicts", checks,
           must_hold=("truncate 13", "phase flip 13", "block 4", "block 8", "block 10", "digitize 0.88",
                      "digitize 0.25", "beta 0.5", "beta 1.3", "runtime"))


METRIC_TABLE = [
    ("dP truncate", "fig1d-truncate", "delta_p", 0.018),
    ("dP bandlimit", "fig1e-bandlimit", "delta_p", 0.05),
    ("dP digitize 0.88", "fig1f-digitize-088", "delta_p", 0.045),
    ("dP digitize 0.25", "fig1g-digitize-025", "delta_p", 0.013),
    ("dP block 11", "fig5-block-11", "delta_p", 0.0029),
    ("dP phase flip", "fig2-phase-flip", "delta_p", 0.072),
    ("dH1~ truncate", "fig1d-truncate", "delta_h1_tilde", 0.074),
    ("dH1~ phase flip", "fig2-phase-flip", "delta_h1_tilde", 0.29),
    ("dH1~ beta 0.4", "fig5-scale-040", "delta_h1_tilde", 0.027),
    ("dH1~ beta 1.4", "fig5-scale-140", "delta_h1_tilde", 0.012),
    ("dH1 bandlimit", "fig1e-bandlimit", "delta_h1", 0.291),
    ("dH1 block 11", "fig5-block-11", "delta_h1", 0.035),
]


@known_gap("bandlimit metrics at the literal cutoff and the block H1 value miss; see the decisions notes")
def test_criterion_03_metric_table():
    checks = []
    for label, name, attr, target in METRIC_TABLE:
        value = getattr(record(name).metrics, attr)
        checks.append((label, rel_ok(value, target, 0.3), f"{pct(value)} ({pct(target)} +- 30%)"))
    report(3, "metric reproduction", checks,
           must_hold=("dP truncate", "dP digitize 0.88", "dP digitize 0.25", "dP block 11", "dP phase flip",
                      "dH1~ truncate", "dH1~ phase flip", "dH1~ beta 0.4", "dH1~ beta 1.4"))


@known_gap("the truncation threshold at z_f = 0.95 lies below 13.6; see the decisions notes")
def test_criterion_04_threshold_transition():
    t0 = time.perf_counter()
    res = threshold_bisect(lookup("fig4-threshold"))
    runs = {x: record(name) for x, name in [(13.6, "fig4a-truncate-1360"), (13.86, "fig4b-truncate-1386"),
                                            (13.91, "fig4c-truncate-1391"), (14.1, "fig4d-truncate-1410")]}
    e1, e2 = runs[13.6].verdict.ellipse_extent, runs[13.86].verdict.ellipse_extent
    elapsed = time.perf_counter() - t0
    checks = [
        ("x_th", 13.6 < res.x_th < 14.1, f"{res.x_th:.4g} (lost {res.bracket[0]:.4g}, kept {res.bracket[1]:.4g})"),
        ("13.91", runs[13.91].verdict.outcome == SINGLE, runs[13.91].verdict.outcome),
        ("14.1", runs[14.1].verdict.outcome == SPLIT, runs[14.1].verdict.outcome),
        ("transient pair", bool(e1) and bool(e2) and e2 > e1, f"ellipse extents {e1}, {e2}"),
        ("runtime", elapsed < 1800, f"{elapsed:.0f} s (< 1800 s)"),
    ]
    report(4, "threshold phase transition", checks, must_hold=("14.1", "runtime"))


def test_criterion_05_monotone_sweep():
    t0 = time.perf_counter()
    res = sweep_zf(lookup("fig6-threshold-sweep"))
    elapsed = time.perf_counter() - t0
    x = [r.x_th for r in res]
    dp = [r.delta_p_at_th for r in res]
    dh = [r.delta_h1_tilde_at_th for r in res]
    checks = [
        ("x_th", all(b >= a for a, b in zip(x, x[1:])), "nondecreasing " + ", ".join(f"{v:.3g}" for v in x)),
        ("dP", all(b <= a for a, b in zip(dp, dp[1:])), "nonincreasing " + ", ".join(pct(v) for v in dp)),
        ("dH1~", all(b <= a for a, b in zip(dh, dh[1:])), "nonincreasing " + ", ".join(pct(v) for v in dh)),
        ("runtime", elapsed < 7200, f"{elapsed:.0f} s (< 7200 s)"),
    ]
    report(5, "monotone threshold sweep over z_f = " + ", ".join(f"{r.z_f:g}" for r in res), checks)


@known_gap("the copy band-limited at the literal cutoff loses 42% of the power; see the decisions notes")
def test_criterion_06_forward_robustness():
    rob = forward_robustness(lookup("fig3-forward"))
    checks = [(f"{a}-{b}", d < 0.02, f"{pct(d)} (< 2%)") for (a, b), d in rob.distances.items()]
    checks.append(("kappa", rel_ok(rob.kappa, 127.5, 0.05), f"{rob.kappa:.4g} (127.5 +- 5%)"))
    report(6, f"forward robustness to z = {rob.z_end:g}", checks,
           must_hold=tuple(label for label, _, _ in checks if "bandlimit" not in label))


@known_gap("power ratio, arrest distance and output peak ratio differ; see the decisions notes")
def test_criterion_07_collapse_2d():
    exact, trunc = record("fig6-2d-exact"), record("fig6-2d-truncate")
    x = exact.extras
    z_f = exact.scenario.endpoint
    gap = on_axis_agreement(exact, trunc, -1.5 * z_f)
    m = trunc.metrics
    checks = [
        ("P/P_cr", rel_ok(x["critical_power_ratio"], 7.4, 0.05), f"{x['critical_power_ratio']:.4g} (7.4 +- 5%)"),
        ("collapse z", x["collapse_z"] is not None and 0.03 <= x["collapse_z"] <= 0.045,
         f"{num(x['collapse_z'])} in [0.03, 0.045]"),
        ("peak ratio", rel_ok(x["output_peak_ratio"], 8.0, 0.15), f"{x['output_peak_ratio']:.4g} (8 +- 15%)"),
        ("kappa", rel_ok(x["output_kappa"], 148.0, 0.05), f"{x['output_kappa']:.4g} (148 +- 5%)"),
        ("exact recovery", exact.recovery_error < 1e-3, f"{exact.recovery_error:.2e} (< 1e-3)"),
        ("truncated dP", abs(m.delta_p - 0.004) <= 0.002, f"{pct(m.delta_p)} (0.4 +- 0.2 pp)"),
        ("truncated dH1~", abs(m.delta_h1_tilde - 0.07) <= 0.03, f"{pct(m.delta_h1_tilde)} (7 +- 3 pp)"),
        ("truncated recovery", 0.1 <= trunc.recovery_error <= 10, f"{trunc.recovery_error:.3g} (order one)"),
        ("on-axis agreement", gap < 0.1, f"{pct(gap)} for z <= {-1.5 * z_f:g} (< 10%)"),
        ("runtime", exact.wall_time + trunc.wall_time < 3600,
         f"{exact.wall_time + trunc.wall_time:.0f} s (< 3600 s)"),
    ]
    report(7, "2D collapse and regained reversibility", checks,
           must_hold=("kappa", "exact recovery", "truncated dP", "truncated dH1~", "truncated recovery",
                      "on-axis agreement", "runtime"))


@known_gap("the two-bounce energy change is 0.13%, just under the 0.14% bound; see the decisions notes")
def test_criterion_08_phi4_suite():
    cap, two = record("fig7a-capture"), record("fig7b-twobounce")
    cap_t, two_t = record("fig9a-capture-truncate"), record("fig9b-twobounce-truncate")
    b_cap, b_two = cap.extras["bounce_times"], two.extras["bounce_times"]
    d_cap = antikink_divergence(cap, cap_t)
    d_two = antikink_divergence(two, two_t)
    h_cap, h_two = abs(cap_t.metrics.delta_h_rel), abs(two_t.metrics.delta_h_rel)
    runtime = sum(r.wall_time for r in (cap, two, cap_t, two_t))
    checks = [
        ("v=0.21", cap.extras["forward_outcome"] == "capture" and abs(b_cap[0] - 33) <= 2,
         f"{cap.extras['forward_outcome']}, t_collide {b_cap[0]:.4g} (33 +- 2)"),
        ("v=0.19622", two.extras["forward_outcome"] == "2-bounce" and abs(b_two[0] - 34) <= 2
         and abs(b_two[1] - 52) <= 2, f"{two.extras['forward_outcome']}, t1 {b_two[0]:.4g}, t2 {b_two[1]:.4g}"),
        ("exact recovery", max(cap.recovery_error, two.recovery_error) < 1e-3,
         f"{cap.recovery_error:.1e}, {two.recovery_error:.1e} (< 1e-3)"),
        ("truncated capture", cap_t.verdict_label == "Captured-again", cap_t.verdict_label),
        ("truncated two-bounce", two_t.verdict_label == "Recovered", two_t.verdict_label),
        ("dH_rel capture", rel_ok(h_cap, 0.0042, 0.5), f"{pct(h_cap)} (0.42% +- 50%)"),
        ("dH_rel two-bounce", rel_ok(h_two, 0.0028, 0.5), f"{pct(h_two)} (0.28% +- 50%)"),
        ("capture divergence", d_cap is not None and d_cap > b_cap[0],
         f"t = {d_cap} on the reversed clock, before the collision at {b_cap[0]:.4g}"),
        ("two-bounce divergence", d_two is not None and d_two < min(b_two[:2]),
         f"t = {d_two}, after the reversed bounces at {b_two[1]:.4g}, {b_two[0]:.4g}"),
        ("runtime", runtime < 900, f"{runtime:.0f} s (< 900 s)"),
    ]
    report(8, "phi^4 kink-antikink suite", checks,
           must_hold=tuple(label for label, _, _ in checks if label != "dH_rel two-bounce"))


def test_criterion_09_integrable_control():
    rec = record("fig8-cubic-control")
    peaks = rec.extras["forward_final_peaks"]
    checks = [
        ("no fusion", peaks >= 2, f"{peaks} peaks at z_f"),
        ("truncated recovery", rec.recovery_error < 0.05, f"{rec.recovery_error:.2e} (< 5%)"),
    ]
    report(9, "integrable control, truncate 13", checks)


def test_criterion_10_burgers():
    rec = record("burgers-merge")
    same = {t: burgers.evolve_exact(burgers.step_down(), t) == burgers.evolve_exact(burgers.ramp_down(F(-1, 2)), t)
            for t in (F(1), F(3, 2), F(2), F(7))}
    before = burgers.evolve_exact(burgers.step_down(), F(1, 2)) != burgers.evolve_exact(burgers.ramp_down(F(-1, 2)),
                                                                                        F(1, 2))
    shocks = [burgers.shock_positions(burgers.evolve_exact(burgers.step_down(), t)) for t in (F(1), F(3))]
    speed = (shocks[1][0] - shocks[0][0]) / 2
    errs, orders = rec.extras["godunov_l1"], rec.extras["godunov_order"]
    checks = [
        ("identical for t >= 1", rec.extras["identical"] and all(same.values()), "t = 1, 3/2, 2, 7"),
        ("distinct before t = 1", before, "t = 1/2"),
        ("Godunov order", all(0.8 <= p <= 1.2 for p in orders), ", ".join(f"{p:.3f}" for p in orders)
         + " (L1 " + ", ".join(f"{e:.2e}" for e in errs) + ")"),
        ("shock speed", speed == F(1, 2), f"{speed} (exactly 1/2)"),
    ]
    report(10, "Burgers strict irreversibility", checks)


def _self_convergence_phi4():
    from revlab.grid import Grid1D
    g = Grid1D.symmetric(32.0, 4096)
    s = waves.kink_antikink_ic(0.21, 8.0, g)
    outs = [phi4.propagate(s, 20.0, dt=g.dx / 4 / 2**j).final.phi.values for j in range(3)]
    return float(np.linalg.norm(outs[0] - outs[1]) / np.linalg.norm(outs[1] - outs[2]))


def test_criterion_11_property_suites():
    fus = record("fig1c-exact")
    cap, two = record("fig7a-capture"), record("fig7b-twobounce")
    cfg = lookup("fig1c-exact")
    params = nls.NlsParams(cfg.solver["epsilon"])
    psi0 = waves.fusion_ic(grid=fus.extras["output"].grid, epsilon=params.epsilon)
    # Hamiltonian: finer steps through the fusion, where the splitting error peaks
    h_run = nls.propagate(psi0, params, 0.45, nls.StepControl(dz=7.5e-6), snapshot_stride=200)
    h = h_run.log[:, 2]
    h_drift = float(np.max(np.abs(h - h[0])) / abs(h[0]))
    out = fus.extras["output"]
    spec = spectral.forward_transform(out)
    parseval = abs(spectral.l2_norm_sq(out) - float(np.sum(spec.intensity) * spec.dk)) / spectral.l2_norm_sq(out)
    ctl = nls.StepControl(dz=1e-4)
    z = 0.1
    a = nls.propagate(waves.galilean(psi0, 0.5, t=0.0), params, z, ctl, 10**9).final
    b = waves.galilean(nls.propagate(psi0, params, z, ctl, 10**9).final, 0.5, t=z)
    galilean = float(np.linalg.norm(a.values - b.values) / np.linalg.norm(b.values))
    rg = RadialGrid(20.0, 4096)
    bp = waves.BlowupParams(1.0)
    blow = nls.propagate(waves.explicit_blowup(bp, 0.0, rg), nls.NlsParams(0.0, "radial-2d"), 0.5,
                         nls.StepControl(dz=1e-4, dz_min=1e-8, adapt=True, cfl_like_factor=0.01), 10**9).final
    ref = waves.explicit_blowup(bp, 0.5, rg)
    blow_err = np.sqrt(spectral.l2_norm_sq(ref.with_values(blow.values - ref.values)) / spectral.l2_norm_sq(ref))
    nls_ratio = nls.self_convergence_ratio(psi0, params, 0.1, 4e-4)
    phi_ratio = _self_convergence_phi4()
    power = max(fus.conserved["forward_power_drift"], fus.conserved["reverse_power_drift"])
    energy = max(cap.conserved["forward_energy_drift"], two.conserved["forward_energy_drift"],
                 cap.conserved["reverse_energy_drift"], two.conserved["reverse_energy_drift"])
    checks = [
        ("power", power < 1e-8, f"{power:.1e} (< 1e-8)"),
        ("Hamiltonian", h_drift < 1e-6, f"{h_drift:.1e} at dz 7.5e-6 to z 0.45 (< 1e-6)"),
        ("phi^4 energy", energy < 1e-5, f"{energy:.1e} (< 1e-5)"),
        ("Parseval", parseval < 1e-12, f"{parseval:.1e} (< 1e-12)"),
        ("NLS round trip", fus.recovery_error < 1e-4, f"{fus.recovery_error:.1e} (< 1e-4)"),
        ("phi^4 round trip", max(cap.recovery_error, two.recovery_error) < 1e-3,
         f"{max(cap.recovery_error, two.recovery_error):.1e} (< 1e-3)"),
        ("Galilean", galilean < 1e-6, f"{galilean:.1e} (< 1e-6)"),
        ("explicit blowup", blow_err < 1e-3, f"{blow_err:.1e} (< 1e-3)"),
        ("NLS dz ratio", 3.5 <= nls_ratio <= 4.5, f"{nls_ratio:.3f} in [3.5, 4.5]"),
        ("phi^4 dt ratio", 3.5 <= phi_ratio <= 4.5, f"{phi_ratio:.3f} in [3.5, 4.5]"),
    ]
    report(11, "property suites", checks)


@known_gap("the literal-cutoff bandlimit reversal has a weak second peak; see the decisions notes")
def test_verdicts_stable_in_eta():
    """Verdicts of every 1D scenario run above agree for eta in [0.05, 0.2]."""
    names = [name for _, name, _ in VERDICT_TABLE] + ["fig1c-exact", "fig8-cubic-control", "fig4a-truncate-1360",
                                                       "fig4b-truncate-1386", "fig4c-truncate-1391",
                                                       "fig4d-truncate-1410"]
    checks = []
    for name in names:
        v = record(name).extras["eta_verdicts"]
        checks.append((name, len(set(v.values())) == 1, "/".join(v[eta] for eta in ETA_RANGE)))
    report("eta", "verdict stability for eta = 0.05, 0.1, 0.2", checks,
           must_hold=tuple(name for name in names if name != "fig1e-bandlimit"))
