"""Time the compiled kernels against the numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each kernel runs on the same inputs under both backends; the script also
reports the largest difference between the two results.
"""

import argparse
import timeit

import numpy as np

from revlab import kernels
from revlab.grid import Grid1D, RadialGrid
from revlab.waves import radial_operator


def _cases(rng):
    n = 2**14
    psi = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) * 3.0
    rgrid = RadialGrid(30.0, 4096)
    lower, diag, upper = radial_operator(rgrid)
    r = rgrid.r
    psi_r = (9.0 * np.exp(-r**2)).astype(complex)
    g = Grid1D(-32.0, 32.0, 4096)
    phi = np.tanh((g.x + 8) / np.sqrt(2)) - np.tanh((g.x - 8) / np.sqrt(2)) - 1.0
    pi = np.zeros_like(phi)
    u = np.where(np.linspace(-2, 4, 2048) < 0, 1.0, 0.0)

    def phase(mod):
        a = psi.copy()
        return lambda: mod.nonlinear_phase(a, 1e-3, 1e-4), lambda: a

    def crank(mod):
        a = psi_r.copy()
        wc, wd = np.empty_like(a), np.empty_like(a)
        return lambda: mod.cn_radial_step(a, lower, diag, upper, 1e-4, wc, wd), lambda: a

    def leapfrog(mod):
        p, q = phi.copy(), pi.copy()
        return lambda: mod.leapfrog_phi4(p, q, g.dx / 4, g.dx, 50), lambda: p

    def godunov(mod):
        a = u.copy()
        return lambda: mod.godunov_burgers(a, 0.5, 50), lambda: a

    def shoot(mod):
        out = np.empty(8192)
        return lambda: mod.radial_shoot(28.0, 148.0, 1e-3, 0.005, out), lambda: out

    return {"nonlinear_phase (n=16384)": phase, "cn_radial_step (n=4096)": crank,
            "leapfrog_phi4 (50 steps, n=4096)": leapfrog, "godunov_burgers (50 steps, n=2048)": godunov,
            "radial_shoot (n=8192)": shoot}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if not kernels.compiled_available():
        raise SystemExit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
    rng = np.random.default_rng(0)
    backends = {name: kernels.get_backend(name) for name in ("python", "cython")}
    print(f"{'kernel':36s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speed-up':>9s} {'max diff':>10s}")
    for label, make in _cases(rng).items():
        times, results = {}, {}
        for name, mod in backends.items():
            call, result = make(mod)
            call()  # warm up
            times[name] = min(timeit.repeat(call, number=1, repeat=args.repeat)) * 1e3
            call, result = make(mod)
            call()
            results[name] = np.array(result())
        diff = float(np.max(np.abs(results["python"] - results["cython"])))
        print(f"{label:36s} {times['python']:12.3f} {times['cython']:12.3f} "
              f"{times['python'] / times['cython']:9.1f} {diff:10.2e}")


if __name__ == "__main__":
    main()
