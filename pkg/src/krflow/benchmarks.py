"""Timing comparison of the kernel backends.

Run as ``python -m krflow.benchmarks``. Times the stencil derivative and the
RK4 flow step for every available backend and reports the speedup of the
compiled extension over the numpy fallback, after checking that both produce
the same numbers.
"""

import argparse
import time

import numpy as np

from ._kernels import available_backends, get_backend
from .calculus import build_grid


def _flow_inputs(grid_size, n=1):
    g = build_grid(grid_size)
    phi = 0.2 * g.x + 0.05 * g.x ** 2
    shift = np.zeros(g.size + 1)
    return g, phi, shift, n


def _time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run_benchmark(grid_size=1024, steps=2000, repeat=3, out=print):
    g, phi, shift, n = _flow_inputs(grid_size)
    backends = {name: get_backend(name) for name in available_backends()}

    reference = {}
    for name, mod in backends.items():
        deriv = mod.d_dx(phi, g.dx)
        stepped, ok = mod.rk4_step(phi, 1e-5, shift, g.x, g.xm, g.omx, g.dx, n)
        assert ok
        reference[name] = (deriv, stepped)
    names = list(backends)
    if len(names) == 2:
        da = np.abs(reference[names[0]][0] - reference[names[1]][0]).max()
        ds = np.abs(reference[names[0]][1] - reference[names[1]][1]).max()
        out(f"backend agreement: max |d_dx diff| = {da:.3e}, max |rk4 diff| = {ds:.3e}")

    results = {}
    for name, mod in backends.items():
        def bench_d_dx(mod=mod):
            for _ in range(steps):
                mod.d_dx(phi, g.dx)

        def bench_rk4(mod=mod):
            state = phi
            for _ in range(steps):
                state, ok = mod.rk4_step(state, 1e-6, shift, g.x, g.xm, g.omx, g.dx, n)
                assert ok

        t_deriv = _time(bench_d_dx, repeat) / steps
        t_step = _time(bench_rk4, repeat) / steps
        results[name] = (t_deriv, t_step)
        out(f"{name:>7}: d_dx {t_deriv * 1e6:8.2f} us/call   rk4_step {t_step * 1e6:8.2f} us/step"
            f"   (grid {grid_size}, {steps} calls)")

    if "python" in results and "cython" in results:
        out(f"speedup cython/python: d_dx x{results['python'][0] / results['cython'][0]:.1f}, "
            f"rk4_step x{results['python'][1] / results['cython'][1]:.1f}")
    return results


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=1024)
    parser.add_argument("--steps", type=int, default=2000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    run_benchmark(grid_size=args.grid, steps=args.steps, repeat=args.repeat)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
