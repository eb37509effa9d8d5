"""Compare the compiled and pure-numpy integration kernels.

Usage: python benchmarks/bench_kernels.py [--N 32] [--steps 20000]
"""

import argparse
import time

import numpy as np

from mljtoda import _fallback, chain
from mljtoda.potentials import Fpu, NormalizedMlj, Toda

try:
    from mljtoda import _kernels
except ImportError:
    _kernels = None


def time_kernel(mod, p, N, steps, tangent):
    s = chain.sample_state(N, 0.1, "fixed", seed=0)
    kind, params = p.kernel_spec()
    x, q = s.positions.copy(), s.momenta.copy()
    n = len(x)
    t0 = time.perf_counter()
    if tangent:
        dx, dq = np.ones(n) / np.sqrt(2 * n), np.ones(n) / np.sqrt(2 * n)
        mod.integrate_tangent(x, q, dx, dq, kind, params, False, 0.0, 1.0, 0.02, 1, steps, 10,
                              np.zeros(0, dtype=np.int64), np.zeros(0), 0.0)
    else:
        mod.integrate(x, q, kind, params, False, 0.0, 1.0, 0.02, 1, steps)
    return (time.perf_counter() - t0) / steps * 1e6


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=32)
    ap.add_argument("--steps", type=int, default=20000)
    args = ap.parse_args()
    mods = [("python", _fallback)] + ([("cython", _kernels)] if _kernels else [])
    print(f"Yoshida4 steps, N={args.N}, microseconds per step")
    print(f"{'potential':<22}{'kernel':<10}" + "".join(f"{m:>12}" for m, _ in mods) + f"{'speedup':>10}")
    for p in (Toda(), NormalizedMlj(96, 6), Fpu(-1, 2)):
        for tangent in (False, True):
            # the fallback is slow; time it on fewer steps
            times = [time_kernel(mod, p, args.N, args.steps if name == "cython" else
                                 max(200, args.steps // 50), tangent) for name, mod in mods]
            speed = f"{times[0] / times[-1]:>9.0f}x" if len(times) > 1 else ""
            label = "tangent" if tangent else "state"
            print(f"{p.name:<22}{label:<10}" + "".join(f"{t:>12.2f}" for t in times) + speed)


if __name__ == "__main__":
    main()
