"""Benchmark: compiled Cython kernel vs pure-numpy fallback.

Times the two hot entry points (forward propagation and the synthesis
objective+gradient) on gate-sized workloads and checks that the backends
agree to solver precision.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from quditswap._kernels import _reference

try:
    from quditswap._kernels import _core
except ImportError:
    _core = None


def workload(n, duration_ns, units_per_ns=500, seed=0):
    rng = np.random.default_rng(seed)
    h = np.diag(-0.5 * 1.382 * (np.arange(n) ** 2 - np.arange(n))).astype(complex)
    a = np.diag(np.sqrt(np.arange(1.0, n)), 1)
    x = (a + a.T).astype(complex)
    y = 1j * (a - a.T)
    m = int(duration_ns * units_per_ns)
    p = rng.normal(scale=0.15, size=m)
    q = rng.normal(scale=0.15, size=m)
    target = np.eye(n, dtype=complex)
    target[0, 0] = target[n - 2, n - 2] = 0.0
    target[0, n - 2] = target[n - 2, 0] = 1.0
    return h, x, y, p, q, 1.0 / units_per_ns, target


def timed(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    if _core is None:
        print("compiled kernel not available; showing the fallback only")

    print(f"{'case':<38}{'reference':>12}{'compiled':>12}{'speedup':>9}")
    for n, tau in [(5, 140.0), (6, 215.0)]:
        h, x, y, p, q, dt, target = workload(n, tau)
        cases = {
            f"evolve      N={n} tau={tau:.0f}ns ({len(p)} units)": lambda mod: mod.evolve(
                h, x, y, p, q, dt
            ),
            f"gate_grad   N={n} tau={tau:.0f}ns ({len(p)} units)": lambda mod: mod.gate_grad(
                h, x, y, p, q, dt, 2, target, n - 1, 1.0
            ),
        }
        for label, call in cases.items():
            t_ref, out_ref = timed(lambda: call(_reference), args.repeat)
            if _core is None:
                print(f"{label:<38}{t_ref:>10.3f}s{'-':>12}{'-':>9}")
                continue
            t_com, out_com = timed(lambda: call(_core), args.repeat)
            agree = np.max(np.abs(np.asarray(out_ref[0]) - np.asarray(out_com[0])))
            assert agree < 1e-10, f"backend disagreement {agree:.2e} in {label}"
            print(f"{label:<38}{t_ref:>10.3f}s{t_com:>10.3f}s{t_ref / t_com:>8.1f}x")
    if _core is not None:
        print("backends agree to < 1e-10 on all cases")


if __name__ == "__main__":
    main()
