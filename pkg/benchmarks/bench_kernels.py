"""Compare the compiled and pure-Python kernels.

    python benchmarks/bench_kernels.py [--trials N]
"""

import argparse
import time

import numpy as np

from overlapnc import _kernels, presets
from overlapnc.ffield import INV, MUL
from overlapnc.schemes import make_chunked
from overlapnc.sim import expected_overhead_mc


def timed(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_rref(impl, k, m, reps):
    rng = np.random.default_rng(0)
    mats = [rng.integers(0, 256, size=(k, k + m), dtype=np.uint8) for _ in range(reps)]

    def run():
        for M in mats:
            impl.gf_rref(M.copy(), k, MUL, INV)

    return timed(run) / reps


def bench_ideal(backend, scheme, trials):
    return timed(lambda: expected_overhead_mc(scheme, trials, seed=1, backend=backend)) / trials


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=50)
    args = ap.parse_args()
    names = sorted(_kernels.BACKENDS)
    if "cython" not in names:
        print("compiled extension not built; only the Python kernels are available")
    print(f"{'case':44s}" + "".join(f"{n:>14s}" for n in names) + "   speedup")
    cases = []
    for k, m in [(16, 64), (64, 64)]:
        reps = 20 if k == 16 else 3
        cases.append((f"rref {k}x{k + m}",
                      [bench_rref(_kernels.BACKENDS[n], k, m, reps) for n in names]))
    for s in [make_chunked(1000, 25), presets.grid(1000, 50, 28), presets.fig4_pairs()[0][0]]:
        cases.append((f"ideal trial {s.name[:32]}",
                      [bench_ideal(n, s, args.trials) for n in names]))
    for label, times in cases:
        row = f"{label:44s}" + "".join(f"{t * 1e3:12.3f}ms" for t in times)
        if len(times) == 2:
            row += f"   {times[1] / times[0]:7.1f}x"
        print(row)


if __name__ == "__main__":
    main()
