"""Pick L and the big-class size for the k=1024 mixed presets.

For each class size d, scan L over [L0, 2*L0] and the big class over
{256, 512}, keep the mixed code with the lowest mean overhead, and report
it next to its base grid. Uses its own seed so the acceptance run stays an
independent check.

    python benchmarks/tune_fig4.py [--trials 300] [--seed 12345]
"""

import argparse

from overlapnc.presets import grid
from overlapnc.schemes import make_mixed
from overlapnc.sim import expected_overhead_mc


def tune(k, d, trials, seed, bigs=(256, 512)):
    L0 = k // d
    best = None
    for big in bigs:
        for L in range(L0, 2 * L0 + 1, max(1, L0 // 16)):
            mixed = make_mixed(grid(k, d, L), big, seed)
            ov = expected_overhead_mc(mixed, trials, seed).overhead_mean
            if best is None or ov < best[0]:
                best = (ov, L, big)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, default=1024)
    ap.add_argument("--trials", type=int, default=300)
    ap.add_argument("--seed", type=int, default=12345)
    args = ap.parse_args()
    for d in (32, 64, 128):
        ov, L, big = tune(args.k, d, args.trials, args.seed)
        base = expected_overhead_mc(grid(args.k, d, L), args.trials, args.seed).overhead_mean
        print(f"d={d:4d}  L={L:3d}  big={big:4d}  mixed {ov:.4f}  base {base:.4f}  "
              f"({100 * (ov / base - 1):+.1f}%)")


if __name__ == "__main__":
    main()
