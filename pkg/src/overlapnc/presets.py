"""Scheme sets for the tradeoff experiments.

``fig3``: k=1000, every chunked code with d >= 25 plus diagonal grids with
L in {28, 12, 9, 2}. ``fig4-desk``: k=1024 stand-ins for the k=4096 mixed
codes (grid + one large random class). These are desk-scale approximations,
not reproductions. The L of each mixed code was picked by
``benchmarks/tune_fig4.py`` (seed 12345, 300 trials, L in [L0, 2*L0]).
"""

import math

from .schemes import make_chunked, make_diag_grid_angle, make_mixed

D_MIN = 25

# (L, d) for k=1000
FIG3_GRIDS = [(28, 50), (12, 100), (9, 125), (2, 500)]
# (d, L, big class size) for k=1024
FIG4_DESK = [(32, 46, 512), (64, 20, 256), (128, 8, 256)]
MIXED_SEED = 7


def default_angle(L0):
    """Largest angle <= L0/2 coprime with L0 (0 for a single chunk)."""
    cands = [t for t in range(1, L0 // 2 + 1) if math.gcd(t, L0) == 1]
    return max(cands) if cands else 0


def grid(k, d, L):
    return make_diag_grid_angle(k, d, L, default_angle(k // d))


def chunked_sweep(k, d_min=D_MIN):
    return [make_chunked(k, d) for d in range(d_min, k + 1) if k % d == 0]


def fig3_pairs(k=1000):
    """(diagonal grid, chunked code of the same class size) per grid preset."""
    return [(grid(k, d, L), make_chunked(k, d)) for L, d in FIG3_GRIDS]


def fig3(k=1000):
    return chunked_sweep(k) + [g for g, _ in fig3_pairs(k)]


def fig4_pairs(k=1024, seed=MIXED_SEED):
    """(mixed code, its base grid) per desk-scale configuration."""
    out = []
    for d, L, big in FIG4_DESK:
        base = grid(k, d, L)
        out.append((make_mixed(base, big, seed, d_min=D_MIN), base))
    return out


def fig4_desk(k=1024, seed=MIXED_SEED):
    pairs = fig4_pairs(k, seed)
    return chunked_sweep(k) + [b for _, b in pairs] + [m for m, _ in pairs]


PRESETS = {"fig3": fig3, "fig4-desk": fig4_desk}
