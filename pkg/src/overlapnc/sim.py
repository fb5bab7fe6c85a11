"""Scheme evaluation: idealized Monte Carlo, exact success probabilities,
tradeoff sweeps and paired real-codec trials.

The idealized receiver assumes every packet is innovative whenever its
class still has unknowns (rank = min(received, residual)) and that class
tags arrive i.i.d. from the selection distribution. Trial ``i`` of a run
with master seed ``s`` uses its own stream derived from ``(s, i)``, so
results do not depend on how trials are scheduled.
"""

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement

import numpy as np

from . import _kernels
from .codec import DecoderState, SourceData, source_encode
from .schemes import complexity_bound, validate

MAX_STATES = 10**7
CSV_HEADER = [
    "scheme_id", "k", "L", "max_d", "bound", "ops_mean",
    "overhead_mean", "overhead_se", "trials", "seed",
]


class StateSpaceError(RuntimeError):
    """Exact computation would exceed the state-space guard."""


def trial_rng(seed, i):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))


def _chunk(scheme):
    return max(64, scheme.k)


def draw_classes(scheme, rng, size):
    """``size`` i.i.d. class indices from the scheme's distribution."""
    if scheme.is_uniform:
        return rng.integers(0, scheme.L, size=size, dtype=np.int64)
    return rng.choice(scheme.L, size=size, p=np.asarray(scheme.probs)).astype(np.int64)


class IdealReceiver:
    """Counter-only receiver; ``counts`` optionally preloads raw receptions per class."""

    def __init__(self, scheme, counts=None, backend=None):
        self.scheme = scheme
        impl = _kernels.BACKENDS[backend] if backend else _kernels
        self.core = impl.IdealCore(*scheme.csr)
        self.sizes = scheme.sizes
        self.trace = []
        if counts is not None:
            if len(counts) != scheme.L:
                raise ValueError(f"need {scheme.L} counts, got {len(counts)}")
            self.core.load_counts([int(c) for c in counts])

    @property
    def n(self):
        return self.core.n

    @property
    def complete(self):
        return self.core.complete

    @property
    def recovered(self):
        return set(np.flatnonzero(self.core.recovered).tolist())

    @property
    def ideal_mults(self):
        return self.core.mults

    def receive(self, ell):
        return self.core.receive(int(ell))

    def cascade(self):
        """Run the decode loop to its fixed point, recording (class, state) per step."""
        before = self.core.n_recovered
        while True:
            c = self.core.step()
            if c < 0:
                break
            self.trace.append((c, self.display_state()))
        return self.core.n_recovered - before

    def display_state(self):
        """Received rank plus back-substituted members, per class."""
        return tuple(int(x) for x in self.core.rank + self.sizes - self.core.residual)

    def ops_per_symbol(self):
        return Fraction(self.core.mults, self.scheme.k)


def ideal_receive(receiver, ell):
    return receiver.receive(ell)


def ideal_cascade(receiver):
    return receiver.cascade()


def run_trial(scheme, rng, cascade_timing="per-reception", backend=None):
    """One idealized decode; returns (receptions, idealized ops per symbol).

    In terminal mode the cascade runs once on the raw reception counts at
    the moment a decode-as-you-go receiver would have finished. Both
    timings reach the same fixed point, so the stopping time is shared and
    only the decode order (hence the cost) can differ.
    """
    if cascade_timing not in ("per-reception", "terminal"):
        raise ValueError(f"unknown cascade timing {cascade_timing!r}")
    impl = _kernels.BACKENDS[backend] if backend else _kernels
    core = impl.IdealCore(*scheme.csr)
    used = []
    while not core.complete:
        draws = draw_classes(scheme, rng, _chunk(scheme))
        took = core.feed(draws)
        used.append(draws[:took])
    if cascade_timing == "per-reception":
        return core.n, Fraction(core.mults, scheme.k)
    counts = np.bincount(np.concatenate(used), minlength=scheme.L)
    term = impl.IdealCore(*scheme.csr)
    term.load_counts(counts.tolist())
    term.cascade()
    if not term.complete:
        raise AssertionError("terminal cascade disagrees with per-reception decoding")
    return term.n, Fraction(term.mults, scheme.k)


@dataclass
class SimResult:
    scheme_id: str
    k: int
    L: int
    max_d: int
    bound: Fraction
    seed: int
    ns: np.ndarray = field(repr=False)
    ops: np.ndarray = field(repr=False)

    @property
    def trials(self):
        return len(self.ns)

    @property
    def overheads(self):
        return (self.ns - self.k) / self.k

    @property
    def overhead_mean(self):
        return float(self.overheads.mean())

    @property
    def overhead_std(self):
        return float(self.overheads.std(ddof=1)) if self.trials > 1 else 0.0

    @property
    def overhead_se(self):
        return self.overhead_std / math.sqrt(self.trials)

    @property
    def ops_mean(self):
        return float(self.ops.mean())

    @property
    def ops_max(self):
        return float(self.ops.max())

    def row(self):
        return [
            self.scheme_id, self.k, self.L, self.max_d, _fmt(self.bound), _fmt(self.ops_mean),
            _fmt(self.overhead_mean), _fmt(self.overhead_se), self.trials, self.seed,
        ]


TradeoffPoint = SimResult


def _fmt(x):
    return f"{float(x):.10g}"


def expected_overhead_mc(scheme, trials, seed, cascade_timing="per-reception", backend=None):
    if trials < 1:
        raise ValueError("need at least one trial")
    ns = np.empty(trials, dtype=np.int64)
    ops = np.empty(trials, dtype=np.float64)
    for i in range(trials):
        n, o = run_trial(scheme, trial_rng(seed, i), cascade_timing, backend)
        ns[i] = n
        ops[i] = o
    return SimResult(
        scheme.name or f"scheme(k={scheme.k},L={scheme.L})", scheme.k, scheme.L,
        scheme.max_size, complexity_bound(scheme), seed, ns, ops,
    )


def tradeoff_sweep(schemes, trials, seed):
    """One simulated row per scheme, sorted by the complexity bound."""
    schemes = list(schemes)
    if not schemes:
        raise ValueError("empty scheme list")
    for s in schemes:
        problems = validate(s)
        if problems:
            raise ValueError(f"{s.name}: {'; '.join(problems)}")
    rows = [expected_overhead_mc(s, trials, seed) for s in schemes]
    return sorted(rows, key=lambda r: r.bound)


def write_csv(results, fp):
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in results:
        w.writerow(r.row())


def csv_text(results):
    buf = io.StringIO()
    write_csv(results, buf)
    return buf.getvalue()


def _succeeds(scheme, counts, cache):
    key = tuple(counts)
    hit = cache.get(key)
    if hit is None:
        core = _kernels.IdealCore(*scheme.csr)
        core.load_counts(list(key))
        core.cascade()
        hit = cache[key] = core.complete
    return hit


def _guard(scheme):
    states = math.prod(int(d) + 1 for d in scheme.sizes) * 2**scheme.k
    if states > MAX_STATES:
        raise StateSpaceError(f"state space {states} exceeds {MAX_STATES}")


def multiset_success_counts(scheme, n, start_state=None):
    """(successes, total) over unordered class multisets of ``n`` more receptions."""
    _guard(scheme)
    L = scheme.L
    total = math.comb(n + L - 1, n)
    if total > MAX_STATES:
        raise StateSpaceError(f"{total} multisets exceeds {MAX_STATES}")
    start = _start(scheme, start_state)
    cache = {}
    wins = 0
    for combo in combinations_with_replacement(range(L), n):
        counts = list(start)
        for c in combo:
            counts[c] += 1
        wins += _succeeds(scheme, _cap(scheme, counts), cache)
    return wins, total


def _start(scheme, start_state):
    if start_state is None:
        return [0] * scheme.L
    if len(start_state) != scheme.L:
        raise ValueError(f"start state needs {scheme.L} entries")
    return [int(x) for x in start_state]


def _cap(scheme, counts):
    return tuple(min(int(c), int(d)) for c, d in zip(counts, scheme.sizes))


def exact_success_prob(scheme, n, mode="sequential", start_state=None):
    """Exact probability that decoding completes within ``n`` further receptions.

    ``sequential``: class tags i.i.d. from the selection distribution.
    ``multiset``: every unordered multiset of n tags equally likely.
    """
    if mode == "multiset":
        wins, total = multiset_success_counts(scheme, n, start_state)
        return Fraction(wins, total)
    if mode != "sequential":
        raise ValueError(f"unknown mode {mode!r}")
    _guard(scheme)
    probs = scheme.exact_probs()
    sizes = [int(d) for d in scheme.sizes]
    dist = {_cap(scheme, _start(scheme, start_state)): Fraction(1)}
    for _ in range(n):
        nxt = defaultdict(Fraction)
        for st, pr in dist.items():
            for ell, pl in enumerate(probs):
                if not pl:
                    continue
                if st[ell] < sizes[ell]:
                    st2 = st[:ell] + (st[ell] + 1,) + st[ell + 1:]
                else:
                    st2 = st
                nxt[st2] += pr * pl
        dist = nxt
    cache = {}
    return sum((pr for st, pr in dist.items() if _succeeds(scheme, st, cache)), Fraction(0))


@dataclass
class CodecTrial:
    n: int
    n_ideal: int
    exact: bool
    ops_measured: float
    ops_ideal: Fraction
    decode_order: list
    packets: list = field(default=None, repr=False)


def trial_source(scheme, m, rng):
    """The source data a codec trial driven by ``rng`` encodes."""
    return SourceData.random(scheme.k, m, rng.spawn(3)[0])


def codec_trial(scheme, m, rng, relay=False, max_receptions=None, keep_packets=False):
    """End-to-end GF(256) decode, paired with an idealized receiver.

    The idealized receiver sees the same sequence of class tags as the real
    one (topped up with fresh draws if it needs more), so the overhead gap
    isolates linear-dependence losses. With ``relay`` the receiver hears a
    recoding intermediate node that itself listens to the source.
    """
    data_rng, draw_rng, coef_rng = rng.spawn(3)
    k = scheme.k
    limit = max_receptions or 100 * k + 1000
    data = SourceData.random(k, m, data_rng)
    rx = DecoderState(scheme, m)
    mid = DecoderState(scheme, m) if relay else None
    tags = []
    kept = [] if keep_packets else None
    while not rx.complete:
        for ell in draw_classes(scheme, draw_rng, _chunk(scheme)):
            p = source_encode(data, scheme, int(ell), coef_rng)
            if relay:
                if mid.receive(p):
                    mid.decode_cascade()
                p = mid.emit(coef_rng)
            tags.append(p.class_index)
            if keep_packets:
                kept.append(p)
            if rx.receive(p):
                rx.decode_cascade()
            if rx.complete:
                break
            if rx.n >= limit:
                raise RuntimeError(f"no decode after {limit} receptions")
    core = _kernels.IdealCore(*scheme.csr)
    core.feed(np.asarray(tags, dtype=np.int64))
    while not core.complete:
        core.feed(draw_classes(scheme, draw_rng, _chunk(scheme)))
    return CodecTrial(
        rx.n, core.n, bool(np.array_equal(rx.data, data.packets)),
        rx.ops_per_symbol(), rx.ideal_ops_per_symbol(), list(rx.decode_order), kept,
    )


@dataclass
class ConsistencyResult:
    trials: int
    all_exact: bool
    real_overhead_mean: float
    ideal_overhead_mean: float
    max_ideal_ops: float
    bound: Fraction

    @property
    def gap(self):
        return self.real_overhead_mean - self.ideal_overhead_mean


def codec_consistency(scheme, trials, m, seed, relay=False):
    real, ideal, ops = [], [], []
    exact = True
    for i in range(trials):
        t = codec_trial(scheme, m, trial_rng(seed, i), relay=relay)
        exact &= t.exact
        real.append(t.n)
        ideal.append(t.n_ideal)
        ops.append(t.ops_ideal)
    k = scheme.k
    return ConsistencyResult(
        trials, exact, (np.mean(real) - k) / k, (np.mean(ideal) - k) / k,
        float(max(ops)), complexity_bound(scheme),
    )
