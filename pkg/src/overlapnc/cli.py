"""Command-line front end.

Exit codes: 0 ok, 1 I/O or unreadable input, 2 invalid scheme or
parameters, 3 state-space/runtime guard, 4 verification failure.
"""

import argparse
import contextlib
import sys
from fractions import Fraction

import numpy as np

from . import presets
from .codec import DecoderState, InconsistentSystemError, PacketError, WireFormatError
from .codec import decode_stream, encode_stream
from .schemes import (
    SchemeError, complexity_bound, header_cost, load_scheme, make_chunked,
    make_diag_grid, make_diag_grid_angle, make_mixed, make_random_layer,
    make_rect_grid, overlap_report, save_scheme, validate,
)
from .sim import (
    StateSpaceError, codec_consistency, codec_trial, exact_success_prob,
    expected_overhead_mc, multiset_success_counts, trial_rng, trial_source,
    tradeoff_sweep, write_csv,
)

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_GUARD, EXIT_VERIFY = 0, 1, 2, 3, 4
VERIFY_MAX_K = 256


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _ints(text):
    return [int(x) for x in text.replace(" ", "").split(",") if x]


def _load(path, invalid_code=EXIT_INVALID):
    try:
        scheme = load_scheme(path)
    except (OSError, SchemeError) as e:
        raise CliError(EXIT_IO, f"cannot read scheme {path}: {e}")
    problems = validate(scheme)
    if problems:
        raise CliError(invalid_code, "invalid scheme:\n  " + "\n  ".join(problems))
    return scheme


def _need(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise CliError(EXIT_INVALID, f"{args.kind} needs --{', --'.join(missing)}")


def _open_out(path):
    if path in (None, "-"):
        return contextlib.nullcontext(sys.stdout)
    return open(path, "w", newline="")


def cmd_gen(args):
    kind = args.kind
    try:
        if kind == "chunked":
            _need(args, "k", "d")
            scheme = make_chunked(args.k, args.d)
        elif kind == "rect-grid":
            _need(args, "k", "d", "d2")
            scheme = make_rect_grid(args.k, args.d, args.d2)
        elif kind == "diag-grid":
            _need(args, "k", "d", "L")
            if args.angles is not None:
                scheme = make_diag_grid(args.k, args.d, args.L, _ints(args.angles))
            else:
                scheme = make_diag_grid_angle(args.k, args.d, args.L, args.angle)
        elif kind == "random-layer":
            _need(args, "k", "d", "L", "seed")
            scheme = make_random_layer(args.k, args.d, args.L, args.seed)
        else:
            _need(args, "base", "big", "seed")
            base = _load(args.base)
            scheme = make_mixed(base, args.big, args.seed, d_min=args.d_min)
    except SchemeError as e:
        raise CliError(EXIT_INVALID, f"invalid parameters: {e}")
    problems = validate(scheme)
    if problems:
        raise CliError(EXIT_INVALID, "invalid scheme:\n  " + "\n  ".join(problems))
    small = [p for p in validate(scheme, args.d_min) if "d_min" in p]
    try:
        if args.out in (None, "-"):
            sys.stdout.write(scheme.to_json() + "\n")
        else:
            save_scheme(scheme, args.out)
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot write {args.out}: {e}")
    report = overlap_report(scheme)
    log = sys.stderr if args.out in (None, "-") else sys.stdout
    bound = complexity_bound(scheme)
    print(f"{scheme.name}: k={scheme.k} L={scheme.L} max_d={scheme.max_size}", file=log)
    print(f"complexity bound: {bound} (~{float(bound):.4g} ops/symbol)", file=log)
    print(f"header cost (q=256): {header_cost(scheme)} symbols/packet", file=log)
    print(f"overlap: {report.summary()}", file=log)
    if small:
        print(f"warning: {len(small)} classes below d_min={args.d_min}", file=log)
    return EXIT_OK


def cmd_simulate(args):
    scheme = _load(args.scheme, invalid_code=EXIT_IO)
    result = expected_overhead_mc(scheme, args.trials, args.seed, args.timing)
    try:
        with _open_out(args.out) as fp:
            write_csv([result], fp)
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot write {args.out}: {e}")
    return EXIT_OK


def cmd_exact(args):
    scheme = _load(args.scheme)
    start = _ints(args.start) if args.start else None
    try:
        if args.mode == "multiset":
            wins, total = multiset_success_counts(scheme, args.n, start)
            p, q, value = wins, total, Fraction(wins, total)
        else:
            value = exact_success_prob(scheme, args.n, "sequential", start)
            p, q = value.numerator, value.denominator
    except StateSpaceError as e:
        raise CliError(EXIT_GUARD, str(e))
    except ValueError as e:
        raise CliError(EXIT_INVALID, str(e))
    print(f"{p}/{q}")
    print(f"{float(value):.12g}")
    return EXIT_OK


def cmd_tradeoff(args):
    if args.preset:
        schemes = presets.PRESETS[args.preset]()
    else:
        schemes = [_load(p, invalid_code=EXIT_IO) for p in args.scheme or []]
    if not schemes:
        raise CliError(EXIT_IO, "no schemes given (use --preset or --scheme)")
    try:
        rows = tradeoff_sweep(schemes, args.trials, args.seed)
    except ValueError as e:
        raise CliError(EXIT_IO, str(e))
    bad = [r.scheme_id for r in rows if r.ops_max > r.bound]
    if bad:
        raise CliError(EXIT_VERIFY, f"complexity bound exceeded by {bad}")
    try:
        with _open_out(args.out) as fp:
            write_csv(rows, fp)
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot write {args.out}: {e}")
    return EXIT_OK


def _check(ok, label, failures):
    print(f"{'PASS' if ok else 'FAIL'}  {label}")
    if not ok:
        failures.append(label)


def cmd_verify(args):
    scheme = _load(args.scheme)
    if scheme.k > VERIFY_MAX_K:
        raise CliError(EXIT_GUARD, f"k={scheme.k} exceeds verify limit {VERIFY_MAX_K}")
    bound = complexity_bound(scheme)
    failures = []
    if args.stream:
        return _verify_stream(args, scheme, bound)
    trial = codec_trial(scheme, args.m, trial_rng(args.seed, 0), relay=not args.no_relay,
                        keep_packets=bool(args.write_stream))
    hops = "source -> receiver" if args.no_relay else "source -> recoding relay -> receiver"
    _check(trial.exact, f"exact recovery over {hops} (n={trial.n})", failures)
    _check(trial.ops_ideal <= bound,
           f"idealized ops/symbol {float(trial.ops_ideal):.4g} <= bound {float(bound):.4g}",
           failures)
    print(f"measured ops/symbol {trial.ops_measured:.4g}")
    if args.write_stream:
        try:
            with open(args.write_stream, "wb") as f:
                f.write(encode_stream(args.m, trial.packets))
        except OSError as e:
            raise CliError(EXIT_IO, f"cannot write {args.write_stream}: {e}")
        print(f"wrote {len(trial.packets)} packets to {args.write_stream}")
    if args.trials:
        res = codec_consistency(scheme, args.trials, args.m, args.seed + 1)
        _check(res.all_exact, f"exact recovery in {res.trials} direct trials", failures)
        _check(res.max_ideal_ops <= bound, "idealized ops within bound in every trial", failures)
        print(f"real overhead {res.real_overhead_mean:.4f}, idealized "
              f"{res.ideal_overhead_mean:.4f}, gap {res.gap:+.4f}")
    return EXIT_VERIFY if failures else EXIT_OK


def _verify_stream(args, scheme, bound):
    try:
        with open(args.stream, "rb") as f:
            m, packets = decode_stream(f.read(), scheme)
    except OSError as e:
        raise CliError(EXIT_IO, f"cannot read {args.stream}: {e}")
    except WireFormatError as e:
        raise CliError(EXIT_VERIFY, f"FAIL  malformed stream: {e}")
    source = trial_source(scheme, m, trial_rng(args.seed, 0))
    rx = DecoderState(scheme, m)
    try:
        for p in packets:
            if rx.receive(p):
                rx.decode_cascade()
    except (InconsistentSystemError, PacketError) as e:
        print(f"FAIL  {e}")
        return EXIT_VERIFY
    failures = []
    _check(rx.complete, f"stream of {len(packets)} packets decodes completely", failures)
    if rx.complete:
        _check(bool(np.array_equal(rx.data, source.packets)), "recovered data matches source",
               failures)
        _check(rx.ideal_ops_per_symbol() <= bound, "idealized ops within bound", failures)
    return EXIT_VERIFY if failures else EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="overlapnc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="build a scheme and write it as JSON")
    g.add_argument("kind", choices=["chunked", "rect-grid", "diag-grid", "random-layer", "mixed"])
    g.add_argument("--k", type=int)
    g.add_argument("--d", type=int)
    g.add_argument("--d2", "--d-prime", dest="d2", type=int, help="rows of a rect grid")
    g.add_argument("--L", type=int)
    g.add_argument("--angle", type=int, default=1)
    g.add_argument("--angles", help="explicit comma-separated angle set")
    g.add_argument("--base", help="base scheme JSON for mixed codes")
    g.add_argument("--big", type=int, help="size of the extra random class")
    g.add_argument("--seed", type=int)
    g.add_argument("--d-min", type=int, default=presets.D_MIN)
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("simulate", help="idealized Monte Carlo for one scheme")
    s.add_argument("scheme")
    s.add_argument("--trials", type=int, default=1000)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--timing", choices=["per-reception", "terminal"], default="per-reception")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("exact", help="exact probability of decoding within n receptions")
    e.add_argument("scheme")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--mode", choices=["sequential", "multiset"], default="sequential")
    e.add_argument("--start", help="comma-separated receptions already held per class")
    e.set_defaults(func=cmd_exact)

    t = sub.add_parser("tradeoff", help="complexity/overhead sweep to CSV")
    t.add_argument("--preset", choices=sorted(presets.PRESETS))
    t.add_argument("--scheme", action="append", help="scheme JSON (repeatable)")
    t.add_argument("--trials", type=int, default=200)
    t.add_argument("--seed", type=int, required=True)
    t.add_argument("--out")
    t.set_defaults(func=cmd_tradeoff)

    v = sub.add_parser("verify", help="end-to-end GF(256) codec round trip")
    v.add_argument("scheme")
    v.add_argument("--m", type=int, default=64)
    v.add_argument("--seed", type=int, required=True)
    v.add_argument("--trials", type=int, default=20, help="paired real/idealized trials")
    v.add_argument("--no-relay", action="store_true")
    v.add_argument("--write-stream", help="save the receiver's packet stream")
    v.add_argument("--stream", help="decode this packet stream instead of simulating")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as e:
        print(str(e), file=sys.stderr)
        return e.code


if __name__ == "__main__":
    sys.exit(main())
