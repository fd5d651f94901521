"""Command-line front end: ``ictgen <command> ...``.

Every command writes plain UTF-8 CSV / text so results can be plotted
elsewhere. The default config comes from ``--config``, then the
``ICTGEN_CONFIG`` environment variable, then the built-in defaults.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import secrets
import sys
import time
from pathlib import Path

from . import __version__
from .config import EXPONENTIAL, PIECEWISE, DEFAULTS
from .epidemic import (
    CENTRALITY,
    RANDOM,
    blacklist_experiment,
    centrality_vector,
    epidemic_experiment,
    start_time_experiment,
)
from .errors import IctgenError
from .pairgen import generate_trace
from .persistence import load_config, read_trace, write_trace
from .stats import (
    aggregate_ccdf,
    compare_ccdf,
    periodicity_score,
    read_ccdf_csv,
    write_ccdf_csv,
)

log = logging.getLogger("ictgen")

CONFIG_ENV = "ICTGEN_CONFIG"


def parse_duration(text: str) -> int:
    """``"3600"``, ``"90m"``, ``"24h"`` or ``"6d"`` -> seconds."""
    text = text.strip().lower()
    scale = {"s": 1, "m": 60, "h": 3600, "d": 86400}.get(text[-1:])
    try:
        if scale:
            return int(round(float(text[:-1]) * scale))
        return int(round(float(text)))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad duration {text!r}") from None


def parse_time_of_day(text: str) -> int:
    """``"06:00"`` or ``"6:30"`` -> seconds after midnight."""
    try:
        hh, _, mm = text.partition(":")
        seconds = int(hh) * 3600 + int(mm or 0) * 60
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad time of day {text!r}") from None
    if not 0 <= seconds < 86400:
        raise argparse.ArgumentTypeError(f"time of day out of range: {text!r}")
    return seconds


def _resolve_seed(seed):
    if seed is None:
        seed = secrets.randbits(63)
        print(f"seed={seed}", file=sys.stderr)
    return seed


def _write_curve(curve, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_seconds", "fraction"])
        for t, f in zip(curve.t.tolist(), curve.fraction.tolist()):
            w.writerow([t, repr(f)])


def _load_trace(path):
    if not Path(path).is_file():
        raise IctgenError(f"no such trace file: {path}")
    return read_trace(path)


# --- commands -----------------------------------------------------------------


def cmd_generate(args) -> int:
    config_path = args.config or os.environ.get(CONFIG_ENV)
    if config_path:
        if not Path(config_path).is_file():
            raise IctgenError(f"no such config file: {config_path}")
        config = load_config(config_path)
    else:
        config = DEFAULTS.with_(seed=None)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.no_periodic:
        changes["periodic"] = False
    if args.variant:
        changes["variant"] = args.variant
    config = config.with_(**changes)
    if config.seed is None:
        config = config.with_(seed=_resolve_seed(None))
    started = time.perf_counter()
    trace, _ = generate_trace(config, workers=args.workers)
    nbytes = write_trace(trace, args.out)
    elapsed = time.perf_counter() - started
    print(f"events={len(trace)} bytes={nbytes} seconds={elapsed:.3f}")
    return 0


def cmd_analyze(args) -> int:
    trace = _load_trace(args.trace)
    n_pairs = trace.n_users * (trace.n_users - 1) // 2
    summary = {
        "events": len(trace),
        "pairs_with_contacts": len(trace.by_pair),
        "zero_contact_fraction": 1.0 - len(trace.by_pair) / n_pairs,
    }
    try:
        ccdf = aggregate_ccdf(trace)
    except IctgenError as exc:
        ccdf = None
        log.warning("%s", exc)
    if ccdf is not None:
        summary["ict_samples"] = len(trace) - len(trace.by_pair)
        if args.ccdf_out:
            write_ccdf_csv(ccdf, args.ccdf_out)
        try:
            summary["periodicity_score"] = periodicity_score(trace, args.tail_threshold)
        except IctgenError as exc:
            log.warning("periodicity: %s", exc)
    print(json.dumps(summary, sort_keys=True))
    return 0


def cmd_compare(args) -> int:
    model = aggregate_ccdf(_load_trace(args.trace))
    if args.reference_ccdf:
        reference = read_ccdf_csv(args.reference_ccdf)
    elif args.reference_trace:
        reference = aggregate_ccdf(_load_trace(args.reference_trace))
    else:
        raise IctgenError("give a reference trace or --reference-ccdf")
    report = compare_ccdf(model, reference, args.points)
    out = json.dumps(report.as_dict(), sort_keys=True)
    if args.out:
        Path(args.out).write_text(out + "\n", encoding="utf-8")
    print(out)
    return 0


def cmd_epidemic(args) -> int:
    trace = _load_trace(args.trace)
    seed = _resolve_seed(args.seed)
    curve = epidemic_experiment(trace, args.runs, seed, args.time_of_day, args.horizon, args.workers)
    _write_curve(curve, args.out)
    return 0


def cmd_centrality(args) -> int:
    trace = _load_trace(args.trace)
    values = centrality_vector(trace, args.horizon)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["user_id", "centrality"])
        for u, c in enumerate(values):
            w.writerow([u, repr(c)])
    return 0


def cmd_blacklist(args) -> int:
    trace = _load_trace(args.trace)
    seed = _resolve_seed(args.seed)
    for mode in (CENTRALITY, RANDOM):
        curve = blacklist_experiment(
            trace, args.k, mode, args.runs, seed, horizon=args.horizon,
            time_of_day=args.time_of_day, centrality_horizon=args.centrality_horizon,
            blacklist_receives=not args.isolate, workers=args.workers,
        )
        _write_curve(curve, f"{args.out_prefix}_{mode}.csv")
    return 0


def cmd_start_times(args) -> int:
    trace = _load_trace(args.trace)
    seed = _resolve_seed(args.seed)
    curves = start_time_experiment(trace, args.times, args.runs, seed, args.horizon, args.workers)
    for tod, curve in zip(args.times, curves):
        _write_curve(curve, f"{args.out_prefix}_{tod // 3600:02d}{tod % 3600 // 60:02d}.csv")
    return 0


def cmd_validate(args) -> int:
    try:
        trace = _load_trace(args.trace)
    except IctgenError as exc:
        print(f"INVALID: {exc}")
        return 1
    g = trace.meta.granularity
    short = sum(1 for spans in trace.by_pair.values()
                for (_, e1), (s2, _) in zip(spans, spans[1:]) if s2 - e1 < g)
    if short:
        print(f"INVALID: {short} intercontact times below the granularity")
        return 1
    print(f"OK: {len(trace)} events, {len(trace.by_pair)} pairs, n_users={trace.n_users}, "
          f"span={trace.T_duration}s")
    return 0


# --- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ictgen", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def runs_seed(sp, runs=200):
        sp.add_argument("--runs", type=int, default=runs)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=int, default=1)

    g = sub.add_parser("generate", help="generate a contact trace")
    g.add_argument("--config", help=f"config file (default: ${CONFIG_ENV} or built-in defaults)")
    g.add_argument("-o", "--out", required=True)
    g.add_argument("--seed", type=int)
    g.add_argument("--variant", choices=(PIECEWISE, EXPONENTIAL))
    g.add_argument("--no-periodic", action="store_true", help="drop the time-of-day term")
    g.add_argument("--workers", type=int, default=1)
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="aggregate ICT CCDF and summary")
    a.add_argument("trace")
    a.add_argument("--ccdf-out")
    a.add_argument("--tail-threshold", type=float, default=DEFAULTS.T)
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("compare", help="relative error between two aggregate CCDFs")
    c.add_argument("trace")
    c.add_argument("reference_trace", nargs="?")
    c.add_argument("--reference-ccdf")
    c.add_argument("--points", type=int, default=64)
    c.add_argument("-o", "--out")
    c.set_defaults(func=cmd_compare)

    e = sub.add_parser("epidemic", help="averaged epidemic infection curve")
    e.add_argument("trace")
    e.add_argument("-o", "--out", required=True)
    e.add_argument("--time-of-day", type=parse_time_of_day, default=6 * 3600)
    e.add_argument("--horizon", type=parse_duration, default=86400)
    runs_seed(e)
    e.set_defaults(func=cmd_epidemic)

    ce = sub.add_parser("centrality", help="per-node centrality")
    ce.add_argument("trace")
    ce.add_argument("-o", "--out", required=True)
    ce.add_argument("--horizon", type=parse_duration, default=6 * 86400)
    ce.set_defaults(func=cmd_centrality)

    b = sub.add_parser("blacklist", help="centrality vs random blacklist curves")
    b.add_argument("trace")
    b.add_argument("--out-prefix", required=True)
    b.add_argument("-k", type=int, default=30)
    b.add_argument("--horizon", type=parse_duration, default=86400)
    b.add_argument("--time-of-day", type=parse_time_of_day, default=6 * 3600)
    b.add_argument("--centrality-horizon", type=parse_duration, default=6 * 86400)
    b.add_argument("--isolate", action="store_true", help="blacklisted nodes also stop receiving")
    runs_seed(b)
    b.set_defaults(func=cmd_blacklist)

    s = sub.add_parser("start-times", help="infection curves for several start times")
    s.add_argument("trace")
    s.add_argument("--out-prefix", required=True)
    s.add_argument("--times", type=lambda x: [parse_time_of_day(t) for t in x.split(",")],
                   default=[6 * 3600, 18 * 3600], help="comma list, e.g. 06:00,18:00")
    s.add_argument("--horizon", type=parse_duration, default=86400)
    runs_seed(s)
    s.set_defaults(func=cmd_start_times)

    v = sub.add_parser("validate", help="check trace invariants")
    v.add_argument("trace")
    v.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (IctgenError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
