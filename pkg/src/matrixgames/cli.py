"""Command line: ``run``, ``replay`` and ``slope``.

Exit codes: 0 success, 1 replay mismatch, 2 configuration error,
3 numeric failure in at least one cell.
"""

import argparse
import csv
import dataclasses
from collections import defaultdict
import logging
import sys

from .config import load_config
from .exceptions import ConfigurationError
from .metrics import slope_fit
from .runner import replay_check, run_experiment

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _run(args):
    cfg = load_config(args.config)
    if args.seed_override is not None:
        cfg = cfg.with_seeds([args.seed_override])
    if args.jsonl:
        cfg = dataclasses.replace(cfg, jsonl=True)
    results, out = run_experiment(cfg, args.out, args.jobs)
    failed = [r for r in results if r.failed]
    for r in failed:
        print(f"cell {r.key} failed: {r.summary.get('error')}", file=sys.stderr)
    print(f"wrote {len(results)} cells to {out}")
    return EXIT_NUMERIC if failed else EXIT_OK


def _replay(args):
    cfg = load_config(args.config)
    if args.seed_override is not None:
        cfg = cfg.with_seeds([args.seed_override])
    ok, msg = replay_check(cfg, args.recorded, args.jobs)
    print(("PASS: " if ok else "FAIL: ") + msg)
    return EXIT_OK if ok else EXIT_MISMATCH


def _slope(args):
    try:
        with open(args.infile, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigurationError(f"cannot read {args.infile}: {exc}") from exc
    if not rows or args.column not in rows[0] or "T" not in rows[0]:
        raise ConfigurationError(f"{args.infile} needs columns T and {args.column}")
    groups = defaultdict(lambda: defaultdict(list))
    for r in rows:
        if r.get("status", "ok") != "ok" or r[args.column] == "":
            continue
        key = (r.get("algorithm", ""), r.get("adversary", ""))
        groups[key][int(r["T"])].append(float(r[args.column]))
    if not groups:
        raise ConfigurationError(f"no usable rows in {args.infile}")
    print("algorithm,adversary,slope,intercept,r2")
    for (alg, adv), by_T in sorted(groups.items()):
        pts = [(T, sum(v) / len(v)) for T, v in sorted(by_T.items())]
        slope, intercept, r2 = slope_fit(pts)
        print(f"{alg},{adv},{slope!r},{intercept!r},{r2!r}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="matrixgames", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run every cell of a config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", default=None, help="output directory (overrides [output] dir)")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--seed-override", type=int, default=None)
    r.add_argument("--jsonl", action="store_true", help="also write rounds.jsonl")
    r.set_defaults(func=_run)
    rp = sub.add_parser("replay", help="re-run a recording and compare it exactly")
    rp.add_argument("--config", required=True)
    rp.add_argument("--recorded", required=True)
    rp.add_argument("--jobs", type=int, default=1)
    rp.add_argument("--seed-override", type=int, default=None)
    rp.set_defaults(func=_replay)
    s = sub.add_parser("slope", help="fit log-log growth rates from a summary CSV")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--column", default="ne_regret")
    s.set_defaults(func=_slope)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
