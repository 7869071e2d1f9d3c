"""Command line: ``enlargement run|validate|list``.

Exit status: 0 on success, 2 for an invalid spec, 3 when a valid spec fails
while running.
"""

from __future__ import annotations

import argparse
import json
import sys

from .estimators import WORKERS_ENV, default_workers
from .experiments import (KINDS, SpecError, apply_overrides, catalog, catalog_entry, load_spec,
                          run, validate)
from .graph import GraphError, ResourceError

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 2, 3


def _load(ref: str, profile: str) -> dict:
    """A spec file path, or ``catalog:<name>`` for a built-in entry."""
    if ref.startswith("catalog:"):
        return catalog_entry(ref.split(":", 1)[1], profile)
    return load_spec(ref)


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="enlargement",
                                 description="Percolation enlargement experiments.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("spec", help="spec JSON file or catalog:<name>")
        p.add_argument("--profile", choices=("full", "smoke"), default="full",
                       help="size profile for catalog:<name> specs")
        p.add_argument("--seed", type=int, help="override the master seed")
        p.add_argument("--window-override", type=int, dest="window",
                       help="override the window size (radius, depth or levels)")

    r = sub.add_parser("run", help="run an experiment")
    common(r)
    r.add_argument("--out", help="output directory (default: the spec's output field)")
    r.add_argument("--workers", type=int, default=None,
                   help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    v = sub.add_parser("validate", help="static checks only")
    common(v)
    ls = sub.add_parser("list", help="show the built-in catalog")
    ls.add_argument("--profile", choices=("full", "smoke"), default="full")
    ls.add_argument("--json", action="store_true", help="print the specs as JSON")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.cmd == "list":
        entries = catalog(args.profile)
        if args.json:
            print(json.dumps(entries, indent=1))
            return EXIT_OK
        for e in entries:
            print(f"{e['name']}  [{e['kind']}: {KINDS[e['kind']].summary}]")
            print(f"    {e['description']}")
            print(f"    ops: {', '.join(e['ops'])}")
        return EXIT_OK

    try:
        spec = apply_overrides(_load(args.spec, args.profile), args.seed, args.window)
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: cannot load spec: {exc}", file=sys.stderr)
        return EXIT_INVALID
    problems = validate(spec)
    if args.cmd == "validate":
        for p in problems:
            print(p)
        if not problems:
            print("ok")
        return EXIT_INVALID if problems else EXIT_OK
    if problems:
        for p in problems:
            print(f"invalid: {p}", file=sys.stderr)
        return EXIT_INVALID
    workers = args.workers if args.workers is not None else default_workers()
    try:
        res = run(spec, args.out, workers)
    except SpecError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (GraphError, ResourceError, ValueError, OverflowError, MemoryError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(res.csv_path)
    print(res.summary_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
