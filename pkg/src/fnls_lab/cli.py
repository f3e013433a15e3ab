"""Command-line surface: run, validate, emit-schema.

Exit codes: 0 all checks pass, 1 a numeric check or a run failed (the
failing check is named), 2 the config is invalid (every violation listed
with its field path).
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

from . import __version__
from .config import load_config, schema_document
from .experiments import ExperimentOutcome, ExperimentSpec, run_experiment


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fnls-lab",
        description="Dispersive-kernel, evolution and growth experiments "
                    "driven by TOML configs.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="verb", required=True)

    run_p = sub.add_parser("run", help="execute every experiment in a config")
    run_p.add_argument("--config", required=True, metavar="PATH")
    run_p.add_argument("--out", default="results", metavar="DIR",
                       help="output root (default: results)")
    run_p.add_argument("--jobs", type=int, default=None, metavar="K",
                       help="concurrent experiments "
                            "(default: $FNLS_LAB_JOBS or 1)")
    run_p.add_argument("--quiet", action="store_true",
                       help="print failures only")

    val_p = sub.add_parser("validate",
                           help="schema-check a config without running it")
    val_p.add_argument("--config", required=True, metavar="PATH")
    val_p.add_argument("--quiet", action="store_true",
                       help="suppress the ok line")

    sub.add_parser("emit-schema",
                   help="print the TOML schema of every experiment kind")
    return ap


def _resolve_jobs(requested: Optional[int]) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get("FNLS_LAB_JOBS", "")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            print(f"ignoring non-integer FNLS_LAB_JOBS={env!r}",
                  file=sys.stderr)
    return 1


def _run_one(spec: ExperimentSpec, out_root: str):
    """Outcome or the exception; raising would abort sibling jobs."""
    try:
        return run_experiment(spec, out_root)
    except Exception as e:  # runtime failures map to exit 1, not a crash
        return e


def _report(spec: ExperimentSpec, result, quiet: bool) -> bool:
    if isinstance(result, Exception):
        print(f"FAIL {spec.name} [{spec.kind}] "
              f"error: {type(result).__name__}: {result}")
        return False
    outcome: ExperimentOutcome = result
    if outcome.passed:
        if not quiet:
            n = len(outcome.checks)
            print(f"PASS {outcome.name} [{outcome.kind}] "
                  f"checks {n}/{n} -> {outcome.csv_path}")
        return True
    for c in outcome.failed_checks():
        print(f"FAIL {outcome.name} [{outcome.kind}] "
              f"check {c.name}: {c.detail}")
    return False


def _cmd_run(args) -> int:
    specs, violations = load_config(args.config)
    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        return 2
    jobs = _resolve_jobs(args.jobs)
    if jobs == 1 or len(specs) <= 1:
        results = [_run_one(s, args.out) for s in specs]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda s: _run_one(s, args.out), specs))
    ok = True
    for spec, result in zip(specs, results):
        ok = _report(spec, result, args.quiet) and ok
    return 0 if ok else 1


def _cmd_validate(args) -> int:
    _specs, violations = load_config(args.config)
    if violations:
        for v in violations:
            print(v)
        return 2
    if not args.quiet:
        print("ok")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    if args.verb == "run":
        return _cmd_run(args)
    if args.verb == "validate":
        return _cmd_validate(args)
    sys.stdout.write(schema_document())
    return 0


if __name__ == "__main__":
    sys.exit(main())
