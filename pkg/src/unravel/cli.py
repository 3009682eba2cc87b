"""Command line entry point: ``unravel run`` and ``unravel verify``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .acceptance import SUITES, run_suite
from .experiment import run_experiment


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="unravel", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a JSON config or manifest")
    run.add_argument("--config", required=True, type=Path)
    run.add_argument("--out", required=True, type=Path)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--seed", type=int, default=None)
    ver = sub.add_parser("verify", help="run acceptance checks")
    ver.add_argument("--suite", default="all", choices=sorted(SUITES))
    ver.add_argument("--seed", type=int, default=0)
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "run":
        if args.workers < 1:
            print("--workers must be >= 1", file=sys.stderr)
            return 2
        try:
            config = json.loads(args.config.read_text())
            manifest = run_experiment(config, args.out, args.workers, args.seed)
        except (ValueError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        for name, s in manifest["summary"].items():
            print(
                f"{name:>16}: saturation S_mid = {s['saturation_entropy_midcut']:.4f}"
                f" +- {s['saturation_sem']:.4f}, bound = {s['certificate']['bound']:.4f}"
            )
        return 0
    results = run_suite(args.suite, seed=args.seed)
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
