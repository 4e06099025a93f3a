"""Command line driver: ``bochner run <config> [--out DIR]`` and
``bochner validate <config>``.

Every nonzero exit writes exactly one machine-parsable ``key=value`` line
as the last line of standard error.
"""

from __future__ import annotations

import argparse
import sys

import yaml

from .config import load_config, validate_config
from .errors import BochnerError
from .runner import run


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="bochner", description="weighted vector-valued calculus experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute an experiment config")
    p_run.add_argument("config", help="path to the YAML config")
    p_run.add_argument("--out", default=".", help="output directory override")
    p_val = sub.add_parser("validate", help="report config diagnostics")
    p_val.add_argument("config", help="path to the YAML config")
    return parser


def _fail(code: str, **details) -> int:
    parts = [f"error={code}"] + [f"{k}={str(v).replace(' ', '_')}" for k, v in sorted(details.items())]
    print(" ".join(parts), file=sys.stderr)
    return 1


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        return _fail("usage", detail=exc)
    try:
        cfg = load_config(args.config)
    except (OSError, ValueError, yaml.YAMLError) as exc:
        return _fail("config-load", path=args.config, detail=type(exc).__name__)
    if args.command == "validate":
        for line in validate_config(cfg):
            print(line)
        return 0
    diagnostics = validate_config(cfg)
    if diagnostics:
        for line in diagnostics:
            print(line, file=sys.stderr)
        return _fail("invalid-config", count=len(diagnostics), first=diagnostics[0])
    try:
        written = run(cfg, args.out)
    except BochnerError as exc:
        print(exc.detail_line(), file=sys.stderr)
        return 2
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
