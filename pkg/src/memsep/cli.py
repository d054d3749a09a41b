"""Command-line interface.

Subcommands: rates, spectrum, generator-convergence, hydro, qv, uniqueness.
Every run is a pure function of (--config, --seed); outputs are CSV files in
the output directory.  Exit codes: 0 on success, 2 when a runtime invariant
check failed, 1 on any error (bad usage, bad config, solver failure).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .config import COMMANDS, load_config, reference_text
from .errors import InvariantViolation, MemsepError
from .harness import COMMAND_TABLE

THREADS_ENV = "MEMSEP_THREADS"


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1; argparse's default of 2 is reserved for
    # invariant failures
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _seed(text):
    value = int(text, 0)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit int")
    return value


def build_parser():
    parser = _Parser(prog="memsep",
                     description="Exclusion process with slow bonds over a "
                                 "membrane: verification experiments")
    parser.add_argument("--version", action="version",
                        version=f"memsep {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, metavar="PATH",
                       help="experiment config file")
        p.add_argument("--seed", type=_seed, default=0, metavar="U64",
                       help="base seed (default 0)")
        p.add_argument("--out", default=None, metavar="DIR",
                       help="output directory (default: config setting)")
        p.add_argument("--threads", type=int, default=None, metavar="K",
                       help=f"replica workers (default: ${THREADS_ENV} or 1)")
    ref = sub.add_parser("config-reference",
                         help="print the config key documentation")
    return parser


def _resolve_threads(cli_value):
    if cli_value is not None:
        return max(1, cli_value)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise MemsepError(f"bad {THREADS_ENV} value {env!r}")
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1
    if args.command == "config-reference":
        print(reference_text(), end="")
        return 0
    try:
        config = load_config(args.config)
        if config.kind is not None and config.kind != args.command:
            raise MemsepError(
                f"config pins experiment kind {config.kind!r} but the "
                f"{args.command!r} command was invoked")
        threads = _resolve_threads(args.threads)
        outdir = Path(args.out if args.out is not None else config.outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        ok, notes, tables = COMMAND_TABLE[args.command](
            config, seed=args.seed, outdir=outdir, threads=threads)
    except InvariantViolation as exc:
        print(f"memsep {args.command}: invariant failure: {exc}",
              file=sys.stderr)
        return 2
    except MemsepError as exc:
        print(f"memsep {args.command}: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"memsep {args.command}: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1
    for note in notes:
        print(f"memsep {args.command}: {note}", file=sys.stderr)
    status = "ok" if ok else "INVARIANT FAILURE"
    written = ", ".join(f"{name}.csv" for name in tables)
    print(f"memsep {args.command}: {status}; wrote {written} -> {outdir}")
    return 0 if ok else 2


if __name__ == "__main__":
    raise SystemExit(main())
