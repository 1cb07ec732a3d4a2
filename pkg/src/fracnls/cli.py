"""Command-line entry point: ``fracnls <command> [--config PATH] [--out DIR] [--seed INT] [--threads INT]``.

Exit status: 0 when every gate passed, 2 when some gate failed (the record
with its findings is still written), 1 on errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import scipy.fft as sfft

from .config import default_config, load_config
from .exceptions import FracNLSError
from .runner import COMMANDS, run_command

EXIT_OK, EXIT_ERROR, EXIT_GATE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracnls", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, default=None, help="TOML experiment configuration")
    ap.add_argument("--out", type=Path, default=None, help="output directory (default: runs/<command>)")
    ap.add_argument("--seed", type=int, default=None, help="overrides [run] seed")
    ap.add_argument("--threads", type=int, default=1, help="sweep workers and FFT threads")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_ERROR
    try:
        cfg = load_config(args.config) if args.config else default_config()
        out = args.out if args.out is not None else Path("runs") / args.command
        with sfft.set_workers(args.threads):
            rec = run_command(args.command, cfg, out, seed=args.seed, threads=args.threads)
    except FracNLSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    status = "PASS" if rec.passed else "FAIL"
    for name, ok in rec.gates.items():
        print(f"{'ok  ' if ok else 'FAIL'} {name}")
    print(f"{status}: {args.command} -> {rec.artifacts.get('record')}")
    return EXIT_OK if rec.passed else EXIT_GATE


if __name__ == "__main__":
    sys.exit(main())
