#!/usr/bin/env python3
"""Relative Frobenius-error curves for all three map kinds over a grid of
copy counts — theory next to Monte Carlo, ready for log-log plotting.

Thin wrapper over the ``approx-error`` CLI subcommand so scripted runs and
command-line runs share one code path.

Usage:
    python3 scripts/approx_error_curves.py --out curves.csv
    python3 scripts/approx_error_curves.py data.libsvm --copies 1,2,4,8,16,32 \
        --trials 100 --out curves.csv
"""

import argparse

from polyakern.cli import main as cli_main


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("data", nargs="?", default=None,
                        help="optional LIBSVM file (default: synthetic points)")
    parser.add_argument("--kernel", default="gamma:s=2,theta=1")
    parser.add_argument("--fourier-law", default="cauchy:scale=1")
    parser.add_argument("--copies", default="1,2,4,8,16,32,64")
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)

    cli_args = [
        "approx-error",
        "--kernel", args.kernel,
        "--fourier-law", args.fourier_law,
        "--copies", args.copies,
        "--trials", str(args.trials),
    ]
    if args.data is not None:
        cli_args.insert(1, args.data)
    if args.seed is not None:
        cli_args += ["--seed", str(args.seed)]
    if args.out is not None:
        cli_args += ["--out", args.out]
    return cli_main(cli_args)


if __name__ == "__main__":
    raise SystemExit(main())
