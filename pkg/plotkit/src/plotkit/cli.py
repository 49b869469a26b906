"""Batch figure regeneration from run directories.

Exit codes: 0 success, 1 bad arguments or unreadable run directory.
"""

from __future__ import annotations

import argparse
import sys

from .figures import plot_phase3d, plot_spectrum, plot_timeseries
from .io import RunDataError

FORMATS = {"png": ("png",), "svg": ("svg",), "both": ("png", "svg")}


def _parse_breaks(args):
    if args.no_break:
        return None
    if args.breaks:
        lo1, hi1, lo2, hi2 = args.breaks
        return (lo1, hi1), (lo2, hi2)
    return "auto"


def cmd_timeseries(args) -> int:
    paths = plot_timeseries(args.run_dir, args.out, breaks=_parse_breaks(args),
                            formats=FORMATS[args.format])
    for path in paths:
        print(f"wrote {path}")
    return 0


def cmd_spectrum(args) -> int:
    for path in plot_spectrum(args.run_dir, args.out, formats=FORMATS[args.format]):
        print(f"wrote {path}")
    return 0


def cmd_phase3d(args) -> int:
    for path in plot_phase3d(args.run_dirs, args.out, formats=FORMATS[args.format]):
        print(f"wrote {path}")
    return 0


def cmd_montage(args) -> int:
    if len(args.run_dirs) < 2:
        print("montage needs at least two run directories", file=sys.stderr)
        return 1
    for path in plot_phase3d(args.run_dirs, args.out, formats=FORMATS[args.format]):
        print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plotkit",
        description="Regenerate publication-style figures from run directories",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", required=True, help="output path without extension")
        p.add_argument("--format", choices=sorted(FORMATS), default="both")

    p_ts = sub.add_parser("timeseries", help="five stacked panels with a broken time axis")
    p_ts.add_argument("--run-dir", required=True)
    p_ts.add_argument("--no-break", action="store_true", help="single full-range axis")
    p_ts.add_argument(
        "--breaks", type=float, nargs=4, metavar=("LO1", "HI1", "LO2", "HI2"),
        help="explicit transient and steady ranges in units of T",
    )
    add_common(p_ts)
    p_ts.set_defaults(func=cmd_timeseries)

    p_sp = sub.add_parser("spectrum", help="two-sided internal and motional spectra")
    p_sp.add_argument("--run-dir", required=True)
    add_common(p_sp)
    p_sp.set_defaults(func=cmd_spectrum)

    p_3d = sub.add_parser("phase3d", help="3D phase-space trajectory (one panel per run)")
    p_3d.add_argument("--run-dirs", nargs="+", required=True)
    add_common(p_3d)
    p_3d.set_defaults(func=cmd_phase3d)

    p_mt = sub.add_parser("montage", help="multi-run 3D montage (two or more runs)")
    p_mt.add_argument("--run-dirs", nargs="+", required=True)
    add_common(p_mt)
    p_mt.set_defaults(func=cmd_montage)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (RunDataError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
