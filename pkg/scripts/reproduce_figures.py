#!/usr/bin/env python3
"""Regenerate the data behind every figure into one directory tree.

    python scripts/reproduce_figures.py --out results --workers 4
"""
import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from optosqueeze.experiments import FIGURES, run_figure


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("figures", nargs="*", default=list(FIGURES), metavar="FIG",
                    help=f"subset of {', '.join(FIGURES)} (default: all)")
    args = ap.parse_args(argv)
    unknown = sorted(set(args.figures) - set(FIGURES))
    if unknown:
        ap.error(f"unknown figure(s): {', '.join(unknown)}")
    pool = ProcessPoolExecutor(args.workers) if args.workers > 1 else None
    try:
        for fig in args.figures:
            t0 = time.perf_counter()
            files = run_figure(fig, outdir=args.out / fig, map_fn=pool.map if pool else map)
            print(f"{fig:6s} {time.perf_counter() - t0:7.2f} s  {len(files)} files -> {args.out / fig}")
    finally:
        if pool:
            pool.shutdown()
    return 0


if __name__ == "__main__":
    sys.exit(main())
