"""Regenerate the three intercept-probability figures as CSV + SVG.

    python3 scripts/reproduce_figures.py --trials 2000 --seed 1 --outdir results/
"""

import argparse
import sys

from rlcsec.cli import main as cli


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--threads", type=int)
    ap.add_argument("--figures", nargs="+", default=["fig2", "fig3", "fig4"])
    args = ap.parse_args()
    extra = ["--threads", str(args.threads)] if args.threads else []
    status = 0
    for fig in args.figures:
        code = cli(["figure", fig, "--trials", str(args.trials), "--seed", str(args.seed),
                    "--outdir", args.outdir, "--verbose", *extra])
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())
