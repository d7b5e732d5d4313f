"""Write the data behind every figure as CSV (plus manifest) into a directory."""

import argparse
import sys
from pathlib import Path

from rsc.cli import FIGURES, run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("outdir", type=Path)
    ap.add_argument("--points", type=int, default=201)
    args = ap.parse_args(argv)
    args.outdir.mkdir(parents=True, exist_ok=True)
    for fig in sorted(FIGURES):
        out = args.outdir / f"{fig}.csv"
        code = run(["reproduce", fig, "--points", str(args.points), "--out", str(out)])
        if code:
            return code
        print(f"{fig}: {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
