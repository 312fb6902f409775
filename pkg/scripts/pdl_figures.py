"""PDL_5 curves against N for the Markov models, one CSV per figure.

    python scripts/pdl_figures.py --outdir results/

Writes no_repair.csv, individual.csv, simultaneous.csv, imperfect.csv,
sector.csv and sector_imperfect.csv with columns model,N,M,p,pdl.
"""

import argparse
import csv
from pathlib import Path

from raidrel.config import RaidConfig
from raidrel.models import model_pdl

FIGURES = {
    "no_repair": ("no-repair", range(1, 6), [0.0]),
    "individual": ("individual", range(1, 6), [0.0]),
    "simultaneous": ("simultaneous", range(1, 6), [0.0]),
    "imperfect": ("imperfect", range(1, 6), [0.0, 0.025, 0.05, 0.1]),
    "sector": ("sector", range(1, 6), [0.0]),
    "sector_imperfect": ("sector-imperfect", range(1, 6), [0.05]),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--nmax", type=int, default=64)
    ap.add_argument("--only", choices=sorted(FIGURES))
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name, (tag, ms, ps) in FIGURES.items():
        if args.only and name != args.only:
            continue
        with open(out / f"{name}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["model", "N", "M", "p", "pdl"])
            for p in ps:
                for m in ms:
                    for n in range(1, args.nmax + 1):
                        pdl = model_pdl(tag, RaidConfig(n, m, p=p))
                        w.writerow([tag, n, m, p, f"{pdl:.8e}"])
        print(f"wrote {out / name}.csv")


if __name__ == "__main__":
    main()
