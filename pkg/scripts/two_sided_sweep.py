"""Fitted constants C1 = min u/d and C2 = max u/d^s across radii and mesh sizes.

    python3 scripts/two_sided_sweep.py --p 4 --s 0.5 --h 0.02 0.01 0.005
"""
import argparse
import csv
import sys

from orlicz_hopf.hopf import verify_two_sided
from orlicz_hopf.young import Power


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--h", type=float, nargs="+", default=[0.02, 0.01, 0.005])
    ap.add_argument("--R", type=float, nargs="+", default=[0.25, 0.5, 0.75, 0.9])
    args = ap.parse_args()
    wr = csv.writer(sys.stdout)
    wr.writerow(["h", "R", "C1", "C2", "min_u_over_ds"])
    for h in args.h:
        rep = verify_two_sided(Power(args.p), args.s, 1.0, h, args.n, args.R, refine=False)
        for R, fit in rep.constants["per_R"].items():
            wr.writerow([h, R, fit["C1"], fit["C2"], fit["min_u_over_ds"]])


if __name__ == "__main__":
    main()
