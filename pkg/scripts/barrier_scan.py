"""Barrier verdicts over a grid of (rho, r) in one or two dimensions."""
import argparse
import itertools

from orlicz_hopf.hopf import verify_barrier
from orlicz_hopf.young import from_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="power")
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--n", type=int, default=1, choices=(1, 2))
    ap.add_argument("--h", type=float, default=0.005)
    ap.add_argument("--rho", type=float, nargs="+", default=[0.1, 0.25, 0.4])
    ap.add_argument("--r", type=float, nargs="+", default=[0.1, 0.25, 0.5])
    args = ap.parse_args()
    yf = from_config({"family": args.family, "p": args.p})
    print(f"{'rho':>5} {'r':>5} {'verdict':>13} {'max value':>11} {'error':>9} {'strict':>7}")
    for rho, r in itertools.product(args.rho, args.r):
        h = min(args.h, r * rho / 4)
        rep = verify_barrier(yf, args.s, rho, r, h, args.n)
        c = rep.constants
        print(f"{rho:>5.2f} {r:>5.2f} {rep.verdict:>13} {c['max_value']:>11.4g} "
              f"{c['max_error_bound']:>9.2e} {str(c['strict_bound_holds']):>7}")


if __name__ == "__main__":
    main()
