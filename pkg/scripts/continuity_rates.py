"""Sup of |(-Delta_a)^s (c d)| over the grid as c -> 0, one row per c_k = 2^-k."""
import argparse

from orlicz_hopf.hopf import continuity_experiment
from orlicz_hopf.young import from_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", default="power")
    ap.add_argument("--p", type=float, default=4.0)
    ap.add_argument("--s", type=float, default=0.5)
    ap.add_argument("--n", type=int, default=1)
    ap.add_argument("--h", type=float, default=0.005)
    ap.add_argument("--k-max", type=int, default=10)
    args = ap.parse_args()
    yf = from_config({"family": args.family, "p": args.p})
    rep = continuity_experiment(yf, args.s, args.h, args.n, args.k_max)
    print(f"verdict: {rep.verdict}")
    print(f"{'k':>3} {'c_k':>10} {'sup':>12} {'majorant':>12} {'S_k/(S_0 c^(p-1))':>18}")
    for (k, c, sup, maj, _), ratio in zip(rep.trace_rows, rep.constants["rate_ratio"]):
        print(f"{k:>3} {c:>10.4g} {sup:>12.4e} {maj:>12.4e} {ratio:>18.4f}")


if __name__ == "__main__":
    main()
