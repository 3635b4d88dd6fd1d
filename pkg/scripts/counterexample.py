"""Share of ε-close paths whose jump at 1 goes down, against 1 - exp(-ε)."""

import argparse
import math

import numpy as np

from flashlab import Exponential, build_nonrobust_counterexample, sample_paths


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.01, 0.05, 0.1, 0.2])
    ap.add_argument("--rate", type=float, default=1.0)
    ap.add_argument("--n-paths", type=int, default=100_000)
    ap.add_argument("--seed", type=int, required=True)
    args = ap.parse_args()

    for eps in args.eps:
        _, Xt = build_nonrobust_counterexample(eps, Exponential(args.rate))
        frac = float(np.mean(sample_paths(Xt, args.n_paths, args.seed).jump_sizes("eta") <= 0))
        p = 1 - math.exp(-args.rate * eps)
        se = math.sqrt(p * (1 - p) / args.n_paths)
        print(f"eps={eps:<6g} down-jump share {frac:.5f}  theory {p:.5f}  z={(frac - p) / se:+.2f}")


if __name__ == "__main__":
    main()
