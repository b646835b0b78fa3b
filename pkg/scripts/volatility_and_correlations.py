"""Volatility and cross-correlation versus adjustment speed (CSV datasets).

Main dataset: aggregate volatility against gamma for several economy sizes at
sigma = 1e-3 (the unstable branch stays high as n grows).  Inset dataset: the
same gamma axis at n = 10 for three shock scales (volatility becomes
sigma-independent past the critical point).  Correlation dataset: average
absolute pairwise correlation against gamma.
"""

import argparse
import os

from netecon.analytics import run_sweep
from netecon.config import config_hash, default_config, parse_overrides


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/volatility")
    ap.add_argument("--steps", type=int, default=5000)
    ap.add_argument("--burn-in", type=int, default=1500)
    ap.add_argument("--replicas", type=int, default=2)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    gammas = [0.05, 0.08, 0.1, 0.11, 0.115, 0.12, 0.13, 0.15, 0.17]
    seeds = [1000 + r for r in range(args.replicas)]

    def base(overrides):
        return parse_overrides(default_config(), [
            "params.q=-1", "params.sigma=1e-3",
            f"run.steps={args.steps}", f"run.burn_in={args.burn_in}",
        ] + overrides)

    for n in (10, 64):
        conf = base([f"network.n={n}"])
        result = run_sweep(conf, "gamma", gammas, args.replicas, seeds,
                           statistic="volatility", jobs=args.jobs)
        path = os.path.join(args.out, f"volatility_vs_gamma_n{n}.csv")
        result.to_csv(path, config_hash=config_hash(conf))
        print(path)

    for sigma in (1e-3, 1e-4, 1e-5):
        conf = base(["network.n=10", f"params.sigma={sigma}"])
        result = run_sweep(conf, "gamma", gammas, args.replicas, seeds,
                           statistic="volatility", jobs=args.jobs)
        path = os.path.join(args.out, f"volatility_vs_gamma_sigma{sigma:g}.csv")
        result.to_csv(path, config_hash=config_hash(conf))
        print(path)

    conf = base(["network.n=64"])
    result = run_sweep(conf, "gamma", gammas, args.replicas, seeds,
                       statistic="correlation", jobs=args.jobs)
    path = os.path.join(args.out, "correlation_vs_gamma_n64.csv")
    result.to_csv(path, config_hash=config_hash(conf))
    print(path)


if __name__ == "__main__":
    main()
