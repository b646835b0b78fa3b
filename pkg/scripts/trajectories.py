"""Aggregate-output trajectories across the instability (CSV datasets).

Runs the plain n=64 economy at q=-1 for adjustment speeds straddling the
critical point (gamma_c = 1/9 for this configuration) and writes one
trajectory file per gamma.  Plot aggregate_output or mean_xi against t with
any tool.
"""

import argparse
import os

from netecon.config import config_hash, default_config, parse_overrides
from netecon.equilibrium import ModelParams
from netecon.network import build_plain_network
from netecon.simulator import NoiseProcess, Simulator, trajectory_to_csv

GAMMAS = (0.105, 0.115, 0.13, 0.15, 0.185)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out/trajectories")
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--steps", type=int, default=5000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    net = build_plain_network(args.n)
    for gamma in GAMMAS:
        params = ModelParams(a=0.5, b=0.9, q=-1.0, gamma=gamma, sigma=1e-3)
        conf = parse_overrides(default_config(), [
            f"network.n={args.n}", f"params.gamma={gamma}", "params.sigma=1e-3",
            f"run.steps={args.steps}", f"run.seed={args.seed}",
        ])
        sim = Simulator(net, params)
        traj = sim.simulate(NoiseProcess(1e-3, args.seed), steps=args.steps,
                            burn_in=min(1000, args.steps // 5),
                            config_hash=config_hash(conf))
        path = os.path.join(args.out, f"trajectory_gamma{gamma}.csv")
        trajectory_to_csv(traj, path)
        print(path)


if __name__ == "__main__":
    main()
