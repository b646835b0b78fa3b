"""Command-line front-end: reproducible experiment runs emitting CSV datasets.

Subcommands: equilibrium, simulate, stability, phase-diagram, sweep, reduced.
Every output file starts with a ``# config_hash=...`` line; re-running a
command with the same configuration reproduces the data rows byte for byte.
Exit codes: 0 success, 1 configuration error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import analytics, config as cfg, reduced as red
from .equilibrium import equilibrium_residual, solve_equilibrium
from .simulator import ClearingError, NoiseProcess, Simulator, trajectory_to_csv
from .stability import analyze_stability, report_to_csv, trace_critical_line, critical_line_to_csv

__all__ = [
    "cmd_equilibrium",
    "cmd_simulate",
    "cmd_stability",
    "cmd_phase_diagram",
    "cmd_sweep",
    "cmd_reduced",
    "main",
]

_FMT = ".17g"


def _out_path(conf: cfg.ExperimentConfig, name: str) -> str:
    os.makedirs(conf.output.directory, exist_ok=True)
    return os.path.join(conf.output.directory, name)


def cmd_equilibrium(conf: cfg.ExperimentConfig) -> list[str]:
    """Solve the static equilibrium and write equilibrium.csv."""
    net = cfg.build_network(conf)
    params = cfg.build_params(conf)
    if params.b >= 1.0:
        raise cfg.ConfigError("equilibrium requires b < 1")
    eq = solve_equilibrium(net, params)
    path = _out_path(conf, "equilibrium.csv")
    with open(path, "w") as fh:
        fh.write(f"# config_hash={cfg.config_hash(conf)}\n")
        fh.write(f"# h_eq={eq.h_eq:{_FMT}} residual={equilibrium_residual(eq, net, params):{_FMT}}\n")
        fh.write("i,p_eq,x_eq,V_eq,S_eq\n")
        for i in range(net.n):
            row = (eq.p_eq[i], eq.x_eq[i], eq.V_eq[i], eq.S_eq[i])
            fh.write(str(i) + "," + ",".join(format(v, _FMT) for v in row) + "\n")
    return [path]


def cmd_simulate(conf: cfg.ExperimentConfig) -> list[str]:
    """Run one simulation and write trajectory.csv."""
    net = cfg.build_network(conf)
    params = cfg.build_params(conf)
    sim = Simulator(net, params)
    traj = sim.simulate(
        NoiseProcess(sigma=params.sigma, seed=conf.run.seed),
        steps=conf.run.steps,
        burn_in=conf.run.burn_in,
        initial_kick=conf.run.initial_kick,
        config_hash=cfg.config_hash(conf),
    )
    path = _out_path(conf, "trajectory.csv")
    trajectory_to_csv(traj, path, per_sector=conf.output.per_sector)
    return [path]


def cmd_stability(conf: cfg.ExperimentConfig) -> list[str]:
    """Stability report CSV plus a one-line verdict on stdout."""
    net = cfg.build_network(conf)
    params = cfg.build_params(conf)
    report = analyze_stability(net, params)
    path = _out_path(conf, "stability.csv")
    report_to_csv(report, path, config_hash=cfg.config_hash(conf))
    verdict = "stable" if report.stable else "unstable"
    max_alpha = max(report.max_growth, report.uniform_multiplier)
    print(f"{verdict} max_alpha={max_alpha:.10g} method={report.method}")
    return [path]


def cmd_phase_diagram(conf: cfg.ExperimentConfig, q_grid=None) -> list[str]:
    """Critical line gamma_c(q) over the configured q grid."""
    net = cfg.build_network(conf)
    params = cfg.build_params(conf)
    grid = conf.phase_q_grid if q_grid is None else q_grid
    line = trace_critical_line(net, params, grid, jobs=conf.jobs)
    path = _out_path(conf, "phase_diagram.csv")
    critical_line_to_csv(line, path, config_hash=cfg.config_hash(conf))
    return [path]


def cmd_sweep(conf: cfg.ExperimentConfig, axis: str | None = None) -> list[str]:
    """Replicated parameter sweep; also emits mean output / consumption columns."""
    axis = axis or conf.sweep_axis
    seeds = [conf.run.seed + r for r in range(conf.run.replicas)]
    result = analytics.run_sweep(
        conf, axis, conf.sweep_values, conf.run.replicas, seeds,
        statistic=conf.sweep_statistic, jobs=conf.jobs,
    )
    path = _out_path(conf, f"sweep_{axis}.csv")
    result.to_csv(path, config_hash=cfg.config_hash(conf))
    return [path]


def cmd_reduced(conf: cfg.ExperimentConfig, model: str) -> list[str]:
    """Reference-model datasets: prediction next to simulation."""
    params = cfg.build_params(conf)
    a, b = params.a, params.b
    hash_line = f"# config_hash={cfg.config_hash(conf)}\n"
    if model == "long_plosser":
        path = _out_path(conf, "reduced_long_plosser.csv")
        with open(path, "w") as fh:
            fh.write(hash_line)
            fh.write("n,measured_agg_std,sigma_fast_pred,sigma_slow_pred\n")
            for n in conf.reduced_n_values:
                net = cfg.build_network(cfg.apply_axis(conf, "n", n))
                sigmas = np.full(n, params.sigma if params.sigma > 0 else 1e-3)
                xi = red.long_plosser_simulate(net, a, b, float(sigmas[0]),
                                               conf.run.steps, conf.run.seed)
                measured = float(xi.mean(axis=1)[conf.run.burn_in:].std())
                fast = red.sigma_fast(net, a, b, sigmas)
                slow = red.sigma_slow(net, a, b, sigmas)
                fh.write(f"{n},{measured:{_FMT}},{fast:{_FMT}},{slow:{_FMT}}\n")
        return [path]
    if model == "adiabatic":
        net = cfg.build_network(conf)
        sigmas = np.full(net.n, params.sigma if params.sigma > 0 else 1e-3)
        path = _out_path(conf, "reduced_adiabatic.csv")
        with open(path, "w") as fh:
            fh.write(hash_line)
            fh.write("n,sigma_slow,sigma_fast,ratio\n")
            slow = red.sigma_slow(net, a, b, sigmas)
            fast = red.sigma_fast(net, a, b, sigmas)
            fh.write(f"{net.n},{slow:{_FMT}},{fast:{_FMT}},{slow / fast:{_FMT}}\n")
        return [path]
    if model == "transversality":
        net = cfg.build_network(conf)
        rng = np.random.default_rng(conf.run.seed)
        s0 = rng.standard_normal(net.n)
        s0 -= s0.mean()
        report = red.transversality_blowup(net, a, b, params.beta0, s0, steps=40)
        path = _out_path(conf, "reduced_transversality.csv")
        with open(path, "w") as fh:
            fh.write(hash_line)
            fh.write(f"# growth_factor={report.growth_factor:{_FMT}} "
                     f"singular_subspace={report.singular_subspace}\n")
            fh.write("step,norm\n")
            for t, nrm in enumerate(report.norms):
                fh.write(f"{t},{nrm:{_FMT}}\n")
        return [path]
    if model == "near_instability":
        n = min(conf.network.n, 8)
        u = np.ones(n) / np.sqrt(n)
        model_obj = red.build_near_instability_model(u, eta=0.01, sigmas=np.ones(n))
        stats = red.near_instability_stats(model_obj, steps=400_000, seed=conf.run.seed)
        path = _out_path(conf, "reduced_near_instability.csv")
        with open(path, "w") as fh:
            fh.write(hash_line)
            fh.write("stat,j,k,predicted,empirical\n")
            for j in range(n):
                fh.write(f"var,{j},{j},{stats.cov_predicted[j, j]:{_FMT}},"
                         f"{stats.cov_empirical[j, j]:{_FMT}}\n")
            for j in range(n):
                for k in range(j + 1, n):
                    fh.write(f"corr,{j},{k},{stats.corr_predicted_sign[j, k]:{_FMT}},"
                             f"{stats.corr_empirical[j, k]:{_FMT}}\n")
        return [path]
    raise cfg.ConfigError(f"unknown reduced model {model!r}")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    # SUPPRESS defaults let the flags appear before or after the subcommand
    # without the subparser clobbering already-parsed values
    parser.add_argument("--config", default=argparse.SUPPRESS,
                        help="key-value configuration file")
    parser.add_argument("--set", action="append", default=argparse.SUPPRESS,
                        metavar="KEY=VALUE",
                        help="override a configuration key (repeatable)")
    parser.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    parser.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                        help="worker pool size")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="base RNG seed")
    parser.add_argument("--per-sector", action="store_true",
                        default=argparse.SUPPRESS,
                        help="include per-sector columns in trajectory output")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netecon",
        description="Interconnected-firm economy: equilibrium, dynamics, stability.",
    )
    _add_common_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("equilibrium", "simulate", "stability", "phase-diagram"):
        _add_common_flags(sub.add_parser(name))
    sweep = sub.add_parser("sweep")
    sweep.add_argument("--axis", default=None, choices=["gamma", "sigma", "n"])
    _add_common_flags(sweep)
    reduced = sub.add_parser("reduced")
    reduced.add_argument("model", choices=["long_plosser", "adiabatic",
                                           "transversality", "near_instability"])
    _add_common_flags(reduced)
    return parser


def main(argv: list[str] | None = None) -> int:
    from dataclasses import replace

    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        conf = cfg.load_config(getattr(args, "config", None), getattr(args, "set", []))
        if getattr(args, "out", None) is not None:
            conf = replace(conf, output=replace(conf.output, directory=args.out))
        if getattr(args, "jobs", None) is not None:
            conf = replace(conf, jobs=args.jobs)
        if getattr(args, "seed", None) is not None:
            conf = cfg.replace_run(conf, seed=args.seed)
        if getattr(args, "per_sector", False):
            conf = replace(conf, output=replace(conf.output, per_sector=True))
    except cfg.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.command == "equilibrium":
            paths = cmd_equilibrium(conf)
        elif args.command == "simulate":
            paths = cmd_simulate(conf)
        elif args.command == "stability":
            paths = cmd_stability(conf)
        elif args.command == "phase-diagram":
            paths = cmd_phase_diagram(conf)
        elif args.command == "sweep":
            paths = cmd_sweep(conf, axis=args.axis)
        elif args.command == "reduced":
            paths = cmd_reduced(conf, args.model)
        else:  # unreachable, argparse enforces choices
            return 1
    except cfg.ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except (ClearingError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
