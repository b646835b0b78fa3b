"""Experiment configuration: flat key-value files, overrides, canonical hashing.

A configuration is a plain text file of ``section.key = value`` lines (``#``
comments allowed).  Command-line ``--set key=value`` overrides win over the
file.  The canonical serialization (all keys, defaults materialized, sorted)
is hashed and stamped into the first header line of every output file, so
identical configurations reproduce byte-identical artifacts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace

import numpy as np

from .equilibrium import ModelParams
from .network import IONetwork, build_plain_network, build_random_exponential_network, load_network

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "NetworkConfig",
    "OutputConfig",
    "RunConfig",
    "apply_axis",
    "build_network",
    "build_params",
    "config_hash",
    "config_to_text",
    "default_config",
    "load_config",
    "parse_overrides",
    "replace_run",
]


class ConfigError(ValueError):
    """Malformed configuration file or override."""


@dataclass(frozen=True)
class NetworkConfig:
    kind: str = "plain"  # plain | random_exp | file
    n: int = 64
    seed: int = 0
    path: str = ""


@dataclass(frozen=True)
class RunConfig:
    steps: int = 5000
    burn_in: int = 1000
    replicas: int = 1
    seed: int = 12345
    initial_kick: float = 1e-6


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    per_sector: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    params: ModelParams = field(default_factory=ModelParams)
    run: RunConfig = field(default_factory=RunConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    sweep_axis: str = "gamma"
    sweep_values: tuple[float, ...] = (0.05, 0.1, 0.15)
    sweep_statistic: str = "volatility"
    phase_q_grid: tuple[float, ...] = tuple(np.round(np.arange(-1.0, 1.0001, 0.1), 10))
    reduced_n_values: tuple[int, ...] = (25, 100, 400)
    jobs: int = 1


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


_BOOL = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in ("network.kind", "network.path", "output.directory",
               "sweep.axis", "sweep.statistic"):
        return raw
    if key == "output.per_sector":
        if raw.lower() not in _BOOL:
            raise ConfigError(f"boolean expected for {key}, got {raw!r}")
        return _BOOL[raw.lower()]
    if key in ("network.n", "network.seed", "run.steps", "run.burn_in",
               "run.replicas", "run.seed", "jobs"):
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"integer expected for {key}, got {raw!r}") from exc
    if key in ("sweep.values", "phase.q_grid"):
        try:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"comma-separated reals expected for {key}") from exc
    if key == "reduced.n_values":
        try:
            return tuple(int(v) for v in raw.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"comma-separated integers expected for {key}") from exc
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"real number expected for {key}, got {raw!r}") from exc


def _apply(conf: ExperimentConfig, key: str, value) -> ExperimentConfig:
    section, _, name = key.partition(".")
    if section == "network":
        if name not in ("kind", "n", "seed", "path"):
            raise ConfigError(f"unknown key {key!r}")
        return replace(conf, network=replace(conf.network, **{name: value}))
    if section == "params":
        if name not in ("a", "b", "q", "q0", "gamma", "beta0", "sigma"):
            raise ConfigError(f"unknown key {key!r}")
        try:
            return replace(conf, params=_replace_params(conf.params, **{name: value}))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if section == "run":
        if name not in ("steps", "burn_in", "replicas", "seed", "initial_kick"):
            raise ConfigError(f"unknown key {key!r}")
        return replace(conf, run=replace(conf.run, **{name: value}))
    if section == "output":
        if name == "dir":
            name = "directory"
        if name not in ("directory", "per_sector"):
            raise ConfigError(f"unknown key {key!r}")
        return replace(conf, output=replace(conf.output, **{name: value}))
    if section == "sweep":
        if name == "axis":
            return replace(conf, sweep_axis=value)
        if name == "values":
            return replace(conf, sweep_values=value)
        if name == "statistic":
            return replace(conf, sweep_statistic=value)
        raise ConfigError(f"unknown key {key!r}")
    if section == "phase" and name == "q_grid":
        return replace(conf, phase_q_grid=value)
    if section == "reduced" and name == "n_values":
        return replace(conf, reduced_n_values=value)
    if key == "jobs":
        return replace(conf, jobs=value)
    raise ConfigError(f"unknown key {key!r}")


def _replace_params(params: ModelParams, **kwargs) -> ModelParams:
    fields = {"a": params.a, "b": params.b, "q": params.q, "q0": params.q0,
              "gamma": params.gamma, "beta0": params.beta0, "sigma": params.sigma}
    fields.update(kwargs)
    return ModelParams(**fields)


def load_config(path: str | None, overrides: list[str] | None = None) -> ExperimentConfig:
    """Parse a key-value file (optional) and apply --set overrides on top."""
    conf = default_config()
    if path:
        try:
            with open(path) as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
        for lineno, line in enumerate(lines, 1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, raw = stripped.partition("=")
            key = key.strip()
            conf = _apply(conf, key, _parse_value(key, raw))
    for item in overrides or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        conf = _apply(conf, key, _parse_value(key, raw))
    return conf


def parse_overrides(conf: ExperimentConfig, overrides: list[str]) -> ExperimentConfig:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        key = key.strip()
        conf = _apply(conf, key, _parse_value(key, raw))
    return conf


def config_to_text(conf: ExperimentConfig) -> str:
    """Canonical serialization of the experiment-defining keys.

    Output destination, presentation flags and worker-pool size do not alter
    the produced data, so they stay out of the hash: re-running the same
    experiment into another directory reproduces the same stamped hash and
    byte-identical data rows.
    """
    items = {
        "network.kind": conf.network.kind,
        "network.n": conf.network.n,
        "network.seed": conf.network.seed,
        "network.path": conf.network.path,
        "params.a": conf.params.a,
        "params.b": conf.params.b,
        "params.q": conf.params.q,
        "params.q0": conf.params.q0,
        "params.gamma": conf.params.gamma,
        "params.beta0": conf.params.beta0,
        "params.sigma": conf.params.sigma,
        "run.steps": conf.run.steps,
        "run.burn_in": conf.run.burn_in,
        "run.replicas": conf.run.replicas,
        "run.seed": conf.run.seed,
        "run.initial_kick": conf.run.initial_kick,
        "sweep.axis": conf.sweep_axis,
        "sweep.values": ",".join(format(v, ".17g") for v in conf.sweep_values),
        "sweep.statistic": conf.sweep_statistic,
        "phase.q_grid": ",".join(format(v, ".17g") for v in conf.phase_q_grid),
        "reduced.n_values": ",".join(str(v) for v in conf.reduced_n_values),
    }
    lines = []
    for key in sorted(items):
        value = items[key]
        if isinstance(value, float):
            value = format(value, ".17g")
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


def config_hash(conf: ExperimentConfig) -> str:
    return hashlib.sha256(config_to_text(conf).encode()).hexdigest()[:16]


def build_network(conf: ExperimentConfig) -> IONetwork:
    net = conf.network
    if net.kind == "plain":
        return build_plain_network(net.n)
    if net.kind == "random_exp":
        return build_random_exponential_network(net.n, net.seed)
    if net.kind == "file":
        if not net.path:
            raise ConfigError("network.kind = file requires network.path")
        return load_network(net.path)
    raise ConfigError(f"unknown network.kind {net.kind!r}")


def build_params(conf: ExperimentConfig) -> ModelParams:
    return conf.params


def apply_axis(conf: ExperimentConfig, axis: str, value: float) -> ExperimentConfig:
    """New config with one swept parameter changed."""
    if axis == "gamma":
        return replace(conf, params=_replace_params(conf.params, gamma=value))
    if axis == "sigma":
        return replace(conf, params=_replace_params(conf.params, sigma=value))
    if axis == "n":
        return replace(conf, network=replace(conf.network, n=int(round(value))))
    raise ConfigError(f"unknown sweep axis {axis!r} (gamma, sigma or n)")


def replace_run(conf: ExperimentConfig, **kwargs) -> ExperimentConfig:
    return replace(conf, run=replace(conf.run, **kwargs))
