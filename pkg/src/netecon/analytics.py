"""Observables and summary statistics over trajectories.

Aggregate output (flat-log and equilibrium-price weightings), level and
first-difference volatility, average absolute pairwise correlations,
consumption and log-utility series, dominant-period detection via the
periodogram, and a reproducible parameter-sweep runner.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import periodogram

from .simulator import Trajectory

__all__ = [
    "PeriodEstimate",
    "SweepPoint",
    "SweepResult",
    "aggregate_output",
    "amplitude_envelope",
    "avg_abs_correlation",
    "consumption_series",
    "default_burn_in",
    "dominant_period",
    "linearized_volatility",
    "periodogram_to_csv",
    "run_sweep",
    "volatility",
    "volatility_diff",
]


def aggregate_output(traj: Trajectory, weighting: str = "flat_log") -> np.ndarray:
    """Aggregate output series.

    "flat_log": the flat average of per-sector log-deviations (default for
    volatility work).  "equilibrium_price": real output at base prices,
    sum_i x_t[i] p_eq[i].
    """
    if traj.xi.size == 0:
        raise ValueError("trajectory carries no per-sector data")
    if weighting == "flat_log":
        return traj.mean_xi
    if weighting == "equilibrium_price":
        return traj.output_real
    raise ValueError(f"unknown weighting {weighting!r}")


def volatility(series: np.ndarray, burn_in: int) -> float:
    """Standard deviation of the series level over the stationary window."""
    series = np.asarray(series, dtype=float)
    if len(series) <= burn_in + 100:
        raise ValueError("series too short beyond burn-in")
    return float(np.std(series[burn_in:]))


def volatility_diff(series: np.ndarray, burn_in: int) -> float:
    """Standard deviation of first differences over the stationary window."""
    series = np.asarray(series, dtype=float)
    if len(series) <= burn_in + 100:
        raise ValueError("series too short beyond burn-in")
    return float(np.std(np.diff(series[burn_in:])))


def avg_abs_correlation(traj: Trajectory, burn_in: int) -> float:
    """Mean over sector pairs of |Pearson correlation| of the log-deviations.

    Zero-variance sectors are excluded from the pairs (a diagnostic warning
    records how many); NaN when fewer than two sectors survive.
    """
    xi = traj.xi[burn_in:]
    stds = xi.std(axis=0)
    keep = stds > 0
    dropped = int(np.sum(~keep))
    if dropped:
        warnings.warn(f"{dropped} zero-variance sectors excluded from correlations",
                      stacklevel=2)
    xi = xi[:, keep]
    n = xi.shape[1]
    if n < 2:
        return float("nan")
    corr = np.corrcoef(xi.T)
    iu = np.triu_indices(n, k=1)
    return float(np.mean(np.abs(corr[iu])))


def consumption_series(traj: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """(real total consumption, log-utility) series.

    Consumption is sum_i M_t / (n p_t[i]); both series are recorded during
    the run from wealth and prices.  Non-positive wealth is flagged.
    """
    if np.any(traj.wealth <= 0):
        warnings.warn("non-positive household wealth in trajectory", stacklevel=2)
    return traj.consumption_real, traj.log_utility


@dataclass(frozen=True)
class PeriodEstimate:
    """Dominant period with its prominence (peak power over median power)."""

    period: float | None
    prominence: float
    frequency: float


def dominant_period(series: np.ndarray, burn_in: int,
                    min_prominence: float = 50.0) -> PeriodEstimate:
    """Period of the largest nonzero-frequency periodogram peak.

    The series is mean-removed and Hann-tapered.  The peak must stand out
    from the spectral floor: prominence is the ratio of peak power to the
    median power, and a flat spectrum (prominence below ``min_prominence``,
    which white noise essentially never exceeds) yields period None.
    Needs at least 2048 post-burn-in samples.
    """
    series = np.asarray(series, dtype=float)
    x = series[burn_in:]
    if len(x) < 2048:
        raise ValueError("need at least 2048 post-burn-in samples")
    freqs, power = periodogram(x - x.mean(), window="hann", detrend=False)
    freqs, power = freqs[1:], power[1:]
    k = int(np.argmax(power))
    floor = float(np.median(power))
    prominence = float(power[k] / floor) if floor > 0 else float("inf")
    if prominence < min_prominence:
        return PeriodEstimate(period=None, prominence=prominence, frequency=float(freqs[k]))
    return PeriodEstimate(period=float(1.0 / freqs[k]), prominence=prominence,
                          frequency=float(freqs[k]))


def amplitude_envelope(series: np.ndarray, window: int = 6) -> np.ndarray:
    """Rolling standard deviation of the series, one value per window start.

    The unstable phase superposes a fast oscillation (a few steps) on a slow
    modulation of its amplitude; the business cycle the eye picks out of an
    output plot is that envelope.  ``window`` should cover roughly one fast
    period.
    """
    series = np.asarray(series, dtype=float)
    if window < 2 or len(series) <= window:
        raise ValueError("window must cover at least two samples of the series")
    cum = np.cumsum(np.insert(series, 0, 0.0))
    cum2 = np.cumsum(np.insert(series**2, 0, 0.0))
    mean = (cum[window:] - cum[:-window]) / window
    mean2 = (cum2[window:] - cum2[:-window]) / window
    return np.sqrt(np.maximum(mean2 - mean**2, 0.0))


def default_burn_in(max_growth: float, steps: int) -> int:
    """Burn-in heuristic: longer equilibration near criticality.

    max(1000, 20/(1-max|alpha|)) in the stable phase, 1000 when unstable;
    capped at half the run.
    """
    if max_growth < 1.0:
        burn = max(1000, int(np.ceil(20.0 / (1.0 - max_growth))))
    else:
        burn = 1000
    return min(burn, steps // 2)


def periodogram_to_csv(series: np.ndarray, burn_in: int, path,
                       config_hash: str = "") -> None:
    """Write the mean-removed Hann-tapered periodogram as frequency, power rows."""
    series = np.asarray(series, dtype=float)
    x = series[burn_in:]
    freqs, power = periodogram(x - x.mean(), window="hann", detrend=False)
    with open(path, "w") as fh:
        if config_hash:
            fh.write(f"# config_hash={config_hash}\n")
        fh.write("frequency,power\n")
        for f, p in zip(freqs, power):
            fh.write(f"{f:.17g},{p:.17g}\n")


def linearized_volatility(net, params, sigma: float) -> float:
    """Stationary flat-log aggregate volatility predicted by the linearized map.

    Solves the discrete Lyapunov equation for the state covariance of
    state <- S state + B eps and returns the standard deviation of mean(xi).
    Only defined in the stable phase.
    """
    from scipy.linalg import solve_discrete_lyapunov

    from .stability import linear_state_map

    s_map, b_map = linear_state_map(net, params)
    radius = float(np.max(np.abs(np.linalg.eigvals(s_map))))
    if radius >= 1.0:
        raise ValueError(f"linearized map is unstable (spectral radius {radius:.4f})")
    q = sigma**2 * (b_map @ b_map.T)
    cov = solve_discrete_lyapunov(s_map, q)
    n = net.n
    weights = np.zeros(s_map.shape[0])
    weights[:n] = 1.0 / n
    return float(np.sqrt(weights @ cov @ weights))


# ---------------------------------------------------------------------------
# sweep runner
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SweepPoint:
    value: float
    statistic: float
    std_err: float
    replicas: int
    seeds: tuple[int, ...]
    failed: int = 0
    extras: dict = field(default_factory=dict)


@dataclass(eq=False)
class SweepResult:
    axis: str
    points: list[SweepPoint]

    def to_csv(self, path, config_hash: str = "") -> None:
        extras = sorted({k for p in self.points for k in p.extras})
        with open(path, "w") as fh:
            if config_hash:
                fh.write(f"# config_hash={config_hash}\n")
            fh.write(f"# axis={self.axis}\n")
            fh.write("axis_value,statistic,std_err,replicas,failed_count")
            for name in extras:
                fh.write(f",{name}")
            fh.write("\n")
            for p in self.points:
                row = [format(p.value, ".17g"), format(p.statistic, ".17g"),
                       format(p.std_err, ".17g"), str(p.replicas), str(p.failed)]
                row += [format(p.extras.get(name, float("nan")), ".17g")
                        for name in extras]
                fh.write(",".join(row) + "\n")


def _cell_seed(base_seed: int, value_index: int) -> int:
    return int(np.random.SeedSequence(entropy=(int(base_seed), int(value_index)))
               .generate_state(1)[0])


def _run_cell(args) -> dict:
    """One (axis value, replica) simulation; returns the statistic bundle."""
    from . import config as cfg

    base, axis, value, seed = args
    conf = cfg.apply_axis(base, axis, value)
    conf = cfg.replace_run(conf, seed=seed)
    net = cfg.build_network(conf)
    params = cfg.build_params(conf)
    from .simulator import NoiseProcess, Simulator

    sim = Simulator(net, params)
    traj = sim.simulate(
        NoiseProcess(sigma=params.sigma, seed=seed),
        steps=conf.run.steps,
        burn_in=conf.run.burn_in,
        initial_kick=conf.run.initial_kick,
        config_hash=cfg.config_hash(conf),
    )
    burn = traj.burn_in
    return {
        "volatility": volatility(traj.mean_xi, burn),
        "volatility_diff": volatility_diff(traj.mean_xi, burn),
        "correlation": avg_abs_correlation(traj, burn),
        "mean_output": float(np.mean(traj.output_real[burn:])),
        "mean_consumption": float(np.mean(traj.consumption_real[burn:])),
        "output_eq": traj.output_eq,
        "consumption_eq": traj.consumption_eq,
    }


def run_sweep(base_config, axis: str, values, replicas: int, seeds,
              statistic: str = "volatility", jobs: int = 1) -> SweepResult:
    """Replicated simulations along one parameter axis.

    ``seeds`` lists one base seed per replica; the cell seed mixes the base
    seed with the value index, so the whole sweep is reproducible from
    (config, seeds).  Failed cells are recorded, not fatal.
    """
    values = list(values)
    seeds = list(seeds)
    if len(seeds) != replicas:
        raise ValueError("need exactly one base seed per replica")
    tasks = []
    for i, value in enumerate(values):
        for base_seed in seeds:
            tasks.append((base_config, axis, float(value), _cell_seed(base_seed, i)))

    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = []
            for fut in [pool.submit(_run_cell, t) for t in tasks]:
                try:
                    outcomes.append(fut.result())
                except Exception:
                    outcomes.append(None)
    else:
        outcomes = []
        for t in tasks:
            try:
                outcomes.append(_run_cell(t))
            except Exception:
                outcomes.append(None)

    points = []
    for i, value in enumerate(values):
        cell = outcomes[i * replicas:(i + 1) * replicas]
        cell_seeds = tuple(_cell_seed(s, i) for s in seeds)
        good = [c for c in cell if c is not None]
        failed = len(cell) - len(good)
        if not good:
            points.append(SweepPoint(value=float(value), statistic=float("nan"),
                                     std_err=float("nan"), replicas=replicas,
                                     seeds=cell_seeds, failed=failed))
            continue
        stats = np.array([c[statistic] for c in good])
        std_err = float(stats.std(ddof=1) / np.sqrt(len(stats))) if len(stats) > 1 else float("nan")
        extras = {k: float(np.mean([c[k] for c in good])) for k in good[0] if k != statistic}
        points.append(SweepPoint(value=float(value), statistic=float(stats.mean()),
                                 std_err=std_err, replicas=replicas,
                                 seeds=cell_seeds, failed=failed, extras=extras))
    return SweepResult(axis=axis, points=points)
