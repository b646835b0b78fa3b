"""Full nonlinear dynamics of the firm-network economy.

Each time step solves the simultaneous wage / goods market clearing system for
(log p_t, log h_t) given the predetermined production x_t, the lagged prices
p_{t-1} (which feed the extrapolative price forecast) and the current
productivities z_t.  The solved step then populates all derived quantities:
discount factor, expected prices, optimal production, the adjusted production
target, Lagrange multipliers, factor demands, and household wealth.

The overall price level is not pinned by the simultaneous clearing equations
(the n goods equations are linearly dependent), so the solver imposes a gauge:
the sum of log-prices is held at its equilibrium value.  With q = q0 the gauge
is irrelevant for all real quantities.
"""

from __future__ import annotations

import hashlib
import warnings
from dataclasses import dataclass

import numpy as np

from .equilibrium import EquilibriumState, ModelParams, solve_equilibrium
from .network import IONetwork

__all__ = [
    "ClearingContext",
    "ClearingError",
    "EconomyState",
    "NoiseProcess",
    "Simulator",
    "Trajectory",
    "clearing_residual",
    "clearing_residual_full",
    "discount_factor",
    "equilibrium_state",
    "expected_price",
    "factor_demands",
    "household_wealth",
    "lagrange_multiplier",
    "optimal_production",
    "production_target",
    "simulate",
    "step",
    "trajectory_to_csv",
]

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 100
NEWTON_MAX_HALVINGS = 25
_FD_STEP = 1e-7


class ClearingError(RuntimeError):
    """Raised when the market-clearing Newton solve fails to converge."""

    def __init__(self, message: str, t: int | None = None, residual: float = np.nan,
                 iterations: int = 0):
        super().__init__(message)
        self.t = t
        self.residual = residual
        self.iterations = iterations


class NegativeWealthWarning(UserWarning):
    """Household wealth came out non-positive (economy far out of equilibrium)."""


# ---------------------------------------------------------------------------
# elementary per-step rules
# ---------------------------------------------------------------------------

def expected_price(p_t: np.ndarray, p_prev: np.ndarray, q: float) -> np.ndarray:
    """Extrapolative forecast p_t (p_t / p_{t-1})^q, exact multiplicative form."""
    p_t = np.asarray(p_t, dtype=float)
    p_prev = np.asarray(p_prev, dtype=float)
    if np.any(p_t <= 0) or np.any(p_prev <= 0):
        raise ValueError("prices must be positive")
    return p_t * (p_t / p_prev) ** q


def discount_factor(p_t: np.ndarray, p_prev: np.ndarray, q0: float, beta0: float) -> float:
    """Discount beta0 times the geometric-mean gross inflation to the power -q0."""
    p_t = np.asarray(p_t, dtype=float)
    p_prev = np.asarray(p_prev, dtype=float)
    if np.any(p_t <= 0) or np.any(p_prev <= 0):
        raise ValueError("prices must be positive")
    mean_log_infl = np.mean(np.log(p_t) - np.log(p_prev))
    return float(beta0 * np.exp(-q0 * mean_log_infl))


def optimal_production(
    z: np.ndarray,
    p_t: np.ndarray,
    h_t: float,
    e_price: np.ndarray,
    beta: float,
    net: IONetwork,
    params: ModelParams,
) -> np.ndarray:
    """Profit-maximizing production for the next step, computed in log space.

    x*[i] = [ z_i (beta e_price_i)^b h^{-ab} prod_j p_j^{-b(1-a) w_ij} ]^{1/(1-b)},
    with the constant b^b absorbed into z.  Requires b < 1 and positive inputs.
    """
    if params.b >= 1.0:
        raise ValueError("optimal production requires b < 1")
    z = np.asarray(z, dtype=float)
    p_t = np.asarray(p_t, dtype=float)
    e_price = np.asarray(e_price, dtype=float)
    if h_t <= 0 or beta <= 0 or np.any(z <= 0) or np.any(p_t <= 0) or np.any(e_price <= 0):
        raise ValueError("optimal production needs positive inputs")
    a, b = params.a, params.b
    log_xstar = (
        np.log(z)
        + b * (np.log(beta) + np.log(e_price))
        - a * b * np.log(h_t)
        - params.c * (net.w @ np.log(p_t))
    ) / (1.0 - b)
    return np.exp(log_xstar)


def production_target(x_t: np.ndarray, x_star: np.ndarray, gamma: float) -> np.ndarray:
    """Slow adjustment: close a fraction gamma of the gap to the optimum."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    return (1.0 - gamma) * np.asarray(x_t, dtype=float) + gamma * np.asarray(x_star, dtype=float)


def lagrange_multiplier(
    x_next: np.ndarray, x_star: np.ndarray, e_price: np.ndarray, beta: float, b: float
) -> np.ndarray:
    """Cost-minimization multiplier beta e_price (x_next / x*)^{(1-b)/b}."""
    x_next = np.asarray(x_next, dtype=float)
    x_star = np.asarray(x_star, dtype=float)
    e_price = np.asarray(e_price, dtype=float)
    if beta <= 0 or np.any(x_next <= 0) or np.any(x_star <= 0) or np.any(e_price <= 0):
        raise ValueError("lagrange multiplier needs positive inputs")
    return beta * e_price * (x_next / x_star) ** ((1.0 - b) / b)


def factor_demands(
    lam: np.ndarray,
    x_next: np.ndarray,
    p_t: np.ndarray,
    h_t: float,
    net: IONetwork,
    params: ModelParams,
) -> tuple[np.ndarray, np.ndarray]:
    """Labor and intermediate-input demands for the production target.

    ell[i] = a b lam_i x_next_i / h,  psi[i, j] = (1-a) b w_ij lam_i x_next_i / p_j.
    """
    lam = np.asarray(lam, dtype=float)
    x_next = np.asarray(x_next, dtype=float)
    p_t = np.asarray(p_t, dtype=float)
    if h_t <= 0 or np.any(lam <= 0) or np.any(x_next <= 0) or np.any(p_t <= 0):
        raise ValueError("factor demands need positive inputs")
    spend = lam * x_next
    ell = params.a * params.b * spend / h_t
    psi = params.c * net.w * spend[:, None] / p_t[None, :]
    return ell, psi


def household_wealth(
    x: np.ndarray, p: np.ndarray, lam: np.ndarray, x_next: np.ndarray, params: ModelParams
) -> float:
    """Instantaneous wealth: nominal sales minus intermediate-input spending.

    A non-positive result is reported with a warning (pathologically
    out-of-equilibrium economy), never silently accepted.
    """
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    sales = float(np.sum(x * p))
    wealth = sales - params.c * float(np.sum(np.asarray(lam) * np.asarray(x_next)))
    if wealth <= 0:
        warnings.warn("household wealth is non-positive", NegativeWealthWarning, stacklevel=2)
    return wealth


# ---------------------------------------------------------------------------
# the market-clearing system
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ClearingContext:
    """Known quantities entering the clearing solve at one time step.

    x_sold is the predetermined production sold this step, p_lag the previous
    prices feeding the price forecast, z the current productivities, and
    gauge_target the pinned value of sum(log p).
    """

    net: IONetwork
    params: ModelParams
    x_sold: np.ndarray
    p_lag: np.ndarray
    z: np.ndarray
    gauge_target: float

    @property
    def log_p_lag(self) -> np.ndarray:
        return np.log(self.p_lag)


def _clearing_parts(ctx: ClearingContext, log_p: np.ndarray, log_h: np.ndarray) -> dict:
    """Evaluate every derived per-step quantity for (batched) trial points.

    ``log_p`` may be (n,) or (m, n); ``log_h`` scalar or (m,).  Returns raw
    arrays; overflow produces non-finite entries that the Newton damping
    treats as a rejected trial.
    """
    pr = ctx.params
    a, b, q, q0, gamma = pr.a, pr.b, pr.q, pr.q0, pr.gamma
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        dlp = log_p - ctx.log_p_lag
        log_beta = np.log(pr.beta0) - q0 * dlp.mean(axis=-1)
        log_ep = log_p + q * dlp
        log_xstar = (
            np.log(ctx.z)
            + b * (log_beta[..., None] + log_ep)
            - a * b * np.asarray(log_h)[..., None]
            - pr.c * (log_p @ ctx.net.w.T)
        ) / (1.0 - b)
        xstar = np.exp(log_xstar)
        x_next = (1.0 - gamma) * ctx.x_sold + gamma * xstar
        lam = np.exp(log_beta[..., None] + log_ep) * (x_next / xstar) ** ((1.0 - b) / b)
        spend = lam * x_next
        v_nominal = ctx.x_sold * np.exp(log_p)
        goods = (v_nominal - v_nominal.mean(axis=-1, keepdims=True)) - pr.c * (
            spend @ ctx.net.w - spend.mean(axis=-1, keepdims=True)
        )
        wage = np.exp(log_h) - a * b * spend.sum(axis=-1)
        gauge = log_p.sum(axis=-1) - ctx.gauge_target
    return {
        "log_beta": log_beta,
        "log_ep": log_ep,
        "xstar": xstar,
        "x_next": x_next,
        "lam": lam,
        "goods": goods,
        "wage": wage,
        "gauge": gauge,
    }


def _residual_vector(parts: dict) -> np.ndarray:
    """Square residual: n-1 goods equations, the wage equation, the gauge."""
    goods = parts["goods"]
    return np.concatenate(
        [goods[..., :-1], parts["wage"][..., None], parts["gauge"][..., None]], axis=-1
    )


def clearing_residual(log_p: np.ndarray, h: float, ctx: ClearingContext) -> np.ndarray:
    """(n+1)-vector of clearing residuals at a trial point (log p, h).

    The n goods equations sum to zero identically, so only the first n-1 are
    returned; the redundant one is replaced by the gauge residual
    sum(log p) - gauge_target.  Entry n-1 is the wage residual.
    """
    log_p = np.asarray(log_p, dtype=float)
    if h <= 0:
        raise ValueError("wage must be positive")
    return _residual_vector(_clearing_parts(ctx, log_p, np.log(h)))


def clearing_residual_full(log_p: np.ndarray, h: float, ctx: ClearingContext):
    """All n goods residuals plus the wage and gauge residuals (diagnostics)."""
    log_p = np.asarray(log_p, dtype=float)
    if h <= 0:
        raise ValueError("wage must be positive")
    parts = _clearing_parts(ctx, log_p, np.log(h))
    return parts["goods"], float(parts["wage"]), float(parts["gauge"])


def _solve_clearing(
    ctx: ClearingContext,
    log_p0: np.ndarray,
    log_h0: float,
    tol: float = NEWTON_TOL,
    max_iter: int = NEWTON_MAX_ITER,
) -> tuple[np.ndarray, float, dict, int, float]:
    """Damped Newton on u = (log p, log h) with a fresh FD Jacobian per iteration.

    Returns (log_p, log_h, parts-at-solution, iterations, max residual).
    Raises ClearingError on non-convergence; never returns a non-clearing
    point.
    """
    n = ctx.net.n
    u = np.concatenate([log_p0, [log_h0]])

    def residual_at(u_vec: np.ndarray) -> tuple[np.ndarray, dict]:
        parts = _clearing_parts(ctx, u_vec[..., :n], u_vec[..., n])
        return _residual_vector(parts), parts

    res, parts = residual_at(u)
    err = float(np.max(np.abs(res))) if np.all(np.isfinite(res)) else np.inf
    for iteration in range(max_iter):
        if err < tol:
            return u[:n], float(u[n]), parts, iteration, err
        if not np.isfinite(err):
            raise ClearingError("non-finite clearing residual at the starting point",
                                residual=err, iterations=iteration)
        # batched forward differences: all n+1 perturbed points in one evaluation
        batch = u[None, :] + _FD_STEP * np.eye(n + 1)
        res_batch, _ = residual_at(batch)
        jac = (res_batch - res[None, :]).T / _FD_STEP
        if not np.all(np.isfinite(jac)):
            raise ClearingError("non-finite clearing Jacobian", residual=err,
                                iterations=iteration)
        try:
            delta = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise ClearingError("singular clearing Jacobian", residual=err,
                                iterations=iteration) from exc

        scale = 1.0
        for _ in range(NEWTON_MAX_HALVINGS):
            trial = u + scale * delta
            trial_res, trial_parts = residual_at(trial)
            trial_err = (
                float(np.max(np.abs(trial_res)))
                if np.all(np.isfinite(trial_res))
                else np.inf
            )
            if trial_err < err:
                u, res, parts, err = trial, trial_res, trial_parts, trial_err
                break
            scale *= 0.5
        else:
            raise ClearingError(
                f"clearing solve stalled at residual {err:.3e} (damping floor)",
                residual=err, iterations=iteration,
            )
    if err < tol:
        return u[:n], float(u[n]), parts, max_iter, err
    raise ClearingError(
        f"clearing solve did not converge in {max_iter} iterations "
        f"(residual {err:.3e})",
        residual=err, iterations=max_iter,
    )


# ---------------------------------------------------------------------------
# dynamic state and the step map
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class EconomyState:
    """Cleared state of the economy at time t.

    x is the quantity sold at t (decided at t-1), p the prices cleared at t,
    p_prev the prices at t-1 (feeding the forecast), z the productivities,
    lam the Lagrange multipliers, x_next the production decided at t for t+1,
    h the wage, M household wealth, beta the discount factor, ell labor
    inputs and psi the matrix of intermediate inputs.
    """

    t: int
    x: np.ndarray
    p: np.ndarray
    p_prev: np.ndarray
    z: np.ndarray
    lam: np.ndarray
    x_next: np.ndarray
    h: float
    M: float
    beta: float
    ell: np.ndarray
    psi: np.ndarray
    newton_iters: int = 0
    max_residual: float = 0.0


@dataclass(frozen=True)
class NoiseProcess:
    """I.i.d. Gaussian shocks on log-productivity, one n-vector per step.

    Zero mean, variance sigma^2 per component, independent across components
    and steps.  The draws are sigma times a standard normal stream so that
    runs with the same seed and different sigma see proportional shocks.
    """

    sigma: float
    seed: int
    distribution: str = "gaussian_log"

    def __post_init__(self) -> None:
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")


@dataclass(eq=False)
class Trajectory:
    """Per-step observables of one simulation run.

    xi holds the per-sector log-deviations of sold quantities from
    equilibrium, one row per recorded step.
    """

    t: np.ndarray
    xi: np.ndarray
    output_real: np.ndarray
    mean_xi: np.ndarray
    wealth: np.ndarray
    consumption_real: np.ndarray
    log_utility: np.ndarray
    wage: np.ndarray
    price_level: np.ndarray
    newton_iters: np.ndarray
    max_residual: np.ndarray
    burn_in: int
    config_hash: str
    equilibrium: EquilibriumState
    output_eq: float
    consumption_eq: float

    def __len__(self) -> int:
        return len(self.t)


class Simulator:
    """Step engine bound to one (network, params, z_bar) configuration.

    Solves and caches the equilibrium once; safe to instantiate one engine per
    concurrent worker (no shared mutable state, RNG is owned by the caller).
    """

    def __init__(self, net: IONetwork, params: ModelParams,
                 z_bar: np.ndarray | None = None,
                 tol: float = NEWTON_TOL, max_iter: int = NEWTON_MAX_ITER):
        self.net = net
        self.params = params
        self.equilibrium = solve_equilibrium(net, params, z_bar)
        self.z_bar = self.equilibrium.z_bar
        self.gauge_target = float(np.sum(np.log(self.equilibrium.p_eq)))
        self.tol = tol
        self.max_iter = max_iter

    def equilibrium_state(self) -> EconomyState:
        """The stationary state corresponding to the solved equilibrium."""
        eq, pr = self.equilibrium, self.params
        lam = pr.beta0 * eq.p_eq
        ell, psi = factor_demands(lam, eq.x_eq, eq.p_eq, eq.h_eq, self.net, pr)
        m = float(np.sum(eq.V_eq)) - pr.c * float(np.sum(lam * eq.x_eq))
        return EconomyState(
            t=0,
            x=eq.x_eq.copy(),
            p=eq.p_eq.copy(),
            p_prev=eq.p_eq.copy(),
            z=self.z_bar.copy(),
            lam=lam,
            x_next=eq.x_eq.copy(),
            h=eq.h_eq,
            M=m,
            beta=pr.beta0,
            ell=ell,
            psi=psi,
        )

    def context_for(self, state: EconomyState, shock: np.ndarray) -> ClearingContext:
        """Clearing context for the step following ``state``."""
        z_new = self.z_bar * np.exp(np.asarray(shock, dtype=float))
        return ClearingContext(
            net=self.net,
            params=self.params,
            x_sold=state.x_next,
            p_lag=state.p,
            z=z_new,
            gauge_target=self.gauge_target,
        )

    def step(self, state: EconomyState, shock: np.ndarray) -> EconomyState:
        """Advance one period: draw-in the shock, clear all markets, rebuild state."""
        ctx = self.context_for(state, shock)
        pr = self.params
        try:
            log_p, log_h, parts, iters, err = _solve_clearing(
                ctx, np.log(state.p), np.log(state.h), self.tol, self.max_iter
            )
        except ClearingError:
            # deep in the chaotic phase the warm start can sit in a bad basin;
            # retry once from the flat gauge-consistent price vector
            try:
                log_p, log_h, parts, iters, err = _solve_clearing(
                    ctx,
                    np.full(self.net.n, self.gauge_target / self.net.n),
                    np.log(self.equilibrium.h_eq),
                    self.tol,
                    self.max_iter,
                )
            except ClearingError as exc:
                exc.t = state.t + 1
                raise
        p = np.exp(log_p)
        h = float(np.exp(log_h))
        lam = parts["lam"]
        x_next = parts["x_next"]
        ell, psi = factor_demands(lam, x_next, p, h, self.net, pr)
        m = household_wealth(ctx.x_sold, p, lam, x_next, pr)
        return EconomyState(
            t=state.t + 1,
            x=ctx.x_sold,
            p=p,
            p_prev=state.p.copy(),
            z=ctx.z,
            lam=lam,
            x_next=x_next,
            h=h,
            M=m,
            beta=float(np.exp(parts["log_beta"])),
            ell=ell,
            psi=psi,
            newton_iters=iters,
            max_residual=err,
        )

    def simulate(
        self,
        noise: NoiseProcess,
        steps: int,
        burn_in: int = 0,
        initial_kick: float = 1e-6,
        config_hash: str | None = None,
    ) -> Trajectory:
        """Run ``steps`` periods from the kicked equilibrium; record all steps.

        The initial condition is the equilibrium with a uniform random
        log-perturbation of scale ``initial_kick`` on the predetermined
        production, so the unstable phase is excited even at sigma = 0.
        Fully deterministic for a fixed seed.
        """
        if not steps > burn_in >= 0:
            raise ValueError("need steps > burn_in >= 0")
        rng = np.random.default_rng(noise.seed)
        state = self.equilibrium_state()
        # the uniform draw always happens so the shock stream does not depend
        # on whether a kick was requested
        kick = rng.uniform(-1.0, 1.0, self.net.n) * initial_kick
        state.x_next = state.x_next * np.exp(kick)

        eq = self.equilibrium
        n = self.net.n
        log_x_eq = np.log(eq.x_eq)
        inv_n = 1.0 / n
        output_eq = float(np.sum(eq.V_eq))
        m_eq = output_eq - self.params.c * self.params.beta0 * output_eq
        consumption_eq = float(m_eq * inv_n * np.sum(1.0 / eq.p_eq))

        cols = {
            name: np.empty(steps)
            for name in (
                "output_real", "mean_xi", "wealth", "consumption_real",
                "log_utility", "wage", "price_level", "max_residual",
            )
        }
        iters = np.empty(steps, dtype=int)
        xi_all = np.empty((steps, n))
        for k in range(steps):
            shock = noise.sigma * rng.standard_normal(n)
            try:
                state = self.step(state, shock)
            except ClearingError as exc:
                raise ClearingError(
                    f"simulation failed at step {exc.t}: {exc}",
                    t=exc.t, residual=exc.residual, iterations=exc.iterations,
                ) from exc
            xi = np.log(state.x) - log_x_eq
            xi_all[k] = xi
            cols["output_real"][k] = float(np.sum(eq.V_eq * np.exp(xi)))
            cols["mean_xi"][k] = float(xi.mean())
            cols["wealth"][k] = state.M
            cols["consumption_real"][k] = state.M * inv_n * float(np.sum(1.0 / state.p))
            cols["log_utility"][k] = n * np.log(state.M * inv_n) - float(
                np.sum(np.log(state.p))
            )
            cols["wage"][k] = state.h
            cols["price_level"][k] = float(np.exp(np.mean(np.log(state.p))))
            iters[k] = state.newton_iters
            cols["max_residual"][k] = state.max_residual
        if not all(np.all(np.isfinite(v)) for v in cols.values()):
            raise ClearingError("non-finite observable recorded")
        return Trajectory(
            t=np.arange(1, steps + 1),
            xi=xi_all,
            output_real=cols["output_real"],
            mean_xi=cols["mean_xi"],
            wealth=cols["wealth"],
            consumption_real=cols["consumption_real"],
            log_utility=cols["log_utility"],
            wage=cols["wage"],
            price_level=cols["price_level"],
            newton_iters=iters,
            max_residual=cols["max_residual"],
            burn_in=burn_in,
            config_hash=config_hash or self._default_hash(noise, steps, burn_in, initial_kick),
            equilibrium=eq,
            output_eq=output_eq,
            consumption_eq=consumption_eq,
        )

    def _default_hash(self, noise: NoiseProcess, steps: int, burn_in: int,
                      initial_kick: float) -> str:
        pr = self.params
        blob = repr((
            self.net.n, pr.a, pr.b, pr.q, pr.q0, pr.gamma, pr.beta0,
            noise.sigma, noise.seed, steps, burn_in, initial_kick,
        )).encode() + self.net.w.tobytes() + self.z_bar.tobytes()
        return hashlib.sha256(blob).hexdigest()[:16]


def equilibrium_state(net: IONetwork, params: ModelParams,
                      z_bar: np.ndarray | None = None) -> EconomyState:
    """Stationary state of the solved equilibrium (convenience wrapper)."""
    return Simulator(net, params, z_bar).equilibrium_state()


def step(state: EconomyState, net: IONetwork, params: ModelParams,
         shock: np.ndarray, z_bar: np.ndarray | None = None) -> EconomyState:
    """One period of the dynamics.  Builds a throwaway engine; prefer
    :class:`Simulator` in loops so the equilibrium is solved once."""
    return Simulator(net, params, z_bar).step(state, shock)


def simulate(
    net: IONetwork,
    params: ModelParams,
    z_bar: np.ndarray | None,
    noise: NoiseProcess,
    steps: int,
    burn_in: int = 0,
    initial_kick: float = 1e-6,
    config_hash: str | None = None,
) -> Trajectory:
    """Simulate ``steps`` periods from the kicked equilibrium (see Simulator.simulate)."""
    return Simulator(net, params, z_bar).simulate(
        noise, steps, burn_in, initial_kick, config_hash
    )


def trajectory_to_csv(traj: Trajectory, path, per_sector: bool = False) -> None:
    """Write one row per retained step; header carries the config hash."""
    names = ["t", "aggregate_output", "mean_xi", "consumption_real", "wage",
             "price_level", "newton_iters", "max_residual"]
    columns = [traj.t, traj.output_real, traj.mean_xi, traj.consumption_real,
               traj.wage, traj.price_level, traj.newton_iters, traj.max_residual]
    if per_sector:
        names += [f"xi_{i + 1}" for i in range(traj.xi.shape[1])]
        columns += [traj.xi[:, i] for i in range(traj.xi.shape[1])]
    with open(path, "w") as fh:
        fh.write(f"# config_hash={traj.config_hash}\n")
        fh.write(f"# burn_in={traj.burn_in}\n")
        fh.write(",".join(names) + "\n")
        for row in zip(*columns):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")
