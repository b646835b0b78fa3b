"""Linear stability of the equilibrium: modal quadratics, state-space maps,
critical lines.

Around equilibrium the dynamics of the log-deviations (prices pi, quantities
xi, multipliers mu) reduces to three coupled n-dimensional linear equations in
the unknowns (mu_t, pi_t, xi_{t+1}) given (xi_t, pi_{t-1}).  For a normal
input-output matrix the system diagonalizes in the eigenbasis of W and each
non-uniform eigenvalue s contributes a second-order difference equation
A2 xi_{t+1} + A1 xi_t + A0 xi_{t-1} = 0; the uniform mode is first order and
always stable.  For general W the block system is eliminated numerically into
a one-step state-space map on (xi_t, pi_{t-1}).

The simultaneous-clearing equations leave the overall price level free (the
V-weighted clearing rows sum to zero), so the last clearing row is replaced by
the gauge sum(pi_t) = 0, mirroring the nonlinear solver.  In the lagged
variant the system is regular and the exact monetary-unit-symmetry eigenpair
(eigenvalue one) is excluded from the verdict instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .equilibrium import EquilibriumState, ModelParams, solve_equilibrium
from .network import IONetwork, is_normal

__all__ = [
    "CriticalLine",
    "CriticalPoint",
    "LinearizedSystem",
    "ModeQuadratic",
    "ModeResult",
    "StabilityReport",
    "analyze_stability",
    "build_linearized",
    "critical_gamma",
    "critical_gamma_b1_approx",
    "critical_gamma_closed_form",
    "critical_line_to_csv",
    "hopf_angle",
    "linear_state_map",
    "max_growth_rate_modal",
    "mode_quadratic",
    "mode_roots",
    "report_to_csv",
    "state_space_matrix",
    "state_space_spectrum",
    "trace_critical_line",
    "uniform_mode_multiplier",
]

PROJECTOR_TOL = 1e-10
REAL_ROOT_IMAG_TOL = 1e-6
UNIT_EIG_TOL = 1e-9


# ---------------------------------------------------------------------------
# linearized block system
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class LinearizedSystem:
    """Matrices of the linearized dynamics around a solved equilibrium."""

    net: IONetwork
    params: ModelParams
    equilibrium: EquilibriumState
    W_tilde: np.ndarray
    J0: np.ndarray
    J1: np.ndarray
    J2: np.ndarray
    variant: str = "simultaneous"


def build_linearized(
    net: IONetwork,
    params: ModelParams,
    equilibrium: EquilibriumState | None = None,
    variant: str = "simultaneous",
) -> LinearizedSystem:
    """Construct W_tilde and the projectors J0, J1, J2 from the equilibrium.

    Validates the projector identities (J1 J2 = J1, J2 J1 = J2, J1 Wt = J1,
    J2 Wt = J2) and the monetary-unit-symmetry identity: the linearized
    equations must be satisfied exactly by xi = 0, mu = pi = uniform.
    Violations signal an inconsistent equilibrium solve.
    """
    if variant not in ("simultaneous", "lagged"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "lagged" and params.beta0 != 1.0:
        raise ValueError("the lagged variant is derived for beta0 = 1")
    if equilibrium is None:
        equilibrium = solve_equilibrium(net, params)
    n = net.n
    v = equilibrium.V_eq
    w_tilde = net.w.T * v[None, :] / v[:, None]
    j0 = np.full((n, n), 1.0 / n)
    j1 = np.tile(v / v.sum(), (n, 1))
    j2 = v[None, :] / (n * v[:, None])

    def _check(lhs: np.ndarray, rhs: np.ndarray, label: str) -> None:
        err = float(np.max(np.abs(lhs - rhs)))
        if err > PROJECTOR_TOL:
            raise ArithmeticError(f"projector identity {label} violated by {err:.3e}")

    _check(j1 @ j2, j1, "J1 J2 = J1")
    _check(j2 @ j1, j2, "J2 J1 = J2")
    _check(j1 @ w_tilde, j1, "J1 Wt = J1")
    _check(j2 @ w_tilde, j2, "J2 Wt = J2")

    lin = LinearizedSystem(net, params, equilibrium, w_tilde, j0, j1, j2, variant)
    _check_mus_identity(lin)
    return lin


def _blocks(lin: LinearizedSystem):
    """Block matrices of the linear system M u = N k + E eps.

    Unknowns u = (mu_t, pi_t, xi_{t+1}); knowns k = (xi_t, pi_{t-1}) for the
    simultaneous variant, (xi_t, pi_{t-1}, y_{t-1}) with
    y = xi + pi - (1-a) b mu for the lagged variant.
    """
    pr = lin.params
    n = lin.net.n
    a, b, q, q0, gamma = pr.a, pr.b, pr.q, pr.q0, pr.gamma
    c = pr.c
    k_adj = gamma * b / (1.0 - b)
    eye = np.eye(n)
    zero = np.zeros((n, n))

    m1 = np.hstack([eye - a * lin.J1, -(1.0 - a) * lin.net.w,
                    -((1.0 - b) / b * eye + a * lin.J1)])
    m2 = np.hstack([k_adj * eye, -k_adj * ((1.0 + q) * eye - q0 * lin.J0),
                    (1.0 - gamma) * eye])
    n1 = [zero, zero]
    n2 = [(1.0 - gamma) * eye, -k_adj * (q * eye - q0 * lin.J0)]
    if lin.variant == "simultaneous":
        coupling = c * pr.beta0 * (lin.W_tilde - lin.J2)
        m3 = np.hstack([-coupling, eye - lin.J2, -coupling])
        n3 = [-(eye - lin.J2), zero]
        n_known = 2 * n
    else:
        coupling = c * (lin.W_tilde)
        m3 = np.hstack([-coupling, eye, -coupling])
        n1.append(zero)
        n2.append(zero)
        n3 = [-(eye + c * lin.J2), zero, lin.J2]
        n_known = 3 * n
    m_mat = np.vstack([m1, m2, m3])
    n_mat = np.vstack([np.hstack(n1), np.hstack(n2), np.hstack(n3)])
    e_mat = np.vstack([-(1.0 / b) * eye, zero, zero])
    return m_mat, n_mat, e_mat, n_known


def _check_mus_identity(lin: LinearizedSystem) -> None:
    """Uniform price shift must solve the system exactly (xi = 0, mu = pi = 1)."""
    n = lin.net.n
    m_mat, n_mat, _, _ = _blocks(lin)
    ones, zeros = np.ones(n), np.zeros(n)
    u = np.concatenate([ones, ones, zeros])
    if lin.variant == "simultaneous":
        k = np.concatenate([zeros, ones])
    else:
        k = np.concatenate([zeros, ones, (1.0 - lin.params.c) * ones])
    res = float(np.max(np.abs(m_mat @ u - n_mat @ k)))
    if res > PROJECTOR_TOL:
        raise ArithmeticError(
            f"monetary-unit symmetry identity violated by {res:.3e}"
        )


def _state_space_solution(lin: LinearizedSystem) -> tuple[np.ndarray, np.ndarray]:
    """One-step map S on the state and the noise input matrix B.

    State is (xi_t, pi_{t-1}) for the simultaneous variant (dimension 2n,
    with the last clearing row replaced by the gauge sum(pi_t) = 0) and
    (xi_t, pi_{t-1}, y_{t-1}) for the lagged variant (dimension 3n).
    """
    n = lin.net.n
    m_mat, n_mat, e_mat, n_known = _blocks(lin)
    if lin.variant == "simultaneous":
        # the V-weighted clearing rows sum to zero; swap the redundant one
        # for the gauge row pinning the price level
        gauge_row = 3 * n - 1
        m_mat[gauge_row] = 0.0
        m_mat[gauge_row, n:2 * n] = 1.0
        n_mat[gauge_row] = 0.0
        e_mat[gauge_row] = 0.0
    try:
        sol = np.linalg.solve(m_mat, np.hstack([n_mat, e_mat]))
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(
            "singular linearized block system outside the gauge direction"
        ) from exc
    u_known, u_noise = sol[:, :n_known], sol[:, n_known:]
    xi_next = u_known[2 * n:3 * n]
    pi_now = u_known[n:2 * n]
    if lin.variant == "simultaneous":
        s_map = np.vstack([xi_next, pi_now])
        b_map = np.vstack([u_noise[2 * n:3 * n], u_noise[n:2 * n]])
    else:
        mu_now = u_known[:n]
        c = lin.params.c
        y_now = pi_now - c * mu_now
        y_now[:, :n] += np.eye(n)  # y_t = xi_t + pi_t - c mu_t, xi_t is a known
        s_map = np.vstack([xi_next, pi_now, y_now])
        bn = u_noise
        b_map = np.vstack([bn[2 * n:3 * n], bn[n:2 * n], bn[n:2 * n] - c * bn[:n]])
    return s_map, b_map


def state_space_matrix(lin: LinearizedSystem) -> np.ndarray:
    """The one-step linear map on the deviation state (2n or 3n square)."""
    return _state_space_solution(lin)[0]


def linear_state_map(
    net: IONetwork,
    params: ModelParams,
    equilibrium: EquilibriumState | None = None,
    variant: str = "simultaneous",
) -> tuple[np.ndarray, np.ndarray]:
    """Convenience: (S, B) such that state_{t+1} = S state_t + B eps_t."""
    return _state_space_solution(build_linearized(net, params, equilibrium, variant))


def state_space_spectrum(lin: LinearizedSystem) -> np.ndarray:
    """Eigenvalues of the state-space map with the gauge direction removed.

    For the simultaneous variant the gauge row already maps the uniform price
    direction to zero, so the full spectrum is returned.  For the lagged
    variant the exact eigenpair (eigenvalue 1 along the uniform-price
    monetary-unit-symmetry direction) is dropped by eigenvector matching.
    """
    s_map = state_space_matrix(lin)
    vals, vecs = np.linalg.eig(s_map)
    if lin.variant == "simultaneous":
        return vals
    n = lin.net.n
    mus = np.concatenate([np.zeros(n), np.ones(n), (1.0 - lin.params.c) * np.ones(n)])
    mus = mus / np.linalg.norm(mus)
    overlap = np.abs(mus @ vecs)  # eigenvectors are unit columns
    candidates = np.where(np.abs(vals - 1.0) < 1e-6)[0]
    if len(candidates) == 0:
        return vals
    drop = candidates[np.argmax(overlap[candidates])]
    return np.delete(vals, drop)


# ---------------------------------------------------------------------------
# modal analysis for normal networks
# ---------------------------------------------------------------------------

def uniform_mode_multiplier(params: ModelParams) -> float:
    """Multiplier of the uniform quantity mode, (1-g)/(1-g+zeta(1-b+ab)).

    Always in [0, 1): the aggregate mode of the economy (equivalently a
    single-firm economy) is linearly stable, becoming marginal only as
    gamma -> 0.  Undefined at a = 1 or b = 1.
    """
    a, b, gamma = params.a, params.b, params.gamma
    if a >= 1.0 or b >= 1.0:
        raise ValueError("uniform multiplier undefined for a = 1 or b = 1")
    zeta = gamma / ((1.0 - a) * (1.0 - b))
    return (1.0 - gamma) / (1.0 - gamma + zeta * (1.0 - b + a * b))


@dataclass(frozen=True)
class ModeQuadratic:
    """Coefficients of the per-mode characteristic quadratic A2 a^2 + A1 a + A0."""

    s: complex
    A2: complex
    A1: complex
    A0: complex
    zeta_hat: float
    c: float


def mode_quadratic(s: complex, params: ModelParams,
                   allow_unit_modulus: bool = False) -> ModeQuadratic:
    """Quadratic for the non-uniform mode with eigenvalue s (|s| < 1).

    With c = b(1-a) and zhat = gamma / ((1-b)(1 - b(1-a)^2 |s|^2)):

        A2 = 1 - gamma + zhat (1 - b - c sbar (1+q) + c^2 |s|^2)
        A1 = -[1 - gamma + zhat (c s - q c sbar - b (1+q))]
        A0 = -q b zhat

    ``allow_unit_modulus`` admits |s| = 1 for the degenerate case of the
    identity network, where the derivation formally extends (flagged in
    reports).
    """
    if params.b >= 1.0:
        raise ValueError("mode quadratic requires b < 1")
    s = complex(s)
    mod2 = abs(s) ** 2
    if mod2 >= 1.0 and not (allow_unit_modulus and mod2 <= 1.0 + 1e-12):
        raise ValueError("mode quadratic requires |s| < 1")
    a, b, q, gamma = params.a, params.b, params.q, params.gamma
    c = params.c
    zhat = gamma / ((1.0 - b) * (1.0 - b * (1.0 - a) ** 2 * mod2))
    sbar = s.conjugate()
    a2 = 1.0 - gamma + zhat * (1.0 - b - c * sbar * (1.0 + q) + c**2 * mod2)
    a1 = -(1.0 - gamma + zhat * (c * s - q * c * sbar - b * (1.0 + q)))
    a0 = -q * b * zhat
    return ModeQuadratic(s=s, A2=a2, A1=a1, A0=complex(a0), zeta_hat=zhat, c=c)


def mode_roots(mq: ModeQuadratic) -> tuple[complex, complex]:
    """Roots of the mode quadratic, cancellation-free.

    The larger-magnitude root comes from the stable branch of the quadratic
    formula, the other from the product A0/A2.  A2 = 0 degenerates to a linear
    equation: the single root is returned together with an infinity marker.
    """
    a2, a1, a0 = mq.A2, mq.A1, mq.A0
    if a2 == 0:
        if a1 == 0:
            raise ValueError("degenerate quadratic with A2 = A1 = 0")
        return (-a0 / a1, complex(np.inf))
    disc = np.sqrt(complex(a1 * a1 - 4.0 * a2 * a0))
    # pick the sign that avoids cancellation in -A1 -/+ disc
    if abs(-a1 + disc) >= abs(-a1 - disc):
        big = (-a1 + disc) / 2.0
    else:
        big = (-a1 - disc) / 2.0
    if big == 0:
        return (0j, 0j)
    return (big / a2, a0 / big)


@dataclass(frozen=True)
class ModeResult:
    s: complex
    alphas: tuple[complex, complex]
    max_mod: float


@dataclass(eq=False)
class StabilityReport:
    """Per-mode roots, maximal growth rate and the stability verdict."""

    per_mode: list[ModeResult]
    max_growth: float
    uniform_multiplier: float
    stable: bool
    method: str
    special_unit_modes: int = 0
    gamma: float = field(default=np.nan)


def _uniform_mode_index(net: IONetwork) -> tuple[np.ndarray, int]:
    """Eigenvalues of W and the index of the uniform (Perron) mode."""
    vals, vecs = net.eigensystem
    near_one = np.where(np.abs(vals - 1.0) < UNIT_EIG_TOL)[0]
    if len(near_one) == 0:
        raise ArithmeticError("row-stochastic matrix has no eigenvalue one")
    ones = np.ones(net.n) / math.sqrt(net.n)
    overlap = np.abs(ones @ vecs[:, near_one])
    return vals, int(near_one[np.argmax(overlap)])


def _modal_max_growth_fast(s_modes: np.ndarray, params: ModelParams) -> float:
    """Max root modulus over non-uniform modes, vectorized over eigenvalues."""
    if len(s_modes) == 0:
        return 0.0
    a, b, q, gamma = params.a, params.b, params.q, params.gamma
    c = params.c
    mod2 = np.abs(s_modes) ** 2
    zhat = gamma / ((1.0 - b) * (1.0 - b * (1.0 - a) ** 2 * mod2))
    sbar = np.conj(s_modes)
    a2 = 1.0 - gamma + zhat * (1.0 - b - c * sbar * (1.0 + q) + c**2 * mod2)
    a1 = -(1.0 - gamma + zhat * (c * s_modes - q * c * sbar - b * (1.0 + q)))
    a0 = -q * b * zhat + 0j
    disc = np.sqrt(a1 * a1 - 4.0 * a2 * a0)
    plus, minus = -a1 + disc, -a1 - disc
    big = np.where(np.abs(plus) >= np.abs(minus), plus, minus) / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(a2 != 0, big / np.where(a2 != 0, a2, 1.0), np.inf)
        r2 = np.where(big != 0, a0 / np.where(big != 0, big, 1.0), 0.0)
    return float(np.max(np.maximum(np.abs(r1), np.abs(r2))))


def max_growth_rate_modal(net: IONetwork, params: ModelParams) -> StabilityReport:
    """Stability of a normal network via the per-mode quadratics.

    Rejects non-normal networks (use the state-space path).  Eigenvalues on
    the unit circle other than the uniform one (identity or permutation
    networks) are evaluated through the quadratic and counted as special.
    """
    if not is_normal(net):
        raise ValueError("modal analysis requires a normal network")
    vals, uniform_idx = _uniform_mode_index(net)
    multiplier = uniform_mode_multiplier(params)
    per_mode = [ModeResult(s=complex(vals[uniform_idx]),
                           alphas=(complex(multiplier), complex(np.nan)),
                           max_mod=multiplier)]
    special = 0
    max_growth = 0.0
    for idx, s in enumerate(vals):
        if idx == uniform_idx:
            continue
        on_circle = abs(s) >= 1.0 - 1e-12
        special += int(on_circle)
        mq = mode_quadratic(s, params, allow_unit_modulus=on_circle)
        roots = mode_roots(mq)
        mod = max(abs(roots[0]), abs(roots[1]))
        per_mode.append(ModeResult(s=complex(s), alphas=roots, max_mod=mod))
        max_growth = max(max_growth, mod)
    return StabilityReport(
        per_mode=per_mode,
        max_growth=max_growth,
        uniform_multiplier=multiplier,
        stable=bool(max_growth < 1.0 and multiplier < 1.0),
        method="mode_quadratic",
        special_unit_modes=special,
        gamma=params.gamma,
    )


def analyze_stability(net: IONetwork, params: ModelParams,
                      equilibrium: EquilibriumState | None = None,
                      variant: str = "simultaneous",
                      force_state_space: bool = False) -> StabilityReport:
    """Dispatch: modal quadratics for normal networks, state space otherwise."""
    if not force_state_space and variant == "simultaneous" and is_normal(net):
        return max_growth_rate_modal(net, params)
    lin = build_linearized(net, params, equilibrium, variant)
    vals = state_space_spectrum(lin)
    per_mode = [ModeResult(s=complex(np.nan), alphas=(complex(v), complex(np.nan)),
                           max_mod=float(abs(v))) for v in vals]
    max_growth = float(np.max(np.abs(vals))) if len(vals) else 0.0
    try:
        multiplier = uniform_mode_multiplier(params)
    except ValueError:
        multiplier = np.nan
    return StabilityReport(
        per_mode=per_mode,
        max_growth=max_growth,
        uniform_multiplier=multiplier,
        stable=bool(max_growth < 1.0),
        method="state_space",
        gamma=params.gamma,
    )


def _max_growth(net: IONetwork, params: ModelParams,
                equilibrium: EquilibriumState | None,
                normal: bool, variant: str) -> float:
    if normal and variant == "simultaneous":
        report = max_growth_rate_modal(net, params)
        return max(report.max_growth, report.uniform_multiplier)
    lin = build_linearized(net, params, equilibrium, variant)
    vals = state_space_spectrum(lin)
    return float(np.max(np.abs(vals)))


# ---------------------------------------------------------------------------
# critical lines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CriticalPoint:
    """First unit-circle crossing of the leading root as gamma grows."""

    gamma_c: float
    kind: str  # "real_minus_one" | "complex_pair"
    crossing_count: int
    root: complex


def critical_gamma(
    net: IONetwork,
    params: ModelParams,
    q: float,
    grid_step: float = 1e-3,
    variant: str = "simultaneous",
) -> CriticalPoint | None:
    """Smallest gamma in (0, 1] where the leading root crosses the unit circle.

    Grid scan (default step 1e-3) to bracket sign changes of max|alpha| - 1,
    bisection refined to |max|alpha| - 1| < 1e-10.  Returns None when the
    system is stable (or unstable) throughout; when several crossings exist
    the smallest is refined and the count is recorded.
    """
    base = ModelParams(a=params.a, b=params.b, q=q, q0=None if params.q0 == params.q else params.q0,
                       gamma=params.gamma, beta0=params.beta0, sigma=params.sigma)
    normal = is_normal(net) and variant == "simultaneous"
    equilibrium = None if normal else solve_equilibrium(net, base)
    if normal:
        vals, uniform_idx = _uniform_mode_index(net)
        s_modes = np.delete(vals, uniform_idx)

    def f(gamma: float) -> float:
        pr = ModelParams(a=base.a, b=base.b, q=base.q, q0=base.q0, gamma=gamma,
                         beta0=base.beta0, sigma=base.sigma)
        if normal:
            growth = max(_modal_max_growth_fast(s_modes, pr),
                         uniform_mode_multiplier(pr))
            return growth - 1.0
        return _max_growth(net, pr, equilibrium, normal, variant) - 1.0

    gammas = np.arange(grid_step, 1.0 + grid_step / 2, grid_step)
    values = np.array([f(g) for g in gammas])
    signs = np.sign(values)
    crossings = [
        i for i in range(len(gammas) - 1)
        if signs[i] <= 0 < signs[i + 1]
    ]
    if not crossings:
        return None

    lo, hi = float(gammas[crossings[0]]), float(gammas[crossings[0]] + grid_step)
    f_lo = values[crossings[0]]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < 1e-10 or hi - lo < 1e-13:
            lo = hi = mid
            break
        if f_mid < 0:
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    gamma_c = 0.5 * (lo + hi)

    probe = ModelParams(a=base.a, b=base.b, q=base.q, q0=base.q0,
                        gamma=min(gamma_c + 1e-8, 1.0), beta0=base.beta0, sigma=base.sigma)
    root = _leading_root(net, probe, equilibrium, normal, variant)
    if abs(root.imag) < REAL_ROOT_IMAG_TOL and root.real < 0:
        kind = "real_minus_one"
    else:
        kind = "complex_pair"
    return CriticalPoint(gamma_c=gamma_c, kind=kind,
                         crossing_count=len(crossings), root=root)


def _leading_root(net, params, equilibrium, normal, variant) -> complex:
    if normal:
        report = max_growth_rate_modal(net, params)
        best, best_mod = complex(report.uniform_multiplier), report.uniform_multiplier
        for mode in report.per_mode[1:]:
            for alpha in mode.alphas:
                if np.isfinite(alpha) and abs(alpha) > best_mod:
                    best, best_mod = alpha, abs(alpha)
        return best
    lin = build_linearized(net, params, equilibrium, variant)
    vals = state_space_spectrum(lin)
    return complex(vals[np.argmax(np.abs(vals))])


@dataclass(eq=False)
class CriticalLine:
    """gamma_c(q) over a grid of q values; gamma_c is NaN where no crossing."""

    q_grid: np.ndarray
    gamma_c: np.ndarray
    kind: list[str]
    root: list[complex]


def trace_critical_line(
    net: IONetwork,
    params: ModelParams,
    q_grid,
    grid_step: float = 1e-3,
    jobs: int = 1,
) -> CriticalLine:
    """critical_gamma across a q grid; cells are independent and may run
    concurrently (jobs > 1 uses a process pool)."""
    q_grid = np.asarray(list(q_grid), dtype=float)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            points = list(pool.map(
                _critical_cell, [(net, params, float(q), grid_step) for q in q_grid]
            ))
    else:
        points = [_critical_cell((net, params, float(q), grid_step)) for q in q_grid]
    gamma_c = np.array([p.gamma_c if p else np.nan for p in points])
    kind = [p.kind if p else "none" for p in points]
    root = [p.root if p else complex(np.nan) for p in points]
    return CriticalLine(q_grid=q_grid, gamma_c=gamma_c, kind=kind, root=root)


def _critical_cell(args) -> CriticalPoint | None:
    net, params, q, grid_step = args
    return critical_gamma(net, params, q, grid_step=grid_step)


def critical_gamma_closed_form(q: float, s: float, a: float, b: float) -> float | None:
    """gamma_c of the real-root crossing alpha -> -1 for real s.

    (1-gc)/gc = [2b - 1 - c^2 s^2 + 2q (b + c s)] / [2 (1-b)(1 - b(1-a)^2 s^2)];
    defined only when the right-hand side is positive, else None (the actual
    bifurcation is then the complex pair, caught by critical_gamma).
    """
    c = b * (1.0 - a)
    rhs = (2.0 * b - 1.0 - c**2 * s**2 + 2.0 * q * (b + c * s)) / (
        2.0 * (1.0 - b) * (1.0 - b * (1.0 - a) ** 2 * s**2)
    )
    if rhs <= 0:
        return None
    return 1.0 / (1.0 + rhs)


def critical_gamma_b1_approx(q: float, s: float, a: float, b: float) -> float:
    """Constant-returns limit gamma_c ~ 2 (1-(1-a)s)(1-b) / (2q + 1 - (1-a)s)."""
    return 2.0 * (1.0 - (1.0 - a) * s) * (1.0 - b) / (2.0 * q + 1.0 - (1.0 - a) * s)


def hopf_angle(s: float, a: float) -> float:
    """Crossing angle of the complex pair at q = -1, b -> 1:
    cos(theta) = (1 - (1-a) s)^2 / 2."""
    arg = (1.0 - (1.0 - a) * s) ** 2 / 2.0
    if not -1.0 - 1e-12 <= arg <= 1.0 + 1e-12:
        raise ValueError("hopf angle argument outside [-1, 1]")
    return float(np.arccos(np.clip(arg, -1.0, 1.0)))


# ---------------------------------------------------------------------------
# CSV exports
# ---------------------------------------------------------------------------

def report_to_csv(report: StabilityReport, path, config_hash: str = "") -> None:
    verdict = "stable" if report.stable else "unstable"
    with open(path, "w") as fh:
        if config_hash:
            fh.write(f"# config_hash={config_hash}\n")
        fh.write(
            f"# verdict={verdict} max_alpha="
            f"{max(report.max_growth, report.uniform_multiplier):.12g} "
            f"method={report.method}\n"
        )
        fh.write("s_re,s_im,alpha1_re,alpha1_im,alpha2_re,alpha2_im,max_mod\n")
        for mode in report.per_mode:
            a1, a2 = mode.alphas
            row = (mode.s.real, mode.s.imag, a1.real, a1.imag, a2.real, a2.imag,
                   mode.max_mod)
            fh.write(",".join(format(float(v), ".17g") for v in row) + "\n")


def critical_line_to_csv(line: CriticalLine, path, config_hash: str = "") -> None:
    with open(path, "w") as fh:
        if config_hash:
            fh.write(f"# config_hash={config_hash}\n")
        fh.write("q,gamma_c,kind,max_root_re,max_root_im\n")
        for q, g, kind, root in zip(line.q_grid, line.gamma_c, line.kind, line.root):
            fh.write(
                ",".join([
                    format(float(q), ".17g"),
                    format(float(g), ".17g"),
                    kind,
                    format(float(root.real), ".17g"),
                    format(float(root.imag), ".17g"),
                ]) + "\n"
            )
