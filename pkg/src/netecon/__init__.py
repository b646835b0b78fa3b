"""netecon: a numerical laboratory for an interconnected-firm economy.

Firms wired by a row-stochastic input-output matrix produce with Cobb-Douglas
technology, forecast prices by extrapolating recent trends, and adjust
production only part-way toward the optimum each period.  The package solves
the static equilibrium, simulates the full nonlinear dynamics under market
clearing, analyzes linear stability (per-mode quadratics and state-space
spectra, critical lines in the (q, gamma) plane), provides the reduced
reference models, and ships analytics plus a CLI for reproducible experiments.
"""

from .network import (
    IONetwork,
    build_plain_network,
    build_random_exponential_network,
    is_normal,
    load_network,
)
from .equilibrium import (
    EquilibriumState,
    ModelParams,
    equilibrium_residual,
    influence_vector_lp,
    solve_equilibrium,
)
from .simulator import (
    ClearingContext,
    ClearingError,
    EconomyState,
    NoiseProcess,
    Simulator,
    Trajectory,
    clearing_residual,
    discount_factor,
    expected_price,
    factor_demands,
    household_wealth,
    lagrange_multiplier,
    optimal_production,
    production_target,
    simulate,
    step,
    trajectory_to_csv,
)
from .stability import (
    CriticalLine,
    CriticalPoint,
    LinearizedSystem,
    ModeQuadratic,
    StabilityReport,
    analyze_stability,
    build_linearized,
    critical_gamma,
    critical_gamma_b1_approx,
    critical_gamma_closed_form,
    hopf_angle,
    linear_state_map,
    max_growth_rate_modal,
    mode_quadratic,
    mode_roots,
    state_space_matrix,
    trace_critical_line,
    uniform_mode_multiplier,
)

__version__ = "0.1.0"
