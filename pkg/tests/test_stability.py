import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_circulant, make_symmetric_stochastic
from netecon.equilibrium import ModelParams, solve_equilibrium
from netecon.network import IONetwork, build_plain_network, build_random_exponential_network
from netecon.stability import (
    ModeQuadratic,
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
    state_space_spectrum,
    trace_critical_line,
    uniform_mode_multiplier,
)

PARAMS = ModelParams(a=0.5, b=0.9, q=-1.0, gamma=0.15)


class TestBuildLinearized:
    def test_plain_matrix_collapses_projectors(self):
        # normal network: all three projectors equal the uniform averager and
        # W_tilde is the transpose
        net = build_plain_network(6)
        lin = build_linearized(net, PARAMS)
        j0 = np.full((6, 6), 1 / 6)
        assert np.allclose(lin.J0, j0, atol=1e-14)
        assert np.allclose(lin.J1, j0, atol=1e-12)
        assert np.allclose(lin.J2, j0, atol=1e-12)
        assert np.allclose(lin.W_tilde, net.w.T, atol=1e-12)

    def test_single_firm_degenerate(self):
        lin = build_linearized(build_plain_network(1), PARAMS)
        for mat in (lin.W_tilde, lin.J0, lin.J1, lin.J2):
            assert np.allclose(mat, [[1.0]], atol=1e-14)

    def test_projector_identities_non_normal(self):
        net = build_random_exponential_network(15, 3)
        lin = build_linearized(net, PARAMS)
        assert not np.allclose(lin.J1, lin.J0, atol=1e-6)  # genuinely non-normal
        assert np.max(np.abs(lin.J1 @ lin.J2 - lin.J1)) < 1e-12
        assert np.max(np.abs(lin.J2 @ lin.J1 - lin.J2)) < 1e-12
        assert np.max(np.abs(lin.J1 @ lin.W_tilde - lin.J1)) < 1e-12
        assert np.max(np.abs(lin.J2 @ lin.W_tilde - lin.J2)) < 1e-12

    def test_variant_validation(self):
        net = build_plain_network(3)
        with pytest.raises(ValueError):
            build_linearized(net, PARAMS, variant="bogus")


class TestUniformMode:
    def test_frictionless_limit(self):
        assert uniform_mode_multiplier(ModelParams(gamma=1.0)) == 0.0

    def test_slow_adjustment_is_marginal(self):
        m = uniform_mode_multiplier(ModelParams(gamma=1e-9))
        assert 0.999999 < m < 1.0

    def test_reference_value(self):
        # zeta = 4, zeta (1-b+ab) = 2.2, multiplier = 0.8 / 3
        m = uniform_mode_multiplier(ModelParams(a=0.5, b=0.9, gamma=0.2))
        assert m == pytest.approx(0.8 / 3.0, abs=1e-15)

    def test_undefined_cases(self):
        with pytest.raises(ValueError):
            uniform_mode_multiplier(ModelParams(a=1.0))
        with pytest.raises(ValueError):
            uniform_mode_multiplier(ModelParams(b=1.0))

    def test_single_firm_decay_rate_matches(self):
        # cross-check by simulating the one-firm economy's linear decay
        # (early steps only: the signal reaches the solver floor quickly)
        from netecon.simulator import Simulator

        params = ModelParams(a=0.5, b=0.9, q=0.0, gamma=0.2)
        net = build_plain_network(1)
        sim = Simulator(net, params, tol=1e-13)
        state = sim.equilibrium_state()
        state.x_next = state.x_next * np.exp(np.array([1e-6]))
        xs = []
        for _ in range(8):
            state = sim.step(state, np.zeros(1))
            xs.append(float(np.log(state.x[0] / sim.equilibrium.x_eq[0])))
        rates = np.array(xs[1:]) / np.array(xs[:-1])
        assert np.allclose(rates[1:6], 0.8 / 3.0, rtol=1e-4)


class TestModeQuadratic:
    def test_s_zero_q_zero(self):
        for gamma in (0.05, 0.2, 0.7):
            mq = mode_quadratic(0.0, ModelParams(a=0.5, b=0.9, q=0.0, gamma=gamma))
            assert mq.A2 == pytest.approx(1.0, abs=1e-14)
            assert mq.A1 == pytest.approx(-(1.0 - gamma - 9.0 * gamma), abs=1e-12)
            assert mq.A0 == 0.0

    def test_s_zero_q_minus_one(self):
        gamma = 0.13
        mq = mode_quadratic(0.0, ModelParams(a=0.5, b=0.9, q=-1.0, gamma=gamma))
        assert mq.A2 == pytest.approx(1.0, abs=1e-14)
        assert mq.A1 == pytest.approx(-(1.0 - gamma), abs=1e-14)
        assert mq.A0 == pytest.approx(9.0 * gamma, abs=1e-12)

    def test_frozen_adjustment_is_marginal(self):
        # gamma -> 0 freezes production: root at one
        mq = ModeQuadratic(s=0.0, A2=1.0, A1=-1.0, A0=0.0, zeta_hat=0.0, c=0.45)
        roots = mode_roots(mq)
        assert sorted(abs(r) for r in roots) == [0.0, 1.0]

    def test_unit_modulus_rejected_without_flag(self):
        with pytest.raises(ValueError):
            mode_quadratic(1.0, PARAMS)
        mq = mode_quadratic(1.0, PARAMS, allow_unit_modulus=True)
        assert np.isfinite(mq.A2.real)

    def test_crs_rejected(self):
        with pytest.raises(ValueError):
            mode_quadratic(0.0, ModelParams(b=1.0))


class TestModeRoots:
    def test_simple_factorization(self):
        mq = ModeQuadratic(s=0.0, A2=1.0, A1=-1.0, A0=0.0, zeta_hat=0.0, c=0.45)
        roots = sorted(mode_roots(mq), key=abs)
        assert roots[0] == 0.0
        assert roots[1] == pytest.approx(1.0)

    def test_unit_circle_pair_at_critical_gamma(self):
        # q = -1, s = 0: product of roots = 9 gamma = 1 at gamma = 1/9,
        # discriminant negative -> conjugate pair exactly on the circle
        gamma = 1.0 / 9.0
        mq = mode_quadratic(0.0, ModelParams(a=0.5, b=0.9, q=-1.0, gamma=gamma))
        r1, r2 = mode_roots(mq)
        assert abs(r1) == pytest.approx(1.0, abs=1e-12)
        assert abs(r2) == pytest.approx(1.0, abs=1e-12)
        assert abs(r1.imag) > 0.5

    def test_real_minus_one_at_q0_critical(self):
        mq = mode_quadratic(0.0, ModelParams(a=0.5, b=0.9, q=0.0, gamma=0.2))
        roots = sorted(mode_roots(mq), key=abs)
        assert roots[1] == pytest.approx(-1.0, abs=1e-12)

    def test_degenerate_linear(self):
        mq = ModeQuadratic(s=0.0, A2=0.0, A1=2.0, A0=-1.0, zeta_hat=0.0, c=0.45)
        root, marker = mode_roots(mq)
        assert root == pytest.approx(0.5)
        assert np.isinf(marker)

    @given(
        a2=st.complex_numbers(min_magnitude=0.1, max_magnitude=3.0),
        a1=st.complex_numbers(max_magnitude=3.0),
        a0=st.complex_numbers(max_magnitude=3.0),
    )
    @settings(max_examples=50, deadline=None)
    def test_vieta_identities(self, a2, a1, a0):
        mq = ModeQuadratic(s=0.0, A2=a2, A1=a1, A0=a0, zeta_hat=0.0, c=0.45)
        r1, r2 = mode_roots(mq)
        assert abs(r1 * r2 - a0 / a2) < 1e-8 * max(1.0, abs(a0 / a2))
        assert abs((r1 + r2) + a1 / a2) < 1e-8 * max(1.0, abs(a1 / a2))


class TestModalVsStateSpace:
    def test_plain_matrix_report_independent_of_n(self):
        reports = [max_growth_rate_modal(build_plain_network(n), PARAMS) for n in (4, 32)]
        assert reports[0].max_growth == pytest.approx(reports[1].max_growth, abs=1e-12)

    @pytest.mark.parametrize("seed", range(4))
    def test_symmetric_networks_agree(self, seed):
        net = make_symmetric_stochastic(12, seed)
        params = ModelParams(a=0.5, b=0.9, q=-0.4, gamma=0.12)
        report = max_growth_rate_modal(net, params)
        modal = max(report.max_growth, report.uniform_multiplier)
        vals = state_space_spectrum(build_linearized(net, params))
        assert abs(modal - np.max(np.abs(vals))) < 1e-8

    @pytest.mark.parametrize("seed", range(3))
    def test_circulant_complex_spectrum_agrees(self, seed):
        # circulants are normal with genuinely complex eigenvalues; this pins
        # the complex-s form of the quadratic coefficients
        net = make_circulant(9, seed)
        assert np.max(np.abs(net.eigenvalues.imag)) > 1e-3
        for q in (-1.0, -0.4, 0.3):
            params = ModelParams(a=0.5, b=0.9, q=q, gamma=0.14)
            report = max_growth_rate_modal(net, params)
            modal = max(report.max_growth, report.uniform_multiplier)
            vals = state_space_spectrum(build_linearized(net, params))
            assert abs(modal - np.max(np.abs(vals))) < 1e-10

    def test_conjugate_modes_have_equal_maxima(self):
        net = make_circulant(8, 5)
        report = max_growth_rate_modal(net, PARAMS)
        by_imag = {}
        for mode in report.per_mode[1:]:
            key = round(abs(mode.s.imag), 9)
            by_imag.setdefault(key, []).append(mode.max_mod)
        for key, mods in by_imag.items():
            if key > 0 and len(mods) == 2:
                assert mods[0] == pytest.approx(mods[1], abs=1e-10)

    def test_identity_matrix_flagged_special(self):
        net = IONetwork(4, np.eye(4))
        report = max_growth_rate_modal(net, PARAMS)
        assert report.special_unit_modes == 3

    def test_non_normal_rejected_by_modal(self):
        net = build_random_exponential_network(8, 1)
        with pytest.raises(ValueError):
            max_growth_rate_modal(net, PARAMS)

    def test_single_firm_state_space_equals_multiplier(self):
        params = ModelParams(a=0.5, b=0.9, q=0.0, gamma=0.3)
        net = build_plain_network(1)
        vals = state_space_spectrum(build_linearized(net, params))
        assert np.max(np.abs(vals)) == pytest.approx(
            uniform_mode_multiplier(params), abs=1e-12
        )


class TestGaugeHandling:
    def test_uniform_price_direction_annihilated(self):
        # simultaneous variant: the gauge row maps (xi=0, pi=uniform) to zero
        net = build_random_exponential_network(7, 2)
        s_map = state_space_matrix(build_linearized(net, PARAMS))
        state = np.concatenate([np.zeros(7), np.ones(7)])
        image = s_map @ state
        assert np.max(np.abs(image)) < 1e-10

    def test_lagged_variant_mus_eigenpair_excluded(self):
        net = build_random_exponential_network(6, 9)
        lin = build_linearized(net, PARAMS, variant="lagged")
        s_map = state_space_matrix(lin)
        assert s_map.shape == (18, 18)
        c = PARAMS.c
        mus = np.concatenate([np.zeros(6), np.ones(6), (1 - c) * np.ones(6)])
        image = s_map @ mus
        assert np.max(np.abs(image - mus)) < 1e-9  # exact eigenpair at one
        vals_all = np.linalg.eigvals(s_map)
        vals_kept = state_space_spectrum(lin)
        # exactly the unit eigenvalue is dropped, every other one survives
        assert len(vals_kept) == len(vals_all) - 1
        assert np.any(np.abs(vals_all - 1.0) < 1e-9)
        assert not np.any(np.abs(vals_kept - 1.0) < 1e-9)
        remaining = list(vals_all)
        for v in vals_kept:
            k = int(np.argmin(np.abs(np.array(remaining) - v)))
            assert abs(remaining[k] - v) < 1e-9
            remaining.pop(k)
        assert abs(remaining[0] - 1.0) < 1e-9

    def test_lagged_variant_plain_matrix_non_uniform_modes_unchanged(self):
        # for normal networks the payment lag acts only through the rank-one
        # projector on the uniform direction, so the non-uniform spectrum is
        # identical to the simultaneous variant
        net = build_plain_network(8)
        params = ModelParams(a=0.5, b=0.9, q=-1.0, gamma=0.08)
        r_sim = np.max(np.abs(state_space_spectrum(build_linearized(net, params))))
        r_lag = np.max(np.abs(state_space_spectrum(
            build_linearized(net, params, variant="lagged"))))
        assert r_sim < 1.0 and r_lag < 1.0
        assert abs(r_sim - r_lag) < 1e-12

    def test_lagged_variant_exists_for_non_normal(self):
        net = build_random_exponential_network(7, 4)
        params = ModelParams(a=0.5, b=0.9, q=-1.0, gamma=0.08)
        r_sim = np.max(np.abs(state_space_spectrum(build_linearized(net, params))))
        r_lag = np.max(np.abs(state_space_spectrum(
            build_linearized(net, params, variant="lagged"))))
        assert r_sim < 1.0 and r_lag < 1.0
        assert 0.5 < r_lag / r_sim < 2.0

    def test_lagged_requires_unit_beta0(self):
        net = build_plain_network(3)
        with pytest.raises(ValueError, match="beta0"):
            build_linearized(net, ModelParams(beta0=1.1), variant="lagged")


class TestCriticalGamma:
    def test_plain_q0_real_crossing(self):
        cp = critical_gamma(build_plain_network(16), PARAMS, q=0.0)
        assert cp.gamma_c == pytest.approx(0.2, abs=1e-6)
        assert cp.kind == "real_minus_one"

    def test_plain_qm1_complex_crossing(self):
        cp = critical_gamma(build_plain_network(16), PARAMS, q=-1.0)
        assert cp.gamma_c == pytest.approx(1.0 / 9.0, abs=1e-6)
        assert cp.kind == "complex_pair"

    def test_bracketing_certificate(self):
        from netecon.stability import _modal_max_growth_fast

        cp = critical_gamma(build_plain_network(16), PARAMS, q=-1.0)
        below = _modal_max_growth_fast(np.zeros(1, dtype=complex),
                                       ModelParams(a=0.5, b=0.9, q=-1.0,
                                                   gamma=cp.gamma_c - 1e-6))
        above = _modal_max_growth_fast(np.zeros(1, dtype=complex),
                                       ModelParams(a=0.5, b=0.9, q=-1.0,
                                                   gamma=cp.gamma_c + 1e-6))
        assert below < 1.0 < above

    def test_interior_maximum_at_negative_q(self):
        line = trace_critical_line(build_plain_network(8), PARAMS,
                                   np.arange(-1.0, 1.0, 0.1))
        finite = np.where(np.isfinite(line.gamma_c))[0]
        peak = finite[np.argmax(line.gamma_c[finite])]
        assert -1.0 < line.q_grid[peak] < 0.0

    def test_non_normal_state_space_path(self):
        net = build_random_exponential_network(10, 4)
        cp = critical_gamma(net, PARAMS, q=-1.0, grid_step=0.01)
        assert cp is not None
        assert 0.02 < cp.gamma_c < 0.2


class TestClosedForms:
    def test_q0_s0_reference(self):
        assert critical_gamma_closed_form(0.0, 0.0, 0.5, 0.9) == pytest.approx(0.2)

    def test_qm1_no_real_crossing(self):
        assert critical_gamma_closed_form(-1.0, 0.0, 0.5, 0.9) is None

    def test_matches_numeric_scan_along_real_s(self):
        for s in (0.0, 0.2, 0.35):
            for q in (0.0, 0.25):
                gc = critical_gamma_closed_form(q, s, 0.5, 0.9)
                mq = mode_quadratic(s, ModelParams(a=0.5, b=0.9, q=q, gamma=gc))
                r = mode_roots(mq)
                assert min(abs(abs(r[0]) - 1), abs(abs(r[1]) - 1)) < 1e-10

    def test_b1_limit_independent_of_a_and_s(self):
        vals = {critical_gamma_b1_approx(0.0, s, a, 0.97)
                for s in (0.0, 0.3) for a in (0.3, 0.7)}
        assert all(abs(v - 2 * 0.03) < 1e-12 for v in vals)

    def test_hopf_angle_reference_points(self):
        # s = 0: cos(theta) = 1/2 -> theta = pi/3, implied period six
        assert hopf_angle(0.0, 0.5) == pytest.approx(np.pi / 3)
        assert 2 * np.pi / hopf_angle(0.0, 0.5) == pytest.approx(6.0)
        # domain boundary (1 - (1-a)s)^2 = 2: the pair collapses onto the
        # real axis (theta = 0); beyond it the formula leaves its domain
        s = 2.0 * (1.0 - np.sqrt(2.0))
        assert hopf_angle(s, 0.5) == pytest.approx(0.0, abs=1e-7)
        # a = 1: the angle no longer depends on s
        assert hopf_angle(0.9, 1.0) == pytest.approx(np.arccos(0.5))
        assert hopf_angle(-0.4, 1.0) == pytest.approx(np.arccos(0.5))
        with pytest.raises(ValueError):
            hopf_angle(-3.0, 0.0)


class TestTransversalityConsistency:
    def test_rational_expectation_map_unstable(self):
        # gamma = 1 reduction: the forward nominal map has growth > 1 on the
        # subspace orthogonal to the uniform vector, for every network kind
        from netecon.reduced import transversality_blowup

        rng = np.random.default_rng(0)
        for net in (build_plain_network(6),
                    build_random_exponential_network(6, 3),
                    make_symmetric_stochastic(6, 2)):
            s0 = rng.standard_normal(6)
            s0 -= s0.mean()
            rep = transversality_blowup(net, 0.5, 0.9, 1.0, s0, steps=30)
            assert rep.growth_factor > 1.0


class TestAnalyzeDispatch:
    def test_normal_uses_modal(self):
        report = analyze_stability(build_plain_network(5), PARAMS)
        assert report.method == "mode_quadratic"

    def test_non_normal_uses_state_space(self):
        report = analyze_stability(build_random_exponential_network(5, 1), PARAMS)
        assert report.method == "state_space"

    def test_verdicts_around_threshold(self):
        net = build_plain_network(8)
        stable = analyze_stability(net, ModelParams(a=0.5, b=0.9, q=0.0, gamma=0.19))
        unstable = analyze_stability(net, ModelParams(a=0.5, b=0.9, q=0.0, gamma=0.21))
        assert stable.stable and not unstable.stable


class TestSimulatorDecayBridge:
    def test_decay_rate_matches_leading_root(self):
        # gamma = 0.9 gamma_c: measured geometric decay equals max |alpha|
        from scipy.linalg import eig

        from netecon.simulator import Simulator

        net = build_plain_network(16)
        params = ModelParams(a=0.5, b=0.9, q=-1.0, gamma=0.9 / 9.0)
        s_map, _ = linear_state_map(net, params)
        vals = np.linalg.eigvals(s_map)
        target = np.max(np.abs(vals))

        vals_l, vl = eig(s_map.T)
        lead = np.argmax(np.abs(vals_l))
        phi = vl[:, lead]

        sim = Simulator(net, params, tol=1e-13)
        eq = sim.equilibrium
        rng = np.random.default_rng(5)
        state = sim.equilibrium_state()
        state.x_next = eq.x_eq * np.exp(1e-8 * rng.uniform(-1, 1, 16))
        z_series = []
        for _ in range(160):
            state = sim.step(state, np.zeros(16))
            vec = np.concatenate([
                np.log(state.x_next) - np.log(eq.x_eq),
                np.log(state.p) - np.log(eq.p_eq),
            ])
            z_series.append(phi @ vec)
        t0, k = 10, 100
        rate = abs(z_series[t0 + k] / z_series[t0]) ** (1.0 / k)
        assert abs(rate - target) / target < 1e-3
