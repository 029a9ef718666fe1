import math

import numpy as np
import pytest

from tradelevels.errors import (
    DomainError,
    GridMismatchError,
    LevelBreakdownError,
    ResolutionError,
)
from tradelevels.oscillator import (
    BRANCH_LIMIT,
    DensityGrid,
    ModelParams,
    SdgParams,
    anharmonic_level,
    anharmonic_levels,
    barrier_height,
    branch_root,
    count_modes,
    default_density_spec,
    density_from_state,
    harmonic_density,
    harmonic_level,
    hermite,
    level_beta,
    mixture_density,
    numeric_spectrum,
)
from tradelevels.spectral import GridSpec


class TestModelParams:
    def test_lambda_and_sigma(self):
        p = ModelParams(h=1.0, alpha=1.0, delta=0.1)
        assert p.lam == pytest.approx(0.05)
        assert p.sigma == pytest.approx(0.25 ** 0.25)
        q = ModelParams(h=4.0, alpha=1.0)
        assert q.sigma == pytest.approx(1.0)

    def test_delta_for_lam_roundtrip(self):
        p = ModelParams(h=2.0, alpha=3.0)
        delta = p.delta_for_lam(0.07)
        assert ModelParams(h=2.0, alpha=3.0, delta=delta).lam == pytest.approx(0.07)

    def test_bad_params_rejected(self):
        with pytest.raises(DomainError):
            ModelParams(h=0.0, alpha=1.0)
        with pytest.raises(DomainError):
            ModelParams(h=1.0, alpha=-1.0)


class TestSdgParams:
    def test_alpha_delta_mapping(self):
        sdg = SdgParams(a=1.0, b=0.5, c=0.4, gamma=1.0, lambda_a=0.1, lambda_c=0.3)
        assert sdg.alpha == pytest.approx(1.1)
        assert sdg.delta == pytest.approx(0.2)
        params = sdg.model_params(h=2.0)
        assert params.alpha == pytest.approx(1.1)
        assert params.delta == pytest.approx(0.2)

    def test_unsolvable_combination_rejected(self):
        with pytest.raises(DomainError):
            SdgParams(a=0.1, b=0.1, c=1.0, gamma=1.0)


class TestHermite:
    def test_order_zero_is_one(self):
        for xi in (-3.0, 0.0, 1.7):
            assert hermite(0, xi) == 1.0

    def test_tabulated_values(self):
        assert hermite(2, 1.0) == 2.0
        assert hermite(4, 0.0) == 12.0

    def test_matches_explicit_cubic(self):
        x = np.linspace(-3, 3, 41)
        assert np.allclose(hermite(3, x), 8 * x ** 3 - 12 * x, rtol=1e-13)

    def test_derivative_recurrence(self):
        # dH_n/dxi = 2 n H_{n-1}
        x = np.linspace(-2, 2, 9)
        eps = 1e-6
        for n in (1, 3, 6):
            numeric = (hermite(n, x + eps) - hermite(n, x - eps)) / (2 * eps)
            assert np.allclose(numeric, 2 * n * hermite(n - 1, x), rtol=1e-5, atol=1e-4)

    def test_order_out_of_range(self):
        with pytest.raises(DomainError):
            hermite(61, 0.0)
        with pytest.raises(DomainError):
            hermite(-1, 0.0)


class TestHarmonicLevel:
    def test_ground_level(self):
        level = harmonic_level(0, ModelParams(1.0, 1.0))
        assert level.omega == 1.0
        assert level.e_bar == 0.5

    def test_second_level(self):
        level = harmonic_level(2, ModelParams(1.0, 1.0))
        assert level.omega == 5.0
        assert level.e_bar == 2.5

    def test_scaling_with_h(self):
        level = harmonic_level(1, ModelParams(4.0, 1.0))
        assert level.omega == 3.0
        assert level.e_bar == pytest.approx(0.5 * math.sqrt(4.0) * 3.0)

    def test_e_bar_identity(self):
        p = ModelParams(2.7, 0.9)
        for n in range(6):
            level = harmonic_level(n, p)
            assert abs(level.e_bar - 0.5 * math.sqrt(p.alpha * p.h) * level.omega) <= 1e-12

    def test_quartic_params_rejected(self):
        with pytest.raises(DomainError):
            harmonic_level(0, ModelParams(1.0, 1.0, delta=0.1))


class TestHarmonicDensity:
    def test_ground_state_is_normal_pdf(self):
        d = harmonic_density(0, ModelParams(4.0, 1.0))
        expected = np.exp(-d.r ** 2 / 2.0) / math.sqrt(2 * math.pi)
        assert np.max(np.abs(d.f - expected)) <= 1e-6
        assert d.f[d.n_points // 2] == pytest.approx(0.3989422804014327, abs=1e-9)

    def test_odd_level_vanishes_at_origin(self):
        d = harmonic_density(1, ModelParams(2.0, 0.7))
        assert d.f[d.n_points // 2] == 0.0

    def test_level_three_has_four_maxima(self):
        d = harmonic_density(3, ModelParams(1.0, 1.0))
        inner = d.f[1:-1]
        strict = np.flatnonzero((inner > d.f[:-2]) & (inner > d.f[2:]))
        assert strict.size == 4
        assert count_modes(d) == 4

    def test_normalization_across_levels(self):
        for n in (0, 5, 13, 30):
            d = harmonic_density(n, ModelParams(1.0, 1.0))
            assert np.trapezoid(d.f, dx=d.dr) == pytest.approx(1.0, abs=1e-6)

    def test_mode_count_is_level_plus_one(self):
        for n in range(7):
            d = harmonic_density(n, ModelParams(1.0, 1.0))
            assert count_modes(d) == n + 1

    def test_custom_grid_honored(self):
        spec = GridSpec(-6.0, 6.0, 1025)
        d = harmonic_density(0, ModelParams(4.0, 1.0), grid=spec)
        assert d.n_points == 1025
        assert d.r_max == 6.0

    def test_level_out_of_range(self):
        with pytest.raises(DomainError):
            harmonic_density(31, ModelParams(1.0, 1.0))

    def test_quartic_params_rejected(self):
        with pytest.raises(DomainError):
            harmonic_density(0, ModelParams(1.0, 1.0, delta=0.1))


def bisection_root(beta: float, lo: float, hi: float, tol: float = 1e-13) -> float:
    """Independent oracle: bisection for x^3 - x = beta on [lo, hi]."""
    def g(x):
        return x ** 3 - x - beta

    assert g(lo) * g(hi) <= 0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(lo) * g(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class TestAnharmonicLevels:
    def test_zero_coupling_gives_odd_integers(self):
        levels = anharmonic_levels(0.0, 3, ModelParams(1.0, 1.0))
        assert [lv.omega for lv in levels] == [1.0, 3.0, 5.0, 7.0]

    def test_positive_coupling_against_bisection_oracle(self):
        beta = level_beta(0, 0.1)
        assert beta == pytest.approx(4.0 / 30.0)
        oracle = bisection_root(beta, 1.0, 2.0)
        level = anharmonic_level(0, 0.1, ModelParams(1.0, 1.0))
        assert level.omega == pytest.approx(oracle, abs=1e-10)
        assert level.omega > 1.0

    def test_positive_coupling_gap_growth(self):
        levels = anharmonic_levels(0.05, 2, ModelParams(1.0, 1.0))
        omegas = [lv.omega for lv in levels]
        gaps = np.diff(omegas)
        assert omegas[0] > 1.0
        assert np.all(gaps > 2.0)
        assert gaps[1] > gaps[0]

    def test_negative_coupling_gap_shrink(self):
        levels = anharmonic_levels(-0.05, 2, ModelParams(1.0, 1.0))
        omegas = [lv.omega for lv in levels]
        gaps = np.diff(omegas)
        assert omegas[0] < 1.0
        assert np.all(gaps < 2.0)
        assert gaps[1] < gaps[0]
        for n, level in enumerate(levels):
            oracle = bisection_root(level_beta(n, -0.05), 1.0 / math.sqrt(3.0), 1.0)
            assert level.omega == pytest.approx((2 * n + 1) * oracle, abs=1e-9)

    def test_branch_residuals(self):
        for lam in (-0.05, -0.01, 0.0, 0.02, 0.3, 5.0):
            for n in range(6):
                beta = level_beta(n, lam)
                if beta < -BRANCH_LIMIT:
                    continue
                x = branch_root(beta)
                assert abs(x ** 3 - x - beta) <= 1e-12

    def test_breakdown_raises_with_level_index(self):
        with pytest.raises(LevelBreakdownError) as err:
            anharmonic_levels(-0.05, 10, ModelParams(1.0, 1.0))
        assert err.value.n == 8
        # levels below the breakdown index stay solvable
        assert len(anharmonic_levels(-0.05, 7, ModelParams(1.0, 1.0))) == 8

    def test_monotone_spectrum(self):
        for lam in (0.0, 0.05, -0.03):
            omegas = [lv.omega for lv in anharmonic_levels(lam, 5, ModelParams(1.0, 1.0))]
            assert all(a < b for a, b in zip(omegas, omegas[1:]))


class TestNumericSpectrum:
    def test_harmonic_limit_eigenvalues(self):
        states = numeric_spectrum(0.0, 5)
        for state in states:
            assert abs(state.omega - (2 * state.n + 1)) <= 1e-3
            assert state.physical

    def test_ground_eigenvector_matches_closed_form(self):
        state = numeric_spectrum(0.0, 0)[0]
        exact = np.exp(-state.xi ** 2 / 2.0) / math.pi ** 0.25
        assert np.max(np.abs(state.vector - exact)) <= 1e-4

    def test_eigenvector_parity(self):
        states = numeric_spectrum(0.05, 4)
        for state in states:
            sign = (-1.0) ** state.n
            assert np.max(np.abs(state.vector - sign * state.vector[::-1])) <= 1e-6

    def test_orthogonality(self):
        states = numeric_spectrum(0.05, 3)
        step = states[0].xi[1] - states[0].xi[0]
        for i in range(4):
            for j in range(i + 1, 4):
                inner = np.trapezoid(states[i].vector * states[j].vector, dx=step)
                assert abs(inner) <= 1e-6

    def test_strictly_increasing(self):
        omegas = [s.omega for s in numeric_spectrum(0.05, 5)]
        assert all(a < b for a, b in zip(omegas, omegas[1:]))

    def test_refinement_convergence(self):
        base = numeric_spectrum(0.0, 3, check_resolution=False)
        fine = numeric_spectrum(0.0, 3, n_points=8193, check_resolution=False)
        for a, b in zip(base, fine):
            assert abs(a.omega - b.omega) < 1e-3

    def test_coarse_grid_raises_resolution_error(self):
        with pytest.raises(ResolutionError):
            numeric_spectrum(0.0, 2, n_points=129)

    def test_cubic_agreement_at_moderate_coupling(self):
        states = numeric_spectrum(0.05, 2)
        levels = anharmonic_levels(0.05, 2, ModelParams(1.0, 1.0))
        for state, level in zip(states, levels):
            assert abs(level.omega - state.omega) / state.omega <= 0.10

    def test_negative_coupling_flags_and_ground_level(self):
        states = numeric_spectrum(-0.05, 3)
        assert states[0].omega < 1.0
        assert barrier_height(-0.05) == pytest.approx(5.0)
        assert states[0].physical and states[1].physical and states[2].physical
        assert not states[3].physical
        cubic = anharmonic_levels(-0.05, 2, ModelParams(1.0, 1.0))
        for state, level in zip(states, cubic):
            assert abs(level.omega - state.omega) / abs(state.omega) <= 0.10

    def test_sign_convention(self):
        for state in numeric_spectrum(0.0, 3):
            significant = np.flatnonzero(
                np.abs(state.vector) > 1e-12 * np.max(np.abs(state.vector)))
            assert state.vector[significant[0]] > 0.0

    def test_bad_arguments(self):
        with pytest.raises(DomainError):
            numeric_spectrum(0.0, -1)
        with pytest.raises(DomainError):
            numeric_spectrum(0.0, 2, n_points=100)


class TestDensityFromState:
    def test_matches_harmonic_ground_density(self):
        params = ModelParams(1.0, 1.0)
        state = numeric_spectrum(0.0, 0)[0]
        numeric = density_from_state(state, params)
        closed = harmonic_density(0, params,
                                  grid=GridSpec(numeric.r_min, numeric.r_max,
                                                numeric.n_points))
        assert np.max(np.abs(numeric.f - closed.f)) <= 1e-4

    def test_normalized(self):
        params = ModelParams(3.0, 0.5)
        for state in numeric_spectrum(0.02, 2):
            d = density_from_state(state, params)
            assert np.trapezoid(d.f, dx=d.dr) == pytest.approx(1.0, abs=1e-6)

    def test_first_excited_state_has_two_modes(self):
        state = numeric_spectrum(0.05, 1)[1]
        d = density_from_state(state, ModelParams(1.0, 1.0))
        assert count_modes(d) == 2


class TestMixtureDensity:
    def test_degenerate_weight_keeps_first(self):
        params = ModelParams(1.0, 1.0)
        spec = default_density_spec(1, params)
        d0 = harmonic_density(0, params, grid=spec)
        d1 = harmonic_density(1, params, grid=spec)
        mixed = mixture_density([1.0, 0.0], [d0, d1])
        assert np.array_equal(mixed.f, d0.f)

    def test_equal_mix_has_heavier_tails(self):
        params = ModelParams(1.0, 1.0)
        spec = default_density_spec(1, params)
        d0 = harmonic_density(0, params, grid=spec)
        d1 = harmonic_density(1, params, grid=spec)
        mixed = mixture_density([0.5, 0.5], [d0, d1])

        def tail_mass(d, cut):
            # moment quadrature oracle on the grid
            mask = np.abs(d.r) >= cut
            return np.trapezoid(np.where(mask, d.f, 0.0), dx=d.dr)

        # mixing in the level-1 component fattens every tail
        for cut in (0.5, 1.0, 1.5, 2.0):
            assert tail_mass(mixed, cut) > tail_mass(d0, cut)
        # and raises the absolute fourth moment
        m4_mixed = np.trapezoid(mixed.r ** 4 * mixed.f, dx=mixed.dr)
        m4_zero = np.trapezoid(d0.r ** 4 * d0.f, dx=d0.dr)
        assert m4_mixed > m4_zero

    def test_shouldered_mix_integrates_to_one(self):
        params = ModelParams(1.0, 1.0)
        spec = default_density_spec(3, params)
        d0 = harmonic_density(0, params, grid=spec)
        d3 = harmonic_density(3, params, grid=spec)
        mixed = mixture_density([0.9, 0.1], [d0, d3])
        assert np.trapezoid(mixed.f, dx=mixed.dr) == pytest.approx(1.0, abs=1e-6)
        assert count_modes(mixed) >= 1

    def test_mismatched_grids_rejected(self):
        params = ModelParams(1.0, 1.0)
        d0 = harmonic_density(0, params)
        d1 = harmonic_density(0, params, grid=GridSpec(-5.0, 5.0, 501))
        with pytest.raises(GridMismatchError):
            mixture_density([0.5, 0.5], [d0, d1])

    def test_bad_weights_rejected(self):
        d0 = harmonic_density(0, ModelParams(1.0, 1.0))
        with pytest.raises(DomainError):
            mixture_density([0.4, 0.4], [d0, d0])
        with pytest.raises(DomainError):
            mixture_density([1.5, -0.5], [d0, d0])


class TestCountModes:
    def test_ground_state_single_mode(self):
        assert count_modes(harmonic_density(0, ModelParams(1.0, 1.0))) == 1

    def test_flat_zero_density(self):
        assert count_modes(np.zeros(33)) == 0

    def test_prominence_filters_shallow_side_bumps(self):
        r = np.linspace(-1.2, 1.2, 4801)

        def npdf(x, mu, s):
            return np.exp(-((x - mu) / s) ** 2 / 2) / (math.sqrt(2 * math.pi) * s)

        m = 3e-4
        f = (1 - 2 * m) * npdf(r, 0.0, 0.2) + m * npdf(r, 0.9, 0.015) \
            + m * npdf(r, -0.9, 0.015)
        f /= np.trapezoid(f, dx=r[1] - r[0])
        d = DensityGrid(-1.2, 1.2, f)
        assert count_modes(d, prominence=0.01) == 1
        assert count_modes(d, prominence=1e-4) == 3


class TestDensityGridInvariants:
    def test_unnormalized_rejected(self):
        with pytest.raises(DomainError):
            DensityGrid(-1.0, 1.0, np.ones(11))

    def test_negative_values_rejected(self):
        f = np.full(11, 0.5)
        f[3] = -0.01
        with pytest.raises(DomainError):
            DensityGrid(-1.0, 1.0, f)
